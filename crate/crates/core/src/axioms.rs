//! Pass/fail bookkeeping shared by the algebra and module checkers.

use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub identity: String,
    pub witness: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AxiomReport {
    /// Number of individual identities evaluated.
    pub checked: usize,
    pub violations: Vec<Violation>,
}

impl AxiomReport {
    pub fn new() -> AxiomReport {
        AxiomReport::default()
    }

    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn check(&mut self, holds: bool, identity: &str, witness: impl FnOnce() -> String) {
        self.checked += 1;
        if !holds {
            self.violations.push(Violation { identity: identity.to_string(), witness: witness() });
        }
    }

    pub fn fails(&self, identity: &str) -> bool {
        self.violations.iter().any(|v| v.identity == identity)
    }

    pub fn first_failure(&self) -> Option<&Violation> {
        self.violations.first()
    }

    pub fn merge(&mut self, other: AxiomReport) {
        self.checked += other.checked;
        self.violations.extend(other.violations);
    }
}
