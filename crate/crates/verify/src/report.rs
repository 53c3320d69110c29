use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

pub const SCHEMA_VERSION: u32 = 1;

/// Where an expected verdict comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    /// A claim stated in the source being checked.
    PublishedClaim,
    /// True by how the fixture is built.
    ByConstruction,
    /// Computed by a second, independent method.
    IndependentOracle,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Expectation {
    pub claim: String,
    pub provenance: Provenance,
    pub passed: bool,
    /// Smallest failing input found, only on failure.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioReport {
    pub name: String,
    pub passed: bool,
    pub expectations: Vec<Expectation>,
    #[serde(default)]
    pub witnesses: BTreeMap<String, Value>,
    /// Wall time; the only field allowed to differ between identical runs.
    pub elapsed_ms: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub field: String,
    pub window: [i64; 2],
    pub seed: u64,
    pub bar_convention: String,
    pub passed: bool,
    pub scenarios: Vec<ScenarioReport>,
}

impl Report {
    pub fn failures(&self) -> impl Iterator<Item = (&str, &Expectation)> {
        self.scenarios
            .iter()
            .flat_map(|s| s.expectations.iter().filter(|e| !e.passed).map(move |e| (s.name.as_str(), e)))
    }

    pub fn scenario(&self, name: &str) -> Option<&ScenarioReport> {
        self.scenarios.iter().find(|s| s.name == name)
    }

    /// Copy with every timing field zeroed.
    pub fn without_timing(&self) -> Report {
        let mut r = self.clone();
        for s in &mut r.scenarios {
            s.elapsed_ms = 0;
        }
        r
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Report {
        Report {
            schema_version: SCHEMA_VERSION,
            field: "q".into(),
            window: [-10, 10],
            seed: 1,
            bar_convention: "shifted".into(),
            passed: false,
            scenarios: vec![ScenarioReport {
                name: "x".into(),
                passed: false,
                expectations: vec![Expectation {
                    claim: "c".into(),
                    provenance: Provenance::IndependentOracle,
                    passed: false,
                    counterexample: Some("n = 3".into()),
                }],
                witnesses: BTreeMap::from([("k".into(), serde_json::json!([1, 2]))]),
                elapsed_ms: 4,
            }],
        }
    }

    #[test]
    fn json_roundtrip() {
        let r = sample();
        let s = serde_json::to_string(&r).unwrap();
        assert_eq!(serde_json::from_str::<Report>(&s).unwrap(), r);
        assert!(s.contains("\"independent-oracle\""));
        assert_eq!(r.failures().count(), 1);
    }

    #[test]
    fn timing_is_the_only_volatile_field() {
        let a = sample();
        let mut b = sample();
        b.scenarios[0].elapsed_ms = 99;
        assert_ne!(a, b);
        assert_eq!(a.without_timing(), b.without_timing());
    }
}
