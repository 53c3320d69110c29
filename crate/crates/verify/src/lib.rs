//! Runs named scenarios against the `cdglab` library and aggregates a
//! JSON report.

pub mod report;
pub mod scenarios;

use std::time::Instant;

use rayon::prelude::*;

use cdglab::bar::BarConvention;
use cdglab::linalg::Field;
use cdglab::{Error, Result};

use report::{Expectation, Provenance, Report, ScenarioReport, SCHEMA_VERSION};

pub const DEFAULT_SEED: u64 = 20_240_611;
pub const DEFAULT_WINDOW: (i64, i64) = (-10, 10);

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Config {
    pub field: Field,
    pub window: (i64, i64),
    pub seed: u64,
    pub bar_convention: BarConvention,
}

impl Default for Config {
    fn default() -> Config {
        Config {
            field: Field::Rationals,
            window: DEFAULT_WINDOW,
            seed: DEFAULT_SEED,
            bar_convention: BarConvention::Shifted,
        }
    }
}

/// `LO:HI` with `LO <= HI`.
pub fn parse_window(s: &str) -> Result<(i64, i64)> {
    let (lo, hi) = s.split_once(':').ok_or_else(|| Error::Parse(format!("window must be LO:HI, got {s:?}")))?;
    let num = |x: &str| x.trim().parse::<i64>().map_err(|_| Error::Parse(format!("bad window bound {x:?}")));
    let (lo, hi) = (num(lo)?, num(hi)?);
    if lo > hi {
        return Err(Error::Usage(format!("empty window {lo}:{hi}")));
    }
    Ok((lo, hi))
}

pub fn scenario_names() -> Vec<&'static str> {
    scenarios::CATALOG.iter().map(|(n, _)| *n).collect()
}

fn run_one(name: &str, cfg: &Config) -> ScenarioReport {
    let run = scenarios::lookup(name).expect("names are resolved before running");
    let start = Instant::now();
    let mut cx = scenarios::Ctx::default();
    if let Err(e) = run(cfg, &mut cx) {
        cx.expectations.push(Expectation {
            claim: "fixtures build and every check runs".into(),
            provenance: Provenance::ByConstruction,
            passed: false,
            counterexample: Some(e.to_string()),
        });
    }
    let passed = !cx.expectations.is_empty() && cx.expectations.iter().all(|e| e.passed);
    ScenarioReport {
        name: name.to_string(),
        passed,
        expectations: cx.expectations,
        witnesses: cx.witnesses,
        elapsed_ms: start.elapsed().as_millis() as u64,
    }
}

/// Runs the named scenarios in parallel; the report is sorted by name and
/// duplicates run once. Unknown names are rejected before anything runs.
pub fn run(names: &[String], cfg: &Config) -> Result<Report> {
    if let Some(bad) = names.iter().find(|n| !scenarios::is_known(n)) {
        return Err(Error::Usage(format!("unknown scenario {bad:?}; known: {}", scenario_names().join(", "))));
    }
    let mut names: Vec<&str> = names.iter().map(String::as_str).collect();
    names.sort_unstable();
    names.dedup();
    let scenarios: Vec<ScenarioReport> = names.par_iter().map(|n| run_one(n, cfg)).collect();
    Ok(Report {
        schema_version: SCHEMA_VERSION,
        field: cfg.field.label(),
        window: [cfg.window.0, cfg.window.1],
        seed: cfg.seed,
        bar_convention: cfg.bar_convention.to_string(),
        passed: scenarios.iter().all(|s| s.passed),
        scenarios,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_cli_values() {
        assert_eq!(parse_window("-10:10").unwrap(), (-10, 10));
        assert!(parse_window("3:1").is_err());
        assert!(parse_window("3").is_err());
    }

    #[test]
    fn catalog_is_sorted_and_complete() {
        let names = scenario_names();
        let mut sorted = names.clone();
        sorted.sort_unstable();
        assert_eq!(names, sorted);
        assert_eq!(names.len(), 13);
    }

    #[test]
    fn empty_run_passes() {
        let r = run(&[], &Config::default()).unwrap();
        assert!(r.passed && r.scenarios.is_empty());
    }

    #[test]
    fn unknown_scenario_is_an_error() {
        assert!(matches!(run(&["nope".into()], &Config::default()), Err(Error::Usage(_))));
    }
}
