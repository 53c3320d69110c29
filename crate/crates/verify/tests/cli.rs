use std::process::{Command, Output};

use cdglab_verify::report::Report;

fn verify(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_verify")).args(args).output().expect("binary runs")
}

fn report(out: &Output) -> Report {
    serde_json::from_slice(&out.stdout).expect("stdout is a report")
}

#[test]
fn empty_scenario_list_gives_empty_report() {
    let out = verify(&[]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r.schema_version, 1);
    assert!(r.scenarios.is_empty() && r.passed);
}

#[test]
fn passing_scenario_exits_zero() {
    let out = verify(&["--scenario", "prophor-cone", "--field", "fp:5"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r.field, "fp:5");
    assert!(r.scenario("prophor-cone").unwrap().witnesses.contains_key("cone_iso"));
}

#[test]
fn failing_expectation_exits_nonzero() {
    let out = verify(&["--scenario", "ku-cocycle"]);
    assert_eq!(out.status.code(), Some(1));
    let r = report(&out);
    let (_, e) = r.failures().next().unwrap();
    assert!(e.counterexample.is_some());
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(verify(&["--scenario", "no-such"]).status.code(), Some(2));
    assert_eq!(verify(&["--field", "fp:4"]).status.code(), Some(2));
    assert_eq!(verify(&["--window", "5:1"]).status.code(), Some(2));
}

#[test]
fn reports_are_deterministic_modulo_timing() {
    let args = ["--scenario", "lemindec-random", "--scenario", "derivedzero-ses", "--seed", "9", "--window", "-4:4"];
    let a = report(&verify(&args));
    let b = report(&verify(&args));
    assert_eq!(a.without_timing(), b.without_timing());
    assert_eq!(a.window, [-4, 4]);
    let names: Vec<&str> = a.scenarios.iter().map(|s| s.name.as_str()).collect();
    assert_eq!(names, ["derivedzero-ses", "lemindec-random"]);
}

#[test]
fn report_file_roundtrips() {
    let dir = std::env::temp_dir().join(format!("verify-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("r.json");
    let out = verify(&["--scenario", "z2-tautology", "--report", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&path).unwrap();
    let r: Report = serde_json::from_str(&text).unwrap();
    assert_eq!(serde_json::from_str::<Report>(&serde_json::to_string(&r).unwrap()).unwrap(), r);
    std::fs::remove_dir_all(&dir).unwrap();
}
