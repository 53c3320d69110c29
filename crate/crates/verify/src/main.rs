use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use cdglab::bar::BarConvention;
use cdglab_verify::{parse_window, run, scenario_names, Config, DEFAULT_SEED};

#[derive(Parser, Debug)]
#[command(name = "verify", about = "Run builtin scenarios and emit a JSON report")]
struct Args {
    /// Scenario to run; repeatable.
    #[arg(long = "scenario", value_name = "NAME")]
    scenarios: Vec<String>,
    /// Run the whole catalog.
    #[arg(long)]
    all: bool,
    /// `q` or `fp:P`.
    #[arg(long, default_value = "q")]
    field: cdglab::linalg::Field,
    /// Degree window `LO:HI`.
    #[arg(long, default_value = "-10:10", value_parser = parse_window, allow_hyphen_values = true)]
    window: (i64, i64),
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Write the report here instead of stdout.
    #[arg(long, value_name = "PATH.json")]
    report: Option<PathBuf>,
    #[arg(long, default_value = "shifted")]
    bar_convention: BarConvention,
    /// Print the scenario catalog and exit.
    #[arg(long)]
    list: bool,
}

fn main() -> ExitCode {
    let args = Args::parse();
    if args.list {
        for n in scenario_names() {
            println!("{n}");
        }
        return ExitCode::SUCCESS;
    }
    let names: Vec<String> =
        if args.all { scenario_names().into_iter().map(String::from).collect() } else { args.scenarios };
    let cfg = Config { field: args.field, window: args.window, seed: args.seed, bar_convention: args.bar_convention };
    let report = match run(&names, &cfg) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("verify: {e}");
            return ExitCode::from(2);
        }
    };
    for s in &report.scenarios {
        eprintln!("{} {} ({} ms)", if s.passed { "PASS" } else { "FAIL" }, s.name, s.elapsed_ms);
        for e in s.expectations.iter().filter(|e| !e.passed) {
            eprintln!("    {}: {}", e.claim, e.counterexample.as_deref().unwrap_or(""));
        }
    }
    let json = serde_json::to_string_pretty(&report).expect("reports serialize");
    match &args.report {
        Some(path) => {
            if let Err(e) = std::fs::write(path, json + "\n") {
                eprintln!("verify: cannot write {}: {e}", path.display());
                return ExitCode::from(2);
            }
        }
        None => println!("{json}"),
    }
    if report.passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
