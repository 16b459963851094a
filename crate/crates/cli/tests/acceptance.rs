//! Runs the eight acceptance criteria on the default configuration and
//! prints one verdict line per criterion. Built without the libtest harness
//! so the lines are never captured; a failing criterion fails the target.

use std::process::ExitCode;

use nhbs_cli::acceptance::run_acceptance;
use nhbs_cli::config::Config;

fn main() -> ExitCode {
    let resolved = match Config::default().resolve() {
        Ok(r) => r,
        Err(e) => {
            eprintln!("default configuration does not resolve: {e:#}");
            return ExitCode::FAILURE;
        }
    };
    let verdicts = run_acceptance(&resolved);
    for v in &verdicts {
        println!("{}", v.line());
    }
    let failed: Vec<u8> = verdicts
        .iter()
        .filter(|v| !v.passed)
        .map(|v| v.id)
        .collect();
    if verdicts.len() == 8 && failed.is_empty() {
        println!("acceptance: all 8 criteria pass");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: failed criteria {failed:?}");
        ExitCode::FAILURE
    }
}
