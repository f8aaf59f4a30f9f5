//! Acceptance suite: runs every criterion and prints one line each.
//!
//! `ACCEPTANCE_ONLY=7,12` restricts the run, `ACCEPTANCE_QUICK=1` uses the
//! reduced grids and `ACCEPTANCE_VERBOSE=1` prints the per-criterion notes.

use std::process::ExitCode;

use grushin::verify::{run_criterion, VerifyOptions, CRITERIA};

fn main() -> ExitCode {
    let only: Option<Vec<u32>> = std::env::var("ACCEPTANCE_ONLY")
        .ok()
        .map(|s| s.split(',').filter_map(|t| t.trim().parse().ok()).collect());
    let opts = VerifyOptions {
        quick: std::env::var("ACCEPTANCE_QUICK").is_ok_and(|v| v == "1"),
        ..VerifyOptions::default()
    };
    let verbose = std::env::var("ACCEPTANCE_VERBOSE").is_ok_and(|v| v == "1");
    let mut failed = vec![];
    for id in CRITERIA {
        if only.as_ref().is_some_and(|o| !o.contains(&id)) {
            continue;
        }
        match run_criterion(id, &opts) {
            Ok(outcome) => {
                println!("{} ({:.1} s)", outcome.summary_line(), outcome.seconds);
                if verbose {
                    for n in &outcome.notes {
                        println!("    {n}");
                    }
                }
                if !outcome.passed {
                    failed.push(id);
                }
            }
            Err(e) => {
                println!("criterion {id:>2} FAIL: error: {e}");
                failed.push(id);
            }
        }
    }
    if failed.is_empty() {
        println!("acceptance: all criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: failed criteria {failed:?}");
        ExitCode::FAILURE
    }
}
