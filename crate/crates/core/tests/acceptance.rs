//! Acceptance suite. Runs every criterion at its pinned tolerance, prints one
//! pass/fail line per criterion with its measurements, and exits non-zero if
//! any criterion or the mutation meta-check fails.
//!
//! Numeric arguments restrict the run to those criterion ids; flags passed by
//! the test runner are ignored.

use std::process::ExitCode;

use zeeman_xpm::validation::{criterion, mutation_detected, CRITERIA};

fn main() -> ExitCode {
    let ids: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let selected: Vec<_> = if ids.is_empty() {
        CRITERIA.to_vec()
    } else {
        ids.iter().filter_map(|&id| criterion(id)).collect()
    };
    let mut failed = 0;
    for c in &selected {
        let r = c.run();
        println!("{}", r.line());
        for d in r.details() {
            println!("    {d}");
        }
        if !r.passed {
            failed += 1;
        }
    }
    let detected = mutation_detected();
    println!(
        "meta         {} sign-flip mutation caught by the probe-swap check",
        if detected { "PASS" } else { "FAIL" }
    );
    if !detected {
        failed += 1;
    }
    println!(
        "acceptance: {} of {} checks passed",
        selected.len() + 1 - failed,
        selected.len() + 1
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
