//! The twelve acceptance criteria, run one after another (several carry
//! wall-clock limits). Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fails.
//!
//! `cargo test -p pam-core --test acceptance [-- ID...]` runs all criteria, or
//! only the listed ids.

use std::process::ExitCode;

use pam_core::verify::{criterion_name, run_criterion, CRITERIA};

const SEED: u64 = 42;

fn main() -> ExitCode {
    let ids: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let ids = if ids.is_empty() { (1..=CRITERIA).collect() } else { ids };
    let mut failed = Vec::new();
    for id in ids {
        match run_criterion(id, SEED) {
            Ok(res) => {
                println!("{}", res.line());
                if !res.passed {
                    failed.push(id);
                }
            }
            Err(e) => {
                println!("criterion {id:>2} FAIL {}: {e}", criterion_name(id));
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
