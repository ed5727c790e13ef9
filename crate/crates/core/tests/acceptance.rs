//! Acceptance suite. Every criterion runs and prints one PASS/FAIL line;
//! the process fails if any criterion does.

use std::process::ExitCode;

use cppsfs::verify::{self, CriterionOutcome};

type Criterion = (&'static str, fn() -> cppsfs::Result<CriterionOutcome>);

const CRITERIA: [Criterion; 9] = [
    ("A1", verify::integrals_match_quadrature),
    ("A2", verify::covariance_cross_check),
    ("A3", verify::critical_clt),
    ("A4", verify::supercritical_lln),
    ("A5", verify::supercritical_clt),
    ("A6", verify::branch_means),
    ("A7", verify::structural_oracles),
    ("A8", verify::forward_oracle),
    ("A9", verify::sfs_poisson_law),
];

fn main() -> ExitCode {
    // `cargo test -- <filter>` narrows the run to matching ids.
    let filters: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = Vec::new();
    let mut ran = 0;
    for (id, check) in CRITERIA {
        if !filters.is_empty() && !filters.iter().any(|f| id.eq_ignore_ascii_case(f)) {
            continue;
        }
        ran += 1;
        match check() {
            Ok(outcome) => {
                println!("{outcome}");
                if !outcome.passed {
                    failed.push(id);
                }
            }
            Err(e) => {
                println!("{id} FAIL (error): {e}");
                failed.push(id);
            }
        }
    }
    println!(
        "\nacceptance: {} passed; {} failed{}",
        ran - failed.len(),
        failed.len(),
        if failed.is_empty() { String::new() } else { format!(" ({})", failed.join(", ")) }
    );
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
