//! Acceptance gate: prints one pass/fail line per criterion and exits
//! non-zero when any criterion fails.

use std::process::ExitCode;

use ripm_core::suite;

const SEED: u64 = 20240917;

fn main() -> ExitCode {
    let runs = suite::rate_runs();
    let outcomes = [
        suite::criterion_1_jacobian(SEED),
        suite::criterion_2_central_path(),
        suite::criterion_3_trs(SEED),
        suite::criterion_4_equivalence(SEED),
        suite::criterion_5_rates(&runs),
        suite::criterion_6_zero_inner(&runs),
        suite::criterion_7_theta_law(&runs),
        suite::criterion_8_positive_hessian(&runs),
        suite::criterion_9_schedule(),
        suite::criterion_10_regularity(),
        suite::criterion_11_determinism(&runs),
    ];
    for o in &outcomes {
        println!("{o}");
    }
    let failed: Vec<u8> = outcomes.iter().filter(|o| !o.passed).map(|o| o.id).collect();
    if failed.is_empty() {
        println!("acceptance: all {} criteria passed", outcomes.len());
        ExitCode::SUCCESS
    } else {
        println!("acceptance: failed criteria {failed:?}");
        ExitCode::FAILURE
    }
}
