//! Runs the full acceptance suite at its stated tolerances and prints one
//! pass/fail line per criterion. Set `STOQLAB_ACCEPTANCE_FAST=1` for the
//! reduced-ensemble variant.

use std::process::ExitCode;

use stoqlab_cli::{run_suite, SuiteOptions};

fn main() -> ExitCode {
    let fast = std::env::var("STOQLAB_ACCEPTANCE_FAST").is_ok_and(|v| v == "1");
    if std::env::args().any(|a| a == "--list") {
        println!("acceptance: test");
        return ExitCode::SUCCESS;
    }
    println!("acceptance suite ({} mode)", if fast { "fast" } else { "full" });
    let report = run_suite(&SuiteOptions::new(fast), |check| println!("{}", check.line()));
    let passed = report.checks.iter().filter(|c| c.status == stoqlab_cli::CheckStatus::Pass).count();
    println!(
        "acceptance: {passed}/{} passed in {:.1}s: {}",
        report.checks.len(),
        report.runtime_s,
        if report.pass { "ok" } else { "FAILED" }
    );
    if report.pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
