//! The acceptance suite as an integration test target: every criterion
//! runs at its stated tolerance and prints one pass/fail line.

use std::path::Path;

use wfunc_cli::verify;

#[test]
fn acceptance_criteria() {
    let bin = Path::new(env!("CARGO_BIN_EXE_wfunc"));
    let outcomes = verify::run_all(bin);
    let mut failures = Vec::new();
    for o in &outcomes {
        let status = if o.pass { "PASS" } else { "FAIL" };
        println!(
            "[{status}] criterion {:>2}: {} ({:.1}s) - {}",
            o.id, o.name, o.secs, o.detail
        );
        if !o.pass {
            failures.push(format!("criterion {}: {}", o.id, o.detail));
        }
    }
    assert!(failures.is_empty(), "failed criteria:\n{}", failures.join("\n"));
}
