use std::io::Write;

use whittaker_core::verify::{run_check, CRITERIA, DEFAULT_SEED};

// One test so the checks run back to back and their timings are not
// inflated by sibling tests. Lines go straight to stderr, past the
// harness capture, so every run shows the full matrix.
#[test]
fn acceptance_criteria() {
    let mut failed = Vec::new();
    for c in CRITERIA {
        let out = run_check(c.id, DEFAULT_SEED).expect("known check id");
        let _ = writeln!(std::io::stderr(), "{}", out.line());
        if !out.passed {
            failed.push(c.id);
        }
    }
    assert!(failed.is_empty(), "failing criteria: {failed:?}");
}
