use std::io::Write;

use waves_core::verify::{run_all, CriterionResult, VerifyOptions};

// Written to the raw stderr handle so the lines survive the test harness's
// output capture.
fn report(results: &[CriterionResult]) {
    let mut err = std::io::stderr().lock();
    for r in results {
        let _ = writeln!(err, "{}", r.line());
    }
}

#[test]
fn acceptance_criteria() {
    let results = run_all(VerifyOptions::default());
    report(&results);
    assert_eq!(results.len(), 9);
    let failed: Vec<u8> = results.iter().filter(|r| !r.passed).map(|r| r.id).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}

#[test]
fn quick_suite_passes() {
    let results = run_all(VerifyOptions { quick: true, ..VerifyOptions::default() });
    assert!(results.iter().all(|r| r.passed), "{:#?}", results.iter().filter(|r| !r.passed).collect::<Vec<_>>());
}

#[test]
fn suite_is_deterministic() {
    let opts = VerifyOptions { quick: true, ..VerifyOptions::default() };
    let strip = |rs: Vec<CriterionResult>| rs.into_iter().map(|r| (r.id, r.passed, r.detail)).collect::<Vec<_>>();
    assert_eq!(strip(run_all(opts)), strip(run_all(opts)));
}
