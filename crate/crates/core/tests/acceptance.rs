//! Full acceptance suite: one PASS/FAIL line per criterion.

use fracpme::harness::{verify, SuiteConfig, ALL_CRITERIA};
use std::io::Write;

/// Writes through the stderr handle so the lines show up even when the
/// test harness captures output.
fn report_line(line: &str) {
    let mut err = std::io::stderr().lock();
    writeln!(err, "{line}").expect("stderr is writable");
}

#[test]
fn acceptance_suite() {
    let report = verify(&SuiteConfig::default()).expect("suite runs");
    assert_eq!(report.criteria.len(), ALL_CRITERIA.len());
    for c in &report.criteria {
        report_line(&c.line());
    }
    let failed: Vec<u32> = report
        .criteria
        .iter()
        .filter(|c| !c.pass)
        .map(|c| c.id)
        .collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}

#[test]
fn coarse_profile_grid_fails_the_euler_lagrange_criterion() {
    let suite = SuiteConfig::from_json_str(r#"{"criteria": [3], "profile_n": 8}"#).unwrap();
    let report = verify(&suite).unwrap();
    report_line(&report.criteria[0].line());
    assert!(!report.pass);
    assert!(report.criteria[0].detail.contains("interior residual"));
}
