use std::io::Write;

use sel_cli::acceptance::{run, Selection, DEFAULT_SEED};

#[test]
fn acceptance_criteria() {
    let report = run(&Selection::All, DEFAULT_SEED);
    let mut err = std::io::stderr().lock();
    for o in &report.outcomes {
        let _ = writeln!(
            err,
            "criterion {:>2} {:<20} {} {}",
            o.id,
            o.name,
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
    }
    assert_eq!(report.outcomes.len(), 10);
    let failed: Vec<u8> = report.outcomes.iter().filter(|o| !o.pass).map(|o| o.id).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
