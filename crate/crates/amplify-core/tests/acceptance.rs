//! Runs every acceptance criterion and prints one PASS/FAIL line per criterion.

use amplify_core::acceptance::{format_reports, run_all};

fn main() {
    let filter = std::env::args().skip(1).find(|a| !a.starts_with('-'));
    let reports = run_all(filter.as_deref());
    print!("{}", format_reports(&reports));
    if reports.iter().any(|r| !r.passed) {
        std::process::exit(1);
    }
}
