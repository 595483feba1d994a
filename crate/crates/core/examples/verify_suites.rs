//! Runs the fast verification suites and prints a summary of each.

use poisson_sharp::verify::{run_suite, Suite, SuiteOptions};

fn main() -> poisson_sharp::Result<()> {
    let opts = SuiteOptions::default();
    for suite in [Suite::Alpha1, Suite::ClosedForms] {
        let r = run_suite(suite, &opts)?;
        println!("{suite}: {} checks, {} failed", r.checks.len(), r.failures());
        for note in &r.notes {
            println!("  note: {note}");
        }
    }
    Ok(())
}
