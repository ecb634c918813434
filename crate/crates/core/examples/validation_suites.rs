//! Run every property suite with small sample counts.

use segavd::workbench::{run_validation, ValidationOptions, SUITES};

fn main() -> segavd::Result<()> {
    let opts = ValidationOptions {
        configs: 10,
        samples: 100,
        queries: 200,
        volume_samples: 50_000,
        ..ValidationOptions::default()
    };
    for suite in SUITES {
        let r = run_validation(suite, None, 3, &opts)?;
        println!(
            "{:<12} {} checks={:<7} violations={} max_violation={:.2e} {:?}",
            r.suite,
            if r.passed() { "pass" } else { "FAIL" },
            r.checks,
            r.violations,
            r.max_violation,
            r.measured
        );
    }
    Ok(())
}
