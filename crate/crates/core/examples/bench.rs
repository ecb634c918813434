//! Node-count scaling and query latency over a small random family.

use segavd::workbench::{run_bench, BenchSpec};

fn main() -> segavd::Result<()> {
    let spec = BenchSpec {
        sizes: vec![5, 10, 20],
        epsilons: vec![1.0, 0.5],
        queries: 1000,
        seed: 4,
        ..BenchSpec::default()
    };
    let report = run_bench(&spec)?;
    print!("{}", report.to_csv());
    println!("monotone in n: {}, monotone in 1/eps: {}", report.monotone_in_n, report.monotone_in_epsilon);
    Ok(())
}
