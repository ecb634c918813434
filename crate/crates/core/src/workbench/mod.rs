//! Oracles, instance generators, validation suites and the benchmark harness.

mod bench;
mod generators;
mod griddle;
mod oracle;
pub mod suites;

pub use bench::{run_bench, BenchInstance, BenchReport, BenchSpec, Latency};
pub use generators::gen_random;
pub use griddle::{default_delta, gen_griddle, verify_griddle, GriddleInstance, GriddlePoint, GriddleReport};
pub use oracle::brute_force_nn;
pub use suites::{run_validation, SuiteReport, ValidationOptions, SUITES};
