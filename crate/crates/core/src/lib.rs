//! Anisotropic approximate nearest-neighbor search over disjoint line segments.
//!
//! Queries are answered by descending a leveled DAG of ellipsoids. Each ellipsoid
//! is inscribed in a *capsule*, the intersection of concentric cylinders and
//! balls that follow the local shape of the distance field.
//!
//! ```no_run
//! use segavd::{avd, workbench, linalg::Point};
//! let set = workbench::gen_random(20, 2, 42, 0.01, None).unwrap();
//! let dag = avd::build(&set, 0.5, &avd::BuildConfig::default()).unwrap();
//! let hit = dag.query(&Point::new(&[0.3, 0.7]));
//! println!("segment {} at distance {}", hit.segment, hit.distance);
//! ```
//!
//! Runnable examples live under `examples/`:
//!
//! ```text
//! cargo run --example distances
//! cargo run --example local_tensors
//! cargo run --example capsules
//! cargo run --example inscribed_ellipsoid
//! cargo run --example build_and_query
//! cargo run --example griddle_lower_bound
//! cargo run --example validation_suites
//! cargo run --example bench
//! cargo run --example render_svg
//! ```

pub mod avd;
pub mod capsule;
pub mod cli;
pub mod config;
pub mod ellipsoid;
pub mod error;
pub mod geometry;
pub mod linalg;
pub mod svg;
pub mod tensors;
pub mod workbench;

pub use error::{Error, Result};
