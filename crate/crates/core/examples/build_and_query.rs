//! Build a structure on a random instance, query it, and round-trip it
//! through the structure file format.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use segavd::avd::{self, BuildConfig};
use segavd::ellipsoid::Ellipsoid;
use segavd::workbench::{brute_force_nn, gen_random};

fn main() -> segavd::Result<()> {
    let eps = 0.5;
    let set = gen_random(10, 2, 42, 0.02, None)?;
    let cfg = BuildConfig {
        node_samples: 100,
        ..BuildConfig::with_seed(7)
    };
    let dag = avd::build(&set, eps, &cfg)?;
    let s = &dag.stats;
    println!(
        "{} nodes, {} levels, {} basic and {} final leaves, max degree {}, uncovered rate {}",
        s.node_count, s.levels, s.basic_leaf_count, s.final_leaf_count, s.max_out_degree, s.uncovered_sample_rate
    );
    let ball = Ellipsoid::ball(dag.domain.center, dag.domain.radius);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let q = ball.sample_interior(&mut rng);
        let got = dag.query(&q);
        let best = brute_force_nn(&set, &q).1;
        worst = worst.max(got.distance / best.max(1e-300));
    }
    println!("worst ratio over 1000 queries: {worst:.4} (allowed {})", 1.0 + eps);
    let text = avd::serialize(&dag);
    let back = avd::deserialize(&text)?;
    println!("round trip: {} bytes, stats equal: {}", text.len(), back.stats == dag.stats);
    Ok(())
}
