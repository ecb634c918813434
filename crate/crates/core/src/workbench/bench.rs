use std::fmt::Write as _;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{brute_force_nn, gen_random};
use crate::avd::{self, BuildConfig};
use crate::ellipsoid::Ellipsoid;
use crate::error::{Error, Result};
use crate::linalg::Point;

/// A family of random instances crossed with a list of ε values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchSpec {
    pub sizes: Vec<usize>,
    pub dim: usize,
    pub epsilons: Vec<f64>,
    /// Uniform queries inside `B⁺` per instance; zero skips the query phase.
    pub queries: usize,
    pub seed: u64,
    pub min_gap: f64,
    pub root_samples: usize,
    pub node_samples: usize,
}

impl Default for BenchSpec {
    fn default() -> Self {
        Self {
            sizes: vec![5, 10, 20],
            dim: 2,
            epsilons: vec![0.5],
            queries: 1000,
            seed: 0,
            min_gap: 0.01,
            root_samples: 10_000,
            node_samples: 100,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Latency {
    pub mean_us: f64,
    pub p50_us: f64,
    pub p90_us: f64,
    pub p99_us: f64,
    pub max_us: f64,
}

impl Latency {
    fn from_samples(mut us: Vec<f64>) -> Self {
        if us.is_empty() {
            return Self::default();
        }
        us.sort_by(f64::total_cmp);
        let at = |q: f64| us[((us.len() - 1) as f64 * q).round() as usize];
        Self {
            mean_us: us.iter().sum::<f64>() / us.len() as f64,
            p50_us: at(0.5),
            p90_us: at(0.9),
            p99_us: at(0.99),
            max_us: us[us.len() - 1],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchInstance {
    pub n: usize,
    pub dim: usize,
    pub epsilon: f64,
    pub seed: u64,
    pub spread: Option<f64>,
    pub build_ms: f64,
    pub node_count: usize,
    pub levels: usize,
    pub max_out_degree: usize,
    pub max_pair_charge: usize,
    pub uncovered_sample_rate: f64,
    pub queries: usize,
    pub correct: usize,
    pub fallbacks: usize,
    /// Fraction of queries within `(1+ε)` of the oracle; 1 when no queries ran.
    pub correctness_rate: f64,
    pub latency: Latency,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub spec: BenchSpec,
    pub instances: Vec<BenchInstance>,
    /// Node counts never decrease along `sizes` for each ε.
    pub monotone_in_n: bool,
    /// Node counts never decrease as ε shrinks for each size.
    pub monotone_in_epsilon: bool,
}

impl BenchReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "n,dim,epsilon,seed,spread,build_ms,node_count,levels,max_out_degree,max_pair_charge,\
             queries,correct,fallbacks,correctness_rate,mean_us,p50_us,p90_us,p99_us,max_us\n",
        );
        for i in &self.instances {
            let l = &i.latency;
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                i.n,
                i.dim,
                i.epsilon,
                i.seed,
                i.spread.map_or(String::new(), |s| s.to_string()),
                i.build_ms,
                i.node_count,
                i.levels,
                i.max_out_degree,
                i.max_pair_charge,
                i.queries,
                i.correct,
                i.fallbacks,
                i.correctness_rate,
                l.mean_us,
                l.p50_us,
                l.p90_us,
                l.p99_us,
                l.max_us
            );
        }
        out
    }

    pub fn node_count(&self, n: usize, eps: f64) -> Option<usize> {
        self.instances
            .iter()
            .find(|i| i.n == n && i.epsilon == eps)
            .map(|i| i.node_count)
    }
}

/// Builds every `(n, ε)` pair of `spec`, times construction and warm
/// queries, and checks each answer against the brute-force oracle.
pub fn run_bench(spec: &BenchSpec) -> Result<BenchReport> {
    if spec.epsilons.iter().any(|&e| !(e > 0.0)) {
        return Err(Error::Usage("every epsilon must be positive".into()));
    }
    let mut instances = Vec::new();
    for &n in &spec.sizes {
        let set = gen_random(n, spec.dim, spec.seed, spec.min_gap, None)?;
        for &eps in &spec.epsilons {
            let cfg = BuildConfig {
                root_samples: spec.root_samples,
                node_samples: spec.node_samples,
                ..BuildConfig::with_seed(spec.seed)
            };
            let start = Instant::now();
            let dag = avd::build(&set, eps, &cfg)?;
            let build_ms = start.elapsed().as_secs_f64() * 1e3;

            let ball = Ellipsoid::ball(dag.domain.center, dag.domain.radius);
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed ^ 0xBE4C_0000 ^ n as u64);
            let points: Vec<Point> = (0..spec.queries).map(|_| ball.sample_interior(&mut rng)).collect();
            for q in &points {
                std::hint::black_box(dag.query(q));
            }
            let mut times = Vec::with_capacity(points.len());
            let (mut correct, mut fallbacks) = (0, 0);
            for q in &points {
                let t = Instant::now();
                let got = dag.query(q);
                times.push(t.elapsed().as_secs_f64() * 1e6);
                let best = brute_force_nn(&set, q).1;
                if got.distance <= (1.0 + eps) * best + 1e-9 {
                    correct += 1;
                }
                if got.fallback {
                    fallbacks += 1;
                }
            }
            let s = &dag.stats;
            instances.push(BenchInstance {
                n,
                dim: spec.dim,
                epsilon: eps,
                seed: spec.seed,
                spread: set.spread,
                build_ms,
                node_count: s.node_count,
                levels: s.levels,
                max_out_degree: s.max_out_degree,
                max_pair_charge: s.max_pair_charge,
                uncovered_sample_rate: s.uncovered_sample_rate,
                queries: points.len(),
                correct,
                fallbacks,
                correctness_rate: if points.is_empty() { 1.0 } else { correct as f64 / points.len() as f64 },
                latency: Latency::from_samples(times),
            });
        }
    }
    let count = |n: usize, e: f64| {
        instances
            .iter()
            .find(|i: &&BenchInstance| i.n == n && i.epsilon == e)
            .map_or(0, |i| i.node_count)
    };
    let monotone_in_n = spec
        .epsilons
        .iter()
        .all(|&e| spec.sizes.windows(2).all(|w| w[0] > w[1] || count(w[0], e) <= count(w[1], e)));
    let monotone_in_epsilon = spec.sizes.iter().all(|&n| {
        spec.epsilons
            .windows(2)
            .all(|w| w[0] < w[1] || count(n, w[0]) <= count(n, w[1]))
    });
    Ok(BenchReport {
        spec: spec.clone(),
        instances,
        monotone_in_n,
        monotone_in_epsilon,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> BenchSpec {
        BenchSpec {
            sizes: vec![3, 6],
            epsilons: vec![1.0, 0.5],
            queries: 50,
            root_samples: 200,
            node_samples: 5,
            ..BenchSpec::default()
        }
    }

    #[test]
    fn reports_every_pair_and_is_correct() {
        let r = run_bench(&tiny()).unwrap();
        assert_eq!(r.instances.len(), 4);
        for i in &r.instances {
            assert_eq!(i.queries, 50);
            assert_eq!(i.correctness_rate, 1.0);
        }
        let csv = r.to_csv();
        assert_eq!(csv.lines().count(), 5);
        let back: BenchReport = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(back.instances.len(), 4);
    }

    #[test]
    fn no_queries_gives_build_stats_only() {
        let spec = BenchSpec {
            queries: 0,
            sizes: vec![4],
            epsilons: vec![1.0],
            ..tiny()
        };
        let r = run_bench(&spec).unwrap();
        assert_eq!(r.instances[0].queries, 0);
        assert!(r.instances[0].node_count > 0);
        assert_eq!(r.instances[0].latency, Latency::default());
    }
}
