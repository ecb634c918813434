use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{AvdDag, BuildStats, NodeKind};
use crate::config::TOL;
use crate::ellipsoid::Ellipsoid;
use crate::geometry::lfs_unchecked;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CoverageAudit {
    pub root_samples: usize,
    pub root_uncovered: usize,
    pub node_samples: usize,
    pub node_uncovered: usize,
}

impl CoverageAudit {
    pub fn rate(&self) -> f64 {
        let total = self.root_samples + self.node_samples;
        if total == 0 {
            0.0
        } else {
            (self.root_uncovered + self.node_uncovered) as f64 / total as f64
        }
    }
}

/// Monte Carlo coverage check: uniform points of `B⁺` against the roots, and
/// points of every non-final node's outer ellipsoid against its children.
/// Samples are restricted to `B⁺` and, for refinement nodes, to the outer
/// ellipsoid of the basic leaf being refined.
pub fn audit_coverage(dag: &AvdDag, root_samples: usize, node_samples: usize, seed: u64) -> CoverageAudit {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xA0D1_7C0F_FEE5_0001);
    let inside = |e: &Ellipsoid, q: &crate::linalg::Point| e.form(q) <= 1.0 + TOL.membership;
    let mut audit = CoverageAudit {
        root_samples: 0,
        root_uncovered: 0,
        node_samples: 0,
        node_uncovered: 0,
    };
    let ball = Ellipsoid::ball(dag.domain.center, dag.domain.radius);
    for _ in 0..root_samples {
        let q = ball.sample_interior(&mut rng);
        audit.root_samples += 1;
        if !dag.roots.iter().any(|&r| inside(&dag.nodes[r].outer, &q)) {
            audit.root_uncovered += 1;
        }
    }
    for node in &dag.nodes {
        if node.kind == NodeKind::FinalLeaf {
            continue;
        }
        let mut taken = 0;
        let mut tries = 0;
        while taken < node_samples && tries < 20 * node_samples {
            tries += 1;
            let q = node.outer.sample_interior(&mut rng);
            if !dag.domain.contains(&q) {
                continue;
            }
            if let Some(a) = node.anchor {
                if !inside(&dag.nodes[a].outer, &q) {
                    continue;
                }
            }
            taken += 1;
            if !node.children.iter().any(|&c| inside(&dag.nodes[c].outer, &q)) {
                audit.node_uncovered += 1;
            }
        }
        audit.node_samples += taken;
    }
    audit
}

/// Basic leaves bucketed by the (nearest, second-nearest) segment ids of their centers.
pub fn charge_report(dag: &AvdDag) -> BTreeMap<(usize, usize), usize> {
    let mut out = BTreeMap::new();
    if dag.segments.len() < 2 {
        return out;
    }
    for node in dag.nodes.iter().filter(|n| n.basic) {
        let lfs = lfs_unchecked(&node.center, &dag.segments.segments);
        let key = (lfs.nearest.min(lfs.second), lfs.nearest.max(lfs.second));
        *out.entry(key).or_insert(0) += 1;
    }
    out
}

/// Recomputes every count from the node table and runs the coverage audit.
/// The two build-time counters (`uncovered_boxes`, `forced_final`) are kept.
pub fn compute_stats(dag: &AvdDag, root_samples: usize, node_samples: usize, seed: u64) -> BuildStats {
    let levels = dag
        .nodes
        .iter()
        .map(|n| n.level + n.refine_exponent + 1)
        .max()
        .unwrap_or(0);
    let charges = charge_report(dag);
    let per_pair_charges: BTreeMap<String, usize> =
        charges.iter().map(|(&(a, b), &c)| (format!("{a}-{b}"), c)).collect();
    let audit = audit_coverage(dag, root_samples, node_samples, seed);
    BuildStats {
        levels,
        node_count: dag.nodes.len(),
        basic_leaf_count: dag.nodes.iter().filter(|n| n.basic).count(),
        final_leaf_count: dag.final_leaves().count(),
        fill_count: dag.nodes.iter().filter(|n| n.fill).count(),
        max_out_degree: dag.nodes.iter().map(|n| n.children.len()).max().unwrap_or(0),
        max_pair_charge: charges.values().copied().max().unwrap_or(0),
        per_pair_charges,
        uncovered_sample_rate: audit.rate(),
        audit_samples: audit.root_samples + audit.node_samples,
        uncovered_boxes: dag.stats.uncovered_boxes,
        forced_final: dag.stats.forced_final,
    }
}
