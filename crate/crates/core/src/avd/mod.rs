//! Leveled DAG of capsule ellipsoids answering ε-approximate nearest-segment queries.
//!
//! Level `i` uses distance parameter `r_i = r⁺/2^i`. A node whose scale has
//! fallen below the local feature size of its center becomes a basic leaf and is
//! refined by ellipsoids shrunk by `1/2^j` until a final-leaf certificate holds.

mod build;
mod query;
mod serialize;
mod stats;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::capsule::ScaleConstants;
use crate::ellipsoid::Ellipsoid;
use crate::geometry::{DomainBall, SegmentSet};
use crate::linalg::Point;

pub use build::{build, final_certificate, CertificateCheck};
pub use serialize::{deserialize, serialize, STRUCTURE_VERSION};
pub use stats::{audit_coverage, charge_report, compute_stats, CoverageAudit};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeKind {
    Internal,
    BasicLeaf,
    FinalLeaf,
}

/// How final leaves are decided.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum LeafRule {
    /// A node is final once either the scale certificate or the geometric
    /// distance certificate proves its representative is an ε-ANN everywhere
    /// inside its outer ellipsoid.
    #[default]
    Certified,
    /// Basic leaves are refined until `1/2^j <= ε(1-λ')/(3λ')`, nothing else.
    Scale,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AvdNode {
    pub id: usize,
    pub center: Point,
    pub level: usize,
    pub refine_exponent: usize,
    pub distance_param: f64,
    pub outer: Ellipsoid,
    pub inner: Ellipsoid,
    pub kind: NodeKind,
    pub children: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub representative: Option<usize>,
    /// Reached `r_i <= φ(center)` on a main level (charged in the storage count).
    #[serde(default)]
    pub basic: bool,
    /// Added by the coverage pass; its inner ellipsoid may overlap others.
    #[serde(default)]
    pub fill: bool,
    /// Basic leaf whose outer ellipsoid this refinement node helps cover.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub anchor: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BuildConfig {
    pub lambda_prime: f64,
    pub seed: u64,
    pub leaf_rule: LeafRule,
    /// Candidate lattice spacing as a fraction of `2/√d` in the child unit frame.
    pub lattice_spacing: f64,
    /// Monte Carlo samples of `B⁺` checked against the roots after building.
    pub root_samples: usize,
    /// Monte Carlo samples per internal node checked against its children.
    pub node_samples: usize,
}

impl Default for BuildConfig {
    fn default() -> Self {
        Self {
            lambda_prime: 0.5,
            seed: 0,
            leaf_rule: LeafRule::Certified,
            lattice_spacing: 0.95,
            root_samples: 100_000,
            node_samples: 1_000,
        }
    }
}

impl BuildConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BuildStats {
    pub levels: usize,
    pub node_count: usize,
    pub basic_leaf_count: usize,
    pub final_leaf_count: usize,
    pub fill_count: usize,
    pub max_out_degree: usize,
    /// Basic leaves bucketed by the (nearest, second-nearest) segment ids of their centers.
    pub per_pair_charges: BTreeMap<String, usize>,
    pub max_pair_charge: usize,
    pub uncovered_sample_rate: f64,
    pub audit_samples: usize,
    /// Boxes the certified coverage pass gave up on (expected 0).
    pub uncovered_boxes: usize,
    /// Nodes forced final by the depth safety cap (expected 0).
    pub forced_final: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QueryResult {
    pub segment: usize,
    pub distance: f64,
    pub path_length: usize,
    pub fallback: bool,
}

#[derive(Clone, Debug)]
pub struct AvdDag {
    pub epsilon: f64,
    pub consts: ScaleConstants,
    pub config: BuildConfig,
    pub domain: DomainBall,
    pub segments: SegmentSet,
    pub nodes: Vec<AvdNode>,
    pub roots: Vec<usize>,
    pub stats: BuildStats,
}

impl AvdDag {
    pub fn dim(&self) -> usize {
        self.segments.dim
    }

    /// Nodes at a given `(level, refine_exponent)` tier.
    pub fn tier(&self, level: usize, exponent: usize) -> impl Iterator<Item = &AvdNode> {
        self.nodes
            .iter()
            .filter(move |n| n.level == level && n.refine_exponent == exponent)
    }

    pub fn final_leaves(&self) -> impl Iterator<Item = &AvdNode> {
        self.nodes.iter().filter(|n| n.kind == NodeKind::FinalLeaf)
    }
}
