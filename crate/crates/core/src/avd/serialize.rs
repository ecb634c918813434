//! Structure file: a JSON object with `header`, `config`, `domain`, `segments`,
//! `roots`, `stats` and `nodes`. Floats use shortest round-trip decimals.

use serde::{Deserialize, Serialize};

use super::{AvdDag, AvdNode, BuildConfig, BuildStats};
use crate::capsule::ScaleConstants;
use crate::error::{Error, Result};
use crate::geometry::{DomainBall, InstanceFile};

pub const STRUCTURE_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct Header {
    version: u32,
    dim: usize,
    epsilon: f64,
    lambda_prime: f64,
    lambda_double_prime: f64,
    seed: u64,
}

#[derive(Serialize)]
struct FileOut<'a> {
    header: Header,
    config: &'a BuildConfig,
    domain: &'a DomainBall,
    segments: InstanceFile,
    roots: &'a [usize],
    stats: &'a BuildStats,
    nodes: &'a [AvdNode],
}

pub fn serialize(dag: &AvdDag) -> String {
    let file = FileOut {
        header: Header {
            version: STRUCTURE_VERSION,
            dim: dag.dim(),
            epsilon: dag.epsilon,
            lambda_prime: dag.consts.lambda_prime,
            lambda_double_prime: dag.consts.lambda_double_prime,
            seed: dag.config.seed,
        },
        config: &dag.config,
        domain: &dag.domain,
        segments: InstanceFile::from_set(&dag.segments),
        roots: &dag.roots,
        stats: &dag.stats,
        nodes: &dag.nodes,
    };
    serde_json::to_string(&file).expect("structure serializes")
}

#[derive(Deserialize)]
struct FileIn {
    header: Header,
    config: BuildConfig,
    domain: DomainBall,
    segments: InstanceFile,
    roots: Vec<usize>,
    stats: BuildStats,
    nodes: Vec<AvdNode>,
}

pub fn deserialize(text: &str) -> Result<AvdDag> {
    // Read the header first so a version mismatch is reported as such.
    #[derive(Deserialize)]
    struct HeaderOnly {
        header: Header,
    }
    let probe: HeaderOnly = serde_json::from_str(text).map_err(|e| Error::parse("structure", e))?;
    if probe.header.version != STRUCTURE_VERSION {
        return Err(Error::parse(
            "header",
            format!("unsupported version {}", probe.header.version),
        ));
    }
    let file: FileIn = serde_json::from_str(text).map_err(|e| Error::parse("structure", e))?;
    let FileIn {
        header,
        config,
        domain,
        segments,
        roots,
        stats,
        nodes,
    } = file;
    let segments = segments.into_set()?;
    if segments.dim != header.dim {
        return Err(Error::parse("segments", "dimension differs from header"));
    }
    for (i, node) in nodes.iter().enumerate() {
        if node.id != i {
            return Err(Error::parse(format!("node {i}"), format!("id field is {}", node.id)));
        }
        if node.center.dim() != header.dim {
            return Err(Error::parse(format!("node {i}"), "center dimension differs from header"));
        }
    }
    let count = nodes.len();
    for node in &nodes {
        if let Some(&c) = node.children.iter().find(|&&c| c >= count) {
            return Err(Error::parse(format!("node {}", node.id), format!("child {c} out of range")));
        }
        if let Some(a) = node.anchor.filter(|&a| a >= count) {
            return Err(Error::parse(format!("node {}", node.id), format!("anchor {a} out of range")));
        }
        if let Some(r) = node.representative {
            if r >= segments.len() {
                return Err(Error::parse(format!("node {}", node.id), format!("representative {r} out of range")));
            }
        }
    }
    if let Some(&r) = roots.iter().find(|&&r| r >= count) {
        return Err(Error::parse("roots", format!("root {r} out of range")));
    }
    Ok(AvdDag {
        epsilon: header.epsilon,
        consts: ScaleConstants::new(header.dim, header.lambda_prime),
        config,
        domain,
        segments,
        nodes,
        roots,
        stats,
    })
}
