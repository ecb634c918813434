//! Property suites. Each one samples seeded configurations, counts checks and
//! violations, and keeps the largest excess over the stated bound (including
//! excesses that stay inside the tolerance).

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::avd::{self, AvdDag, BuildConfig};
use crate::capsule::{alpha, beta_lfs, bounding_volumes, build_capsule, mc_volume, shrunken_intersection_witness, Capsule};
use crate::ellipsoid::{ellipsoids_disjoint, Ellipsoid};
use crate::error::{Error, Result};
use crate::geometry::{local_feature_size, point_segment, point_segment_dist, SegmentSet};
use crate::linalg::{Mat, Point};
use crate::tensors::{blended_form, cell_form, distance_triple, hessian_line, local_tensor, metric_ball};
use crate::workbench::{brute_force_nn, gen_random};

pub const SUITES: [&str; 14] = [
    "lipschitz",
    "tensor",
    "lemma1",
    "eq8",
    "lemma2",
    "lemma4",
    "cor6",
    "lemma7",
    "lemma8",
    "lemma10",
    "sec5",
    "packing",
    "coverage",
    "correctness",
];

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub seed: u64,
    pub checks: u64,
    pub violations: u64,
    pub max_violation: f64,
    /// Configurations skipped because a hypothesis could not be established.
    pub skipped: u64,
    /// Measured constants (volume ratios, degrees, ...).
    pub measured: BTreeMap<String, f64>,
}

impl SuiteReport {
    fn new(suite: &str, seed: u64) -> Self {
        Self {
            suite: suite.to_string(),
            seed,
            checks: 0,
            violations: 0,
            max_violation: 0.0,
            skipped: 0,
            measured: BTreeMap::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.violations == 0
    }

    /// Records one inequality check; `excess` is how far the bound was exceeded.
    fn check(&mut self, excess: f64, tol: f64) {
        self.checks += 1;
        let e = if excess.is_nan() { f64::INFINITY } else { excess };
        if e > self.max_violation {
            self.max_violation = e;
        }
        if e > tol {
            self.violations += 1;
        }
    }

    fn measure_max(&mut self, key: &str, v: f64) {
        let slot = self.measured.entry(key.to_string()).or_insert(f64::NEG_INFINITY);
        *slot = slot.max(v);
    }
}

/// Sample counts for a suite run.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ValidationOptions {
    /// Configurations (instances, points, or pairs) per suite.
    pub configs: usize,
    /// Samples per configuration.
    pub samples: usize,
    /// Approximation ratio used by the structure suites and `cor6`.
    pub epsilon: f64,
    /// Queries for the `correctness` suite.
    pub queries: usize,
    /// Monte Carlo samples for volume estimates.
    pub volume_samples: u64,
}

impl Default for ValidationOptions {
    fn default() -> Self {
        Self {
            configs: 100,
            samples: 1000,
            epsilon: 0.5,
            queries: 1000,
            volume_samples: 1_000_000,
        }
    }
}

/// Runs a named suite on `set`, or on seeded random instances when `set` is `None`.
pub fn run_validation(suite: &str, set: Option<&SegmentSet>, seed: u64, opts: &ValidationOptions) -> Result<SuiteReport> {
    let mut ctx = Ctx {
        rng: ChaCha8Rng::seed_from_u64(seed),
        fixed: set,
        seed,
        opts: *opts,
    };
    let mut rep = SuiteReport::new(suite, seed);
    match suite {
        "lipschitz" => ctx.lipschitz(&mut rep)?,
        "tensor" => ctx.tensor(&mut rep)?,
        "lemma1" => ctx.lemma1(&mut rep)?,
        "eq8" => ctx.eq8(&mut rep)?,
        "lemma2" => ctx.expansion(&mut rep, false)?,
        "lemma10" => ctx.expansion(&mut rep, true)?,
        "lemma4" => ctx.lemma4(&mut rep)?,
        "cor6" => ctx.cor6(&mut rep)?,
        "lemma7" => ctx.lemma7(&mut rep)?,
        "lemma8" => ctx.lemma8(&mut rep)?,
        "sec5" => ctx.sec5(&mut rep)?,
        "packing" => ctx.packing(&mut rep)?,
        "coverage" => ctx.coverage(&mut rep)?,
        "correctness" => ctx.correctness(&mut rep)?,
        other => {
            return Err(Error::Usage(format!(
                "unknown suite '{other}'; expected one of {}",
                SUITES.join(", ")
            )))
        }
    }
    Ok(rep)
}

struct Ctx<'a> {
    rng: ChaCha8Rng,
    fixed: Option<&'a SegmentSet>,
    seed: u64,
    opts: ValidationOptions,
}

const MAX_REJECTION: usize = 200_000;

impl Ctx<'_> {
    fn instance(&mut self, min_n: usize) -> Result<SegmentSet> {
        if let Some(s) = self.fixed {
            if s.len() < min_n {
                return Err(Error::Usage(format!("suite needs at least {min_n} segments")));
            }
            return Ok(s.clone());
        }
        let n = self.rng.random_range(min_n.max(2)..=6);
        let d = self.rng.random_range(2..=3);
        gen_random(n, d, self.rng.random(), 0.02, None)
    }

    fn structure_instance(&mut self) -> Result<SegmentSet> {
        match self.fixed {
            Some(s) => Ok(s.clone()),
            None => gen_random(10, 2, self.seed, 0.05, None),
        }
    }

    /// Uniform point in the endpoint box grown by half the diameter.
    fn near(&mut self, set: &SegmentSet) -> Point {
        let pts = set.endpoints();
        let d = set.dim;
        let pad = 0.5 * set.diam.max(1e-3);
        let mut x = Point::zeros(d);
        for k in 0..d {
            let lo = pts.iter().map(|p| p[k]).fold(f64::INFINITY, f64::min) - pad;
            let hi = pts.iter().map(|p| p[k]).fold(f64::NEG_INFINITY, f64::max) + pad;
            x[k] = self.rng.random_range(lo..hi);
        }
        x
    }

    fn in_capsule(&mut self, cap: &Capsule, lambda: f64) -> Option<Point> {
        let (lo, hi) = cap.bounding_box(lambda);
        sample_box(&mut self.rng, &lo, &hi, |z| cap.contains(z, lambda))
    }

    fn direction(&mut self, d: usize) -> Point {
        crate::ellipsoid::random_unit(d, &mut self.rng)
    }

    fn lipschitz(&mut self, rep: &mut SuiteReport) -> Result<()> {
        for _ in 0..self.opts.configs {
            let set = self.instance(2)?;
            for s in 0..self.opts.samples {
                let x = self.near(&set);
                // Half of the pairs are local, half are spread over the box.
                let y = if s % 2 == 0 {
                    let dir = self.direction(set.dim);
                    x.offset(&dir, self.rng.random_range(0.0..0.1) * set.diam)
                } else {
                    self.near(&set)
                };
                let fx = local_feature_size(&x, &set)?.value;
                let fy = local_feature_size(&y, &set)?.value;
                rep.check((fx - fy).abs() - x.dist(&y), 1e-9);
            }
        }
        Ok(())
    }

    fn tensor(&mut self, rep: &mut SuiteReport) -> Result<()> {
        let h = 1e-5;
        let per = self.opts.samples.min(100);
        for _ in 0..self.opts.configs {
            let set = self.instance(1)?;
            let d = set.dim;
            for _ in 0..per {
                let x = self.near(&set);
                let s = &set.segments[self.rng.random_range(0..set.len())];
                let p = s.a;
                let fd_point = fd_hessian(&|y: &Point| 0.5 * y.dist_sq(&p), &x, h);
                rep.check(fd_point.max_abs_diff(&Mat::identity(d)), 1e-4);
                if let Some(v) = s.direction() {
                    let line = |y: &Point| distance_triple(y, s).d_line;
                    let fd_line = fd_hessian(&line, &x, h);
                    rep.check(fd_line.max_abs_diff(&hessian_line(&v)?), 1e-4);
                }
                let t = distance_triple(&x, s);
                let ratio = t.d_endpoint.max(t.d_seg) / t.d_endpoint.min(t.d_seg);
                rep.check(1.0 - 1e-12 - ratio, 0.0);
                let lt = local_tensor(&x, s)?;
                let eig = lt.matrix.sym_eigen();
                let mut expected = vec![1.0 / t.d_seg; d];
                expected[0] = 1.0 / t.d_endpoint;
                expected.sort_by(f64::total_cmp);
                let worst = (0..d)
                    .map(|k| (eig.values[k] - expected[k]).abs() / expected[k])
                    .fold(0.0, f64::max);
                rep.check(worst, 1e-9);
                if let Some(v) = s.direction() {
                    if t.d_endpoint > t.d_seg * (1.0 + 1e-6) {
                        let u = eig.vectors.column(0);
                        let cos = u.dot(&v).abs().min(1.0);
                        rep.check(cos.acos(), 1e-6);
                    }
                }
            }
        }
        Ok(())
    }

    fn lemma1(&mut self, rep: &mut SuiteReport) -> Result<()> {
        for _ in 0..self.opts.configs {
            let set = self.instance(1)?;
            let x = self.near(&set);
            let n = set.len() as f64;
            let ball = metric_ball(&x, &set)?;
            for _ in 0..self.opts.samples {
                let b = ball.sample_boundary(&mut self.rng);
                rep.check(cell_form(&x, &set, &b)? - 1.0, 1e-9);
            }
            // Box of the cell: intersection of the per-segment ellipsoid boxes.
            let mut lo = Point::zeros(set.dim);
            let mut hi = Point::zeros(set.dim);
            for k in 0..set.dim {
                lo[k] = f64::NEG_INFINITY;
                hi[k] = f64::INFINITY;
            }
            for s in &set.segments {
                let e = local_tensor(&x, s)?.ellipsoid(&x);
                let w = e.half_widths();
                for k in 0..set.dim {
                    lo[k] = lo[k].max(x[k] - w[k]);
                    hi[k] = hi[k].min(x[k] + w[k]);
                }
            }
            for _ in 0..self.opts.samples {
                let inside = |z: &Point| cell_form(&x, &set, z).map(|f| f <= 1.0).unwrap_or(false);
                match sample_box(&mut self.rng, &lo, &hi, inside) {
                    Some(z) => rep.check((blended_form(&x, &set, &z)? - n) / n, 1e-9),
                    None => rep.skipped += 1,
                }
            }
        }
        Ok(())
    }

    fn eq8(&mut self, rep: &mut SuiteReport) -> Result<()> {
        for _ in 0..self.opts.configs {
            let set = self.instance(1)?;
            let x = self.near(&set);
            let dmin = set
                .segments
                .iter()
                .map(|s| point_segment_dist(&x, s))
                .fold(f64::INFINITY, f64::min);
            let r = self.rng.random_range(0.0..1.0) * dmin;
            let s = set.segments[self.rng.random_range(0..set.len())];
            let single = SegmentSet::new(vec![(s.a, s.b)], false)?;
            let cap = build_capsule(&single, &x, r)?;
            let e = local_tensor(&x, &s)?.ellipsoid(&x);
            for _ in 0..self.opts.samples {
                let b = e.sample_boundary(&mut self.rng);
                rep.check(cap.gauge(&b) - 1.0, 1e-9);
                match self.in_capsule(&cap, 1.0) {
                    Some(z) => rep.check(e.form(&z) / 2.0 - 1.0, 1e-9),
                    None => rep.skipped += 1,
                }
            }
        }
        Ok(())
    }

    /// Expansion-containment with a common radius (`lfs = false`, factor `α`)
    /// or with per-point radii `φ` (`lfs = true`, factor `β`).
    fn expansion(&mut self, rep: &mut SuiteReport, lfs: bool) -> Result<()> {
        let lambda = 0.5;
        let factor = if lfs { beta_lfs(lambda) } else { alpha(lambda) };
        rep.measured.insert("factor".into(), factor);
        let mut certified = 0.0;
        for _ in 0..self.opts.configs {
            let set = self.instance(2)?;
            let x = self.near(&set);
            let phi_x = local_feature_size(&x, &set)?.value;
            let r = if lfs { phi_x } else { phi_x * self.rng.random_range(0.1..2.0) };
            let cx = build_capsule(&set, &x, r)?;
            // Pick y inside a moderate expansion of C(x, r) so many pairs overlap.
            let spread = 1.5 * lambda * self.rng.random_range(0.2..1.5);
            let Some(y) = self.in_capsule(&cx, spread) else {
                rep.skipped += 1;
                continue;
            };
            let ry = if lfs { local_feature_size(&y, &set)?.value } else { r };
            let cy = build_capsule(&set, &y, ry)?;
            if shrunken_intersection_witness(&cx, &cy, lambda).is_none() {
                rep.skipped += 1;
                continue;
            }
            certified += 1.0;
            for _ in 0..self.opts.samples {
                let w = self.direction(set.dim);
                let b = cy.boundary_point(&w, lambda);
                rep.check(cx.gauge(&b) / (factor * lambda) - 1.0, 1e-9);
            }
        }
        rep.measured.insert("certified_pairs".into(), certified);
        Ok(())
    }

    fn lemma4(&mut self, rep: &mut SuiteReport) -> Result<()> {
        for _ in 0..self.opts.configs {
            let set = self.instance(2)?;
            let x = self.near(&set);
            let phi = local_feature_size(&x, &set)?.value;
            let cap = build_capsule(&set, &x, phi)?;
            let lambda = self.rng.random_range(0.05..0.95);
            for _ in 0..self.opts.samples {
                let Some(z) = self.in_capsule(&cap, lambda) else {
                    rep.skipped += 1;
                    continue;
                };
                let ratio = local_feature_size(&z, &set)?.value / phi;
                rep.check((ratio - (1.0 + lambda)).max((1.0 - lambda) - ratio), 1e-9);
            }
        }
        Ok(())
    }

    fn cor6(&mut self, rep: &mut SuiteReport) -> Result<()> {
        let eps = self.opts.epsilon.min(1.0);
        for _ in 0..self.opts.configs {
            let set = self.instance(2)?;
            let x = self.near(&set);
            let lfs = local_feature_size(&x, &set)?;
            let cap = build_capsule(&set, &x, lfs.value)?;
            let sx = &set.segments[lfs.nearest];
            for _ in 0..self.opts.samples {
                let Some(z) = self.in_capsule(&cap, eps / 3.0) else {
                    rep.skipped += 1;
                    continue;
                };
                let best = brute_force_nn(&set, &z).1;
                rep.check(point_segment_dist(&z, sx) - (1.0 + eps) * best, 1e-9);
            }
        }
        Ok(())
    }

    fn lemma7(&mut self, rep: &mut SuiteReport) -> Result<()> {
        for _ in 0..self.opts.configs {
            let set = self.instance(1)?;
            let x = self.near(&set);
            let r = self.rng.random_range(0.0..0.5) * set.diam;
            let gamma = self.rng.random_range(1.0..4.0);
            let lambda = self.rng.random_range(0.05..1.0);
            let base = build_capsule(&set, &x, r)?;
            let grown = build_capsule(&set, &x, gamma * r)?;
            let shrunk = build_capsule(&set, &x, lambda * r)?;
            for _ in 0..self.opts.samples {
                if let Some(z) = self.in_capsule(&grown, 1.0) {
                    let back = x + (z - x) * (1.0 / gamma);
                    rep.check(base.gauge(&back) - 1.0, 1e-12);
                } else {
                    rep.skipped += 1;
                }
                if let Some(z) = self.in_capsule(&base, lambda) {
                    rep.check(shrunk.gauge(&z) - 1.0, 1e-12);
                } else {
                    rep.skipped += 1;
                }
            }
        }
        Ok(())
    }

    fn lemma8(&mut self, rep: &mut SuiteReport) -> Result<()> {
        // (i): pointwise scaling identity, compared through the gauge.
        for _ in 0..self.opts.configs {
            let set = self.instance(1)?;
            let x = self.near(&set);
            let r = self.rng.random_range(0.0..0.5) * set.diam;
            let cap = build_capsule(&set, &x, r)?;
            let lambda = self.rng.random_range(0.05..2.0);
            let (lo, hi) = cap.bounding_box(1.2 * lambda);
            for _ in 0..self.opts.samples {
                let mut z = Point::zeros(set.dim);
                for k in 0..set.dim {
                    z[k] = self.rng.random_range(lo[k]..hi[k]);
                }
                let back = x + (z - x) * (1.0 / lambda);
                let direct = cap.gauge(&z) / lambda;
                let mapped = cap.gauge(&back);
                let rel = (direct - mapped).abs() / mapped.max(1e-300);
                let same = cap.contains(&z, lambda) == cap.contains(&back, 1.0);
                // Membership may only disagree when the point is on the boundary.
                let excess = if same || (mapped - 1.0).abs() < 1e-12 { rel } else { f64::INFINITY };
                rep.check(excess, 1e-12);
            }
        }
        // (ii): vol C(x, βr) <= β^d vol C(x, r), and vol C^λ = λ^d vol C.
        let vconfigs = (self.opts.configs / 10).max(1);
        for c in 0..vconfigs {
            let set = self.instance(1)?;
            let x = self.near(&set);
            let r = self.rng.random_range(0.05..0.5) * set.diam;
            let beta = self.rng.random_range(1.0..3.0);
            let d = set.dim as i32;
            let small = build_capsule(&set, &x, r)?;
            let big = build_capsule(&set, &x, beta * r)?;
            let seed = self.seed ^ (c as u64) << 20;
            let vs = cap_volume(&small, 1.0, self.opts.volume_samples, seed);
            let vb = cap_volume(&big, 1.0, self.opts.volume_samples, seed + 1);
            let bound = beta.powi(d) * vs.volume;
            let sigma = (beta.powi(d) * vs.std_error).hypot(vb.std_error);
            rep.check((vb.volume - bound) / sigma.max(1e-300) - 3.0, 0.0);
            rep.measure_max("growth_ratio_over_beta_d", vb.volume / bound);
            let vh = cap_volume(&small, 0.5, self.opts.volume_samples, seed + 2);
            let expect = 0.5f64.powi(d) * vs.volume;
            let sigma = (0.5f64.powi(d) * vs.std_error).hypot(vh.std_error);
            rep.check((vh.volume - expect).abs() / sigma.max(1e-300) - 3.0, 0.0);
        }
        Ok(())
    }

    fn sec5(&mut self, rep: &mut SuiteReport) -> Result<()> {
        let mut cases = 0.0;
        for c in 0..self.opts.configs {
            let set = self.instance(2)?;
            let x = self.near(&set);
            let lfs = local_feature_size(&x, &set)?;
            if !point_segment(&x, &set.segments[lfs.nearest]).interior {
                rep.skipped += 1;
                continue;
            }
            let r = lfs.value;
            let bv = bounding_volumes(&set, &x, r)?;
            let cap = build_capsule(&set, &x, r)?;
            cases += 1.0;
            let d = set.dim as f64;
            let ratio = bv.volume_ratio();
            rep.measure_max("max_exact_ratio", ratio);
            rep.check(ratio - 2.0 * (d + 1.0), 1e-9);
            let (olo, ohi) = bv.bounding_box();
            for _ in 0..self.opts.samples {
                if let Some(z) = sample_box(&mut self.rng, &olo, &ohi, |z| bv.in_inner(z)) {
                    rep.check(cap.gauge(&z) - 1.0, 1e-9);
                } else {
                    rep.skipped += 1;
                }
                if let Some(z) = self.in_capsule(&cap, 1.0) {
                    rep.check(if bv.in_outer(&z) { 0.0 } else { 1.0 }, 0.0);
                } else {
                    rep.skipped += 1;
                }
            }
            // Monte Carlo: vol(V+)/vol(C) <= 2(d+1) within three standard errors.
            if c < 10 {
                let est = cap_volume(&cap, 1.0, self.opts.volume_samples / 10, self.seed ^ (c as u64) << 24);
                let mc_ratio = bv.outer_volume() / est.volume;
                let rel = est.std_error / est.volume;
                rep.measure_max("max_mc_ratio", mc_ratio);
                rep.check(mc_ratio - 2.0 * (d + 1.0) * (1.0 + 3.0 * rel), 0.0);
            }
        }
        rep.measured.insert("cylinder_cases".into(), cases);
        Ok(())
    }

    fn build(&mut self, set: &SegmentSet) -> Result<AvdDag> {
        let cfg = BuildConfig {
            root_samples: 0,
            node_samples: 0,
            ..BuildConfig::with_seed(self.seed)
        };
        avd::build(set, self.opts.epsilon, &cfg)
    }

    fn packing(&mut self, rep: &mut SuiteReport) -> Result<()> {
        let set = self.structure_instance()?;
        let dag = self.build(&set)?;
        let d = set.dim as i32;
        let c = dag.consts;
        // Refinement tiers are packed per basic leaf.
        let mut tiers: BTreeMap<(usize, usize, Option<usize>), Vec<usize>> = BTreeMap::new();
        for n in &dag.nodes {
            tiers.entry((n.level, n.refine_exponent, n.anchor)).or_default().push(n.id);
        }
        let mut max_count: f64 = 0.0;
        for (&(level, exp, _), ids) in &tiers {
            let packed: Vec<usize> = ids.iter().copied().filter(|&i| !dag.nodes[i].fill).collect();
            if packed.len() <= 10_000 {
                for (a, &i) in packed.iter().enumerate() {
                    for &j in &packed[a + 1..] {
                        let (ei, ej) = (&dag.nodes[i].inner, &dag.nodes[j].inner);
                        let gap = ei.center.dist(&ej.center) - ei.max_semi_axis() - ej.max_semi_axis();
                        let disjoint = gap > 0.0 || ellipsoids_disjoint(ei, ej);
                        rep.check(if disjoint { 0.0 } else { 1.0 }, 0.0);
                    }
                }
            }
            // Packing bound around a few probe centers per tier.
            let mu = c.lambda_prime / 2f64.powi(exp as i32);
            let r = dag.domain.radius / 2f64.powi(level as i32);
            for &probe in ids.iter().step_by((ids.len() / 5).max(1)) {
                for beta in [1.0, 2.0, 4.0] {
                    let x = dag.nodes[probe].center;
                    let cap = build_capsule(&set, &x, beta * r)?;
                    let radius = mu * cap.bounding_radius();
                    let count = ids
                        .iter()
                        .filter(|&&i| dag.nodes[i].outer.closest_point(&x).0 <= radius)
                        .count() as f64;
                    let bound = (c.lambda_prime * c.alpha * beta / c.lambda_double_prime).powi(d) * 4f64.powi(d);
                    max_count = max_count.max(count / beta.powi(d));
                    rep.check(count - bound, 0.0);
                }
            }
        }
        rep.measured.insert("max_count_over_beta_d".into(), max_count);
        rep.measured.insert("nodes".into(), dag.nodes.len() as f64);
        rep.measured.insert("fill_nodes".into(), dag.stats.fill_count as f64);
        Ok(())
    }

    fn coverage(&mut self, rep: &mut SuiteReport) -> Result<()> {
        let set = self.structure_instance()?;
        let dag = self.build(&set)?;
        let audit = avd::audit_coverage(&dag, 100 * self.opts.samples, self.opts.samples, self.seed);
        for _ in 0..audit.root_uncovered + audit.node_uncovered {
            rep.check(1.0, 0.0);
        }
        let ok = (audit.root_samples + audit.node_samples) - (audit.root_uncovered + audit.node_uncovered);
        for _ in 0..ok {
            rep.check(0.0, 0.0);
        }
        rep.measured.insert("uncovered_rate".into(), audit.rate());
        rep.measured.insert("uncovered_boxes".into(), dag.stats.uncovered_boxes as f64);
        Ok(())
    }

    fn correctness(&mut self, rep: &mut SuiteReport) -> Result<()> {
        let set = self.structure_instance()?;
        let dag = self.build(&set)?;
        let eps = self.opts.epsilon;
        let ball = Ellipsoid::ball(dag.domain.center, dag.domain.radius);
        let mut fallbacks = 0.0;
        for _ in 0..self.opts.queries {
            let q = ball.sample_interior(&mut self.rng);
            let got = dag.query(&q);
            let best = brute_force_nn(&set, &q).1;
            if got.fallback {
                fallbacks += 1.0;
            }
            rep.check(got.distance - (1.0 + eps) * best, 1e-9);
        }
        rep.measured.insert("fallbacks".into(), fallbacks);
        Ok(())
    }
}

fn sample_box(rng: &mut ChaCha8Rng, lo: &Point, hi: &Point, inside: impl Fn(&Point) -> bool) -> Option<Point> {
    let d = lo.dim();
    let mut z = *lo;
    for _ in 0..MAX_REJECTION {
        for k in 0..d {
            z[k] = if hi[k] > lo[k] { rng.random_range(lo[k]..hi[k]) } else { lo[k] };
        }
        if inside(&z) {
            return Some(z);
        }
    }
    None
}

fn cap_volume(cap: &Capsule, lambda: f64, samples: u64, seed: u64) -> crate::capsule::VolumeEstimate {
    let (lo, hi) = cap.bounding_box(lambda);
    mc_volume(|z| cap.contains(z, lambda), &lo, &hi, samples, seed)
}

/// Central finite-difference Hessian.
fn fd_hessian(f: &dyn Fn(&Point) -> f64, x: &Point, h: f64) -> Mat {
    let d = x.dim();
    let mut m = Mat::zeros(d);
    for i in 0..d {
        for j in 0..d {
            let at = |si: f64, sj: f64| {
                let mut y = *x;
                y[i] += si * h;
                y[j] += sj * h;
                f(&y)
            };
            let v = (at(1.0, 1.0) - at(1.0, -1.0) - at(-1.0, 1.0) + at(-1.0, -1.0)) / (4.0 * h * h);
            m[(i, j)] = v;
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> ValidationOptions {
        ValidationOptions {
            configs: 8,
            samples: 60,
            epsilon: 0.5,
            queries: 200,
            volume_samples: 20_000,
        }
    }

    #[test]
    fn every_suite_passes_on_random_configs() {
        for s in SUITES {
            let r = run_validation(s, None, 11, &small()).unwrap();
            assert!(r.passed(), "{s}: {r:?}");
            assert!(r.checks > 0, "{s} ran no checks");
        }
    }

    #[test]
    fn lemma8_on_two_parallel() {
        let set = SegmentSet::new(
            vec![
                (Point::new(&[0.0, 0.0]), Point::new(&[10.0, 0.0])),
                (Point::new(&[0.0, 2.0]), Point::new(&[10.0, 2.0])),
            ],
            false,
        )
        .unwrap();
        let r = run_validation("lemma8", Some(&set), 3, &small()).unwrap();
        assert!(r.passed());
        assert!(r.max_violation <= 1e-12, "{}", r.max_violation);
    }

    #[test]
    fn unknown_suite() {
        assert!(matches!(
            run_validation("unknown", None, 0, &small()),
            Err(Error::Usage(_))
        ));
    }
}
