use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustc_hash::FxHashMap;
use serde::Serialize;

use super::stats::compute_stats;
use super::{AvdDag, AvdNode, BuildConfig, BuildStats, LeafRule, NodeKind};
use crate::capsule::{capsule_unchecked, ScaleConstants};
use crate::ellipsoid::{ellipsoids_disjoint, inscribed_ellipsoid, Ellipsoid};
use crate::error::{Error, Result};
use crate::geometry::{domain_ball, lfs_unchecked, point_segment, point_segment_dist, DomainBall, Foot, Segment, SegmentSet};
use crate::linalg::{Mat, Point, MAX_DIM};

/// Covered boxes must sit this far inside a child.
const COVER_FORM: f64 = 1.0 - 1e-9;
/// Hard cap on boxes examined while certifying one parent.
const MAX_BOXES_PER_PARENT: usize = 400_000;
const MAX_REFINE: usize = 48;
/// Upper bound on seeded lattice points per parent.
const LATTICE_CAP: f64 = 20_000.0;

pub fn build(set: &SegmentSet, eps: f64, cfg: &BuildConfig) -> Result<AvdDag> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::Usage(format!("epsilon must be positive, got {eps}")));
    }
    if !(cfg.lambda_prime > 0.0 && cfg.lambda_prime < 1.0) {
        return Err(Error::Usage("lambda_prime must lie in (0, 1)".into()));
    }
    if !(cfg.lattice_spacing > 0.0 && cfg.lattice_spacing <= 1.0) {
        return Err(Error::Usage("lattice spacing must lie in (0, 1]".into()));
    }
    let domain = domain_ball(set, eps)?;
    let consts = ScaleConstants::new(set.dim, cfg.lambda_prime);
    let mut b = Builder {
        set,
        domain,
        consts,
        eps,
        cfg: *cfg,
        nodes: Vec::new(),
        forced: 0,
        uncovered_boxes: 0,
        max_level: 0,
        anchor: None,
    };
    let roots = if set.len() == 1 {
        b.single_segment()
    } else {
        b.run()
    };
    let mut dag = AvdDag {
        epsilon: eps,
        consts,
        config: *cfg,
        domain,
        segments: set.clone(),
        nodes: b.nodes,
        roots,
        stats: BuildStats {
            levels: 0,
            node_count: 0,
            basic_leaf_count: 0,
            final_leaf_count: 0,
            fill_count: 0,
            max_out_degree: 0,
            per_pair_charges: Default::default(),
            max_pair_charge: 0,
            uncovered_sample_rate: 0.0,
            audit_samples: 0,
            uncovered_boxes: b.uncovered_boxes,
            forced_final: b.forced,
        },
    };
    dag.stats = compute_stats(&dag, cfg.root_samples, cfg.node_samples, cfg.seed);
    Ok(dag)
}

#[derive(Clone, Copy, Debug)]
struct Tier {
    level: usize,
    exponent: usize,
    r: f64,
    /// Scale of the outer ellipsoids relative to the unit inscribed ellipsoid.
    mu: f64,
}

struct Builder<'a> {
    set: &'a SegmentSet,
    domain: DomainBall,
    consts: ScaleConstants,
    eps: f64,
    cfg: BuildConfig,
    nodes: Vec<AvdNode>,
    forced: usize,
    uncovered_boxes: usize,
    max_level: usize,
    /// Basic leaf being refined, if any.
    anchor: Option<usize>,
}

/// Uniform hash grid over node bounding boxes for one tier.
struct Grid {
    cell: f64,
    dim: usize,
    map: FxHashMap<[i64; MAX_DIM], Vec<usize>>,
    big: Vec<usize>,
    all: Vec<usize>,
    /// Per-node visit marks used to deduplicate box queries.
    stamp: FxHashMap<usize, u32>,
    epoch: u32,
    /// Largest semi-axis among inserted ellipsoids.
    max_axis: f64,
}

const MAX_CELLS_PER_NODE: i64 = 512;

impl Grid {
    fn new(cell: f64, dim: usize) -> Self {
        Self {
            cell,
            dim,
            map: FxHashMap::default(),
            big: Vec::new(),
            all: Vec::new(),
            stamp: FxHashMap::default(),
            epoch: 0,
            max_axis: 0.0,
        }
    }

    fn key(&self, p: &Point) -> [i64; MAX_DIM] {
        let mut k = [0i64; MAX_DIM];
        for i in 0..self.dim {
            k[i] = (p[i] / self.cell).floor() as i64;
        }
        k
    }

    fn cell_range(&self, lo: &Point, hi: &Point) -> ([i64; MAX_DIM], [i64; MAX_DIM], i64) {
        let a = self.key(lo);
        let b = self.key(hi);
        let mut count: i64 = 1;
        for i in 0..self.dim {
            count = count.saturating_mul(b[i] - a[i] + 1);
        }
        (a, b, count)
    }

    fn for_cells(dim: usize, a: &[i64; MAX_DIM], b: &[i64; MAX_DIM], mut f: impl FnMut(&[i64; MAX_DIM])) {
        let mut k = *a;
        loop {
            f(&k);
            let mut i = 0;
            loop {
                if i == dim {
                    return;
                }
                if k[i] < b[i] {
                    k[i] += 1;
                    break;
                }
                k[i] = a[i];
                i += 1;
            }
        }
    }

    fn insert(&mut self, id: usize, e: &Ellipsoid) {
        let (lo, hi) = bbox(e);
        let (lo, hi) = (&lo, &hi);
        self.max_axis = self.max_axis.max(e.max_semi_axis());
        self.all.push(id);
        let (a, b, count) = self.cell_range(lo, hi);
        if count > MAX_CELLS_PER_NODE {
            self.big.push(id);
            return;
        }
        let map = &mut self.map;
        Self::for_cells(self.dim, &a, &b, |k| map.entry(*k).or_default().push(id));
    }

    fn at_point(&self, p: &Point, out: &mut Vec<usize>) {
        out.clear();
        if let Some(v) = self.map.get(&self.key(p)) {
            out.extend_from_slice(v);
        }
        out.extend_from_slice(&self.big);
    }

    /// Every node whose bounding box may meet `[lo, hi]`, without duplicates.
    fn in_box(&mut self, lo: &Point, hi: &Point, out: &mut Vec<usize>) {
        out.clear();
        let (a, b, count) = self.cell_range(lo, hi);
        if count > 4 * MAX_CELLS_PER_NODE {
            out.extend_from_slice(&self.all);
            return;
        }
        if count == 1 {
            if let Some(v) = self.map.get(&a) {
                out.extend_from_slice(v);
            }
            out.extend_from_slice(&self.big);
            return;
        }
        self.epoch = self.epoch.wrapping_add(1);
        let epoch = self.epoch;
        let (map, stamp) = (&self.map, &mut self.stamp);
        Self::for_cells(self.dim, &a, &b, |k| {
            if let Some(v) = map.get(k) {
                for &id in v {
                    let s = stamp.entry(id).or_insert(epoch.wrapping_sub(1));
                    if *s != epoch {
                        *s = epoch;
                        out.push(id);
                    }
                }
            }
        });
        out.extend_from_slice(&self.big);
    }
}

fn bbox(e: &Ellipsoid) -> (Point, Point) {
    let h = e.half_widths();
    (e.center - h, e.center + h)
}

/// Parent region whose `B⁺` part must be covered by the next tier.
struct Parent {
    node: Option<usize>,
    region: Ellipsoid,
}

impl<'a> Builder<'a> {
    fn single_segment(&mut self) -> Vec<usize> {
        let outer = Ellipsoid::ball(self.domain.center, self.domain.radius);
        let inner = outer.scaled(self.consts.lambda_double_prime / self.consts.lambda_prime);
        self.nodes.push(AvdNode {
            id: 0,
            center: self.domain.center,
            level: 0,
            refine_exponent: 0,
            distance_param: self.domain.radius,
            outer,
            inner,
            kind: NodeKind::FinalLeaf,
            children: Vec::new(),
            representative: Some(0),
            basic: false,
            fill: false,
            anchor: None,
        });
        vec![0]
    }

    fn tier(&self, level: usize, exponent: usize) -> Tier {
        Tier {
            level,
            exponent,
            r: self.domain.radius / 2f64.powi(level as i32),
            mu: self.consts.lambda_prime / 2f64.powi(exponent as i32),
        }
    }

    fn run(&mut self) -> Vec<usize> {
        let min_gap = self.set.min_gap.unwrap_or(self.set.diam);
        // φ >= δ/2 everywhere, so main levels stop by log2(4 r⁺/δ); keep a margin.
        self.max_level = ((4.0 * self.domain.radius / min_gap).log2().ceil() as usize) + 4;
        let domain_region = Ellipsoid::ball(self.domain.center, self.domain.radius);
        let roots = self.process_tier(
            &[Parent {
                node: None,
                region: domain_region,
            }],
            self.tier(0, 0),
        );
        let mut current = roots.clone();
        let mut level = 0;
        while !current.is_empty() {
            let basic: Vec<usize> = current
                .iter()
                .copied()
                .filter(|&id| self.nodes[id].kind == NodeKind::BasicLeaf)
                .collect();
            self.refine(&basic, level);
            let internal: Vec<usize> = current
                .iter()
                .copied()
                .filter(|&id| self.nodes[id].kind == NodeKind::Internal)
                .collect();
            if internal.is_empty() {
                break;
            }
            level += 1;
            let parents = self.parents_of(&internal);
            current = self.process_tier(&parents, self.tier(level, 0));
        }
        roots
    }

    fn parents_of(&self, ids: &[usize]) -> Vec<Parent> {
        ids.iter()
            .map(|&id| Parent {
                node: Some(id),
                region: self.nodes[id].outer,
            })
            .collect()
    }

    /// Refinement below the basic leaves of one level. Tier `j` covers every
    /// basic leaf where it meets an internal node of tier `j - 1`; centers stay
    /// inside basic leaves, so `φ` stays comparable to `r_i` along the chain.
    fn refine(&mut self, basics: &[usize], level: usize) {
        let mut prev = basics.to_vec();
        let mut j = 1;
        let mut scratch = Vec::new();
        while !prev.is_empty() {
            let tier = self.tier(level, j);
            let prev_tier = self.tier(level, j - 1);
            let mut mask = Grid::new(2.0 * prev_tier.mu * prev_tier.r, self.set.dim);
            for &p in &prev {
                mask.insert(p, &self.nodes[p].outer);
            }
            let mut grid = Grid::new(2.0 * tier.mu * tier.r, self.set.dim);
            let mut ids = Vec::new();
            for &b in basics {
                let region = self.nodes[b].outer;
                if self.mask_state(&mut mask, &region.center, region.max_semi_axis(), &mut scratch).is_none() {
                    continue;
                }
                self.anchor = Some(b);
                let mut rng = ChaCha8Rng::seed_from_u64(
                    self.cfg.seed
                        ^ (b as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
                        ^ (j as u64).wrapping_mul(0xC2B2_AE3D_27D4_EB4F),
                );
                self.seed_lattice(&region, tier, &mut rng, &mut grid, &mut ids, Some(&mut mask));
                self.cover(&region, tier, &mut grid, &mut ids, Some(&mut mask));
            }
            self.anchor = None;
            for &p in &prev {
                let outer = self.nodes[p].outer;
                let (lo, hi) = bbox(&outer);
                grid.in_box(&lo, &hi, &mut scratch);
                let mut children: Vec<usize> = scratch
                    .iter()
                    .copied()
                    .filter(|&c| !ellipsoids_disjoint(&outer, &self.nodes[c].outer))
                    .collect();
                children.sort_unstable();
                self.nodes[p].children = children;
            }
            prev = ids
                .into_iter()
                .filter(|&id| self.nodes[id].kind == NodeKind::Internal)
                .collect();
            j += 1;
        }
    }

    /// Relation of the ball `(x, radius)` to the outer ellipsoids in `mask`:
    /// `None` if it certainly misses all of them, `Some(true)` if one contains it.
    fn mask_state(&self, mask: &mut Grid, x: &Point, radius: f64, scratch: &mut Vec<usize>) -> Option<bool> {
        let d = self.set.dim;
        let r = Point::new(&vec![radius; d]);
        mask.in_box(&(*x - r), &(*x + r), scratch);
        let mut meets = false;
        for &id in scratch.iter() {
            let e = &self.nodes[id].outer;
            let t = e.to_unit(x).norm();
            let s = radius / e.min_semi_axis();
            if t + s <= 1.0 {
                return Some(true);
            }
            meets |= t <= 1.0 + s;
        }
        meets.then_some(false)
    }

    /// Unit inscribed ellipsoid of the tier capsule at `y`.
    fn unit_at(&self, y: &Point, tier: Tier) -> Ellipsoid {
        let cap = capsule_unchecked(self.set, y, tier.r);
        inscribed_ellipsoid(&cap, 1.0)
    }

    fn process_tier(&mut self, parents: &[Parent], tier: Tier) -> Vec<usize> {
        let mut grid = Grid::new(2.0 * tier.mu * tier.r, self.set.dim);
        let mut ids = Vec::new();
        for (pi, parent) in parents.iter().enumerate() {
            let mut rng = ChaCha8Rng::seed_from_u64(
                self.cfg.seed
                    ^ (tier.level as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
                    ^ (tier.exponent as u64).wrapping_mul(0xC2B2_AE3D_27D4_EB4F)
                    ^ (pi as u64).wrapping_mul(0x1656_67B1_9E37_79F9),
            );
            self.seed_lattice(&parent.region, tier, &mut rng, &mut grid, &mut ids, None);
            self.cover(&parent.region, tier, &mut grid, &mut ids, None);
        }
        let mut scratch = Vec::new();
        for parent in parents {
            let Some(pid) = parent.node else { continue };
            let (lo, hi) = bbox(&parent.region);
            grid.in_box(&lo, &hi, &mut scratch);
            let mut children: Vec<usize> = scratch
                .iter()
                .copied()
                .filter(|&c| !ellipsoids_disjoint(&parent.region, &self.nodes[c].outer))
                .collect();
            children.sort_unstable();
            self.nodes[pid].children = children;
        }
        ids
    }

    /// Offers the points of a cubic lattice to `try_candidate`. The lattice
    /// lives in the unit frame of the child ellipsoid centered at the parent's
    /// center, where a unit ball covers a cube of side `2/√d`; it is shifted by
    /// a seeded offset and clipped to the parent, `B⁺` and the optional mask.
    fn seed_lattice(
        &mut self,
        region: &Ellipsoid,
        tier: Tier,
        rng: &mut ChaCha8Rng,
        grid: &mut Grid,
        ids: &mut Vec<usize>,
        mut mask: Option<&mut Grid>,
    ) {
        let d = self.set.dim;
        let y0 = region.center;
        let child = self.unit_at(&y0, tier).scaled(tier.mu);
        let lc = child.factor();
        let m = region.shape.congruence(&lc);
        let Some(minv) = m.spd_inverse() else { return };
        let mut step = self.cfg.lattice_spacing * 2.0 / (d as f64).sqrt();
        let mut reach = [0.0f64; MAX_DIM];
        for k in 0..d {
            reach[k] = minv[(k, k)].max(0.0).sqrt();
        }
        // Keep the lattice bounded; the cover pass fills whatever is left.
        loop {
            let count: f64 = (0..d).map(|k| 2.0 * (reach[k] / step).floor() + 1.0).product();
            if count <= LATTICE_CAP {
                break;
            }
            step *= 1.25;
        }
        let mut offset = [0.0f64; MAX_DIM];
        for o in offset.iter_mut().take(d) {
            *o = rng.random_range(-0.5..0.5);
        }
        let mut lo = [0i64; MAX_DIM];
        let mut hi = [0i64; MAX_DIM];
        for k in 0..d {
            let n = (reach[k] / step).floor() as i64;
            lo[k] = -n;
            hi[k] = n;
        }
        let reach_c = child.max_semi_axis();
        let mut scratch = Vec::new();
        let mut k = lo;
        loop {
            let mut u = Point::zeros(d);
            for i in 0..d {
                u[i] = (k[i] as f64 + offset[i]) * step;
            }
            let y = y0 + lc.mul_vec(&u);
            if m.quad_form(&u) <= 1.0 && self.domain.contains(&y) {
                let keep = match mask.as_deref_mut() {
                    Some(g) => self.mask_state(g, &y, reach_c, &mut scratch).is_some(),
                    None => true,
                };
                if keep {
                    self.try_candidate(y, tier, grid, ids, false);
                }
            }
            let mut i = 0;
            loop {
                if i == d {
                    return;
                }
                if k[i] < hi[i] {
                    k[i] += 1;
                    break;
                }
                k[i] = lo[i];
                i += 1;
            }
        }
    }

    /// Adds a node at `y` unless it is already covered. Packing: the new inner
    /// ellipsoid must miss every accepted inner ellipsoid of the tier, otherwise
    /// the candidate is dropped, or kept as a fill node when `force` is set.
    fn try_candidate(&mut self, y: Point, tier: Tier, grid: &mut Grid, ids: &mut Vec<usize>, force: bool) -> Option<usize> {
        let mut scratch = Vec::new();
        if !force {
            grid.at_point(&y, &mut scratch);
            if scratch.iter().any(|&id| self.nodes[id].outer.form(&y) <= 1.0) {
                return None;
            }
        }
        let unit = self.unit_at(&y, tier);
        let outer = unit.scaled(tier.mu);
        let inner = unit.scaled(tier.mu * self.consts.lambda_double_prime / self.consts.lambda_prime);
        let (lo, hi) = bbox(&inner);
        grid.in_box(&lo, &hi, &mut scratch);
        let overlaps = scratch
            .iter()
            .any(|&id| !self.nodes[id].fill && !ellipsoids_disjoint(&self.nodes[id].inner, &inner));
        if overlaps && !force {
            return None;
        }
        let (kind, basic, rep) = self.classify(&y, &outer, tier);
        let id = self.nodes.len();
        self.nodes.push(AvdNode {
            id,
            center: y,
            level: tier.level,
            refine_exponent: tier.exponent,
            distance_param: tier.r,
            outer,
            inner,
            kind,
            children: Vec::new(),
            representative: (kind == NodeKind::FinalLeaf).then_some(rep),
            basic,
            fill: overlaps,
            anchor: self.anchor,
        });
        grid.insert(id, &outer);
        ids.push(id);
        Some(id)
    }

    fn classify(&mut self, y: &Point, outer: &Ellipsoid, tier: Tier) -> (NodeKind, bool, usize) {
        let lfs = lfs_unchecked(y, &self.set.segments);
        let rep = lfs.nearest;
        let basic = tier.exponent == 0 && tier.r <= lfs.value;
        let lp = self.consts.lambda_prime;
        let is_final = match self.cfg.leaf_rule {
            LeafRule::Scale => {
                tier.exponent >= 1 && 1.0 / 2f64.powi(tier.exponent as i32) <= self.eps * (1.0 - lp) / (3.0 * lp)
            }
            LeafRule::Certified => {
                let scale_ok = tier.mu * (tier.r / lfs.value).max(1.0) <= self.eps.min(1.0) / 3.0;
                scale_ok || final_certificate(self.set, outer, rep, self.eps).holds
            }
        };
        let capped = tier.exponent >= MAX_REFINE || tier.level >= self.max_level;
        if is_final || capped {
            if !is_final {
                self.forced += 1;
            }
            (NodeKind::FinalLeaf, basic, rep)
        } else if basic {
            (NodeKind::BasicLeaf, true, rep)
        } else {
            (NodeKind::Internal, false, rep)
        }
    }

    /// Certifies that the tier covers `region ∩ B⁺` by subdividing boxes in the
    /// region's whitened frame; a box counts as covered when all its corners lie
    /// strictly inside one node. Uncovered box centers are offered as ordinary
    /// candidates, and small gaps receive forced nodes.
    /// With a mask, boxes that miss every masked node are skipped.
    fn cover(&mut self, region: &Ellipsoid, tier: Tier, grid: &mut Grid, ids: &mut Vec<usize>, mut mask: Option<&mut Grid>) {
        let d = self.set.dim;
        let l = region.factor();
        let sigma: Vec<f64> = (0..d).map(|k| l.column(k).norm()).collect();
        // Inscribed ellipsoids of C^μ(y, r) contain roughly the ball μ r/√d.
        let fill_radius = 0.45 * tier.mu * tier.r / (d as f64).sqrt();
        // Boxes carry their depth and whether one masked node already contains them.
        let mut stack: Vec<(Point, Point, u32, bool)> =
            vec![(Point::new(&vec![-1.0; d]), Point::new(&vec![1.0; d]), 0, mask.is_none())];
        let mut examined = 0usize;
        let mut scratch = Vec::new();
        let ncorners = 1usize << d;
        let mut corners: Vec<Point> = vec![Point::zeros(d); ncorners];
        let mut hv: Vec<Point> = vec![Point::zeros(d); d];
        let mut hint: Option<usize> = None;
        let mut mask_scratch = Vec::new();
        while let Some((lo, hi, depth, mut in_mask)) = stack.pop() {
            examined += 1;
            if examined > MAX_BOXES_PER_PARENT {
                self.uncovered_boxes += 1 + stack.len();
                return;
            }
            let mut dist2 = 0.0;
            for k in 0..d {
                let g = lo[k].max(0.0).max(-hi[k]);
                dist2 += g * g;
            }
            if dist2 > (1.0 + 1e-9) * (1.0 + 1e-9) {
                continue;
            }
            let uc = lo.midpoint(&hi);
            let xc = region.center + l.mul_vec(&uc);
            let mut radius2 = 0.0;
            let mut ext = Point::zeros(d);
            for k in 0..d {
                let half = 0.5 * (hi[k] - lo[k]);
                let h = half * sigma[k];
                radius2 += h * h;
                for i in 0..d {
                    hv[k][i] = half * l[(i, k)];
                    ext[i] += hv[k][i].abs();
                }
            }
            let radius = radius2.sqrt();
            if xc.dist(&self.domain.center) - radius > self.domain.radius {
                continue;
            }
            if !in_mask {
                let g = mask.as_deref_mut().expect("mask present");
                match self.mask_state(g, &xc, radius, &mut mask_scratch) {
                    None => continue,
                    Some(inside) => in_mask = inside,
                }
            }
            let mut corners_ready = false;
            let mut covers = |e: &Ellipsoid, corners: &mut Vec<Point>| {
                let f = e.form(&xc);
                if f > COVER_FORM {
                    return false;
                }
                if f.sqrt() + radius / e.min_semi_axis() <= COVER_FORM {
                    return true;
                }
                if !corners_ready {
                    for (ci, c) in corners.iter_mut().enumerate() {
                        *c = xc;
                        for (k, v) in hv.iter().enumerate() {
                            if ci & (1 << k) != 0 {
                                *c += *v;
                            } else {
                                *c -= *v;
                            }
                        }
                    }
                    corners_ready = true;
                }
                corners.iter().all(|c| e.form(c) <= COVER_FORM)
            };
            if let Some(h) = hint {
                if covers(&self.nodes[h].outer, &mut corners) {
                    continue;
                }
            }
            let mut center_hit = false;
            let mut found = None;
            if radius <= grid.max_axis {
                grid.in_box(&(xc - ext), &(xc + ext), &mut scratch);
            } else {
                // Too large to fit in any node; only the center matters.
                grid.at_point(&xc, &mut scratch);
            }
            for &id in &scratch {
                let e = &self.nodes[id].outer;
                if radius > grid.max_axis {
                    if e.form(&xc) <= 1.0 {
                        center_hit = true;
                        break;
                    }
                    continue;
                }
                if e.form(&xc) <= 1.0 {
                    center_hit = true;
                }
                if covers(e, &mut corners) {
                    found = Some(id);
                    break;
                }
            }
            if found.is_some() {
                hint = found;
                continue;
            }
            // Node centers stay inside the parent so descendants do not drift.
            let un = uc.norm();
            let site = if un > 1.0 { region.center + l.mul_vec(&(uc * (1.0 / un))) } else { xc };
            // A center that no node reaches is a genuine gap: offer it normally.
            let mut added = if !center_hit {
                self.try_candidate(site, tier, grid, ids, false)
            } else {
                None
            };
            if added.is_none() && radius <= fill_radius {
                if depth > 60 {
                    self.uncovered_boxes += 1;
                    continue;
                }
                added = self.try_candidate(site, tier, grid, ids, true);
            }
            if let Some(id) = added {
                if covers(&self.nodes[id].outer, &mut corners) {
                    hint = Some(id);
                    continue;
                }
            }
            // Split every axis in half.
            for child in 0..ncorners {
                let mut clo = lo;
                let mut chi = hi;
                for k in 0..d {
                    if child & (1 << k) != 0 {
                        clo[k] = uc[k];
                    } else {
                        chi[k] = uc[k];
                    }
                }
                stack.push((clo, chi, depth + 1, in_mask));
            }
        }
    }
}

/// Result of the geometric final-leaf test.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct CertificateCheck {
    /// Upper bound on the distance from any point of the region to the representative.
    pub upper: f64,
    /// Lower bound on the distance from the region to every other segment.
    pub lower: f64,
    pub holds: bool,
}

/// Proves `dist(q, rep) <= (1+ε) dist(q, S)` for every `q` in `region`.
///
/// `upper` bounds the distance from the region to the representative and
/// `lower` is the smallest lower bound on the distance to another segment. A
/// segment passes if its lower bound is at least `upper/(1+ε)`, or if the
/// linearized pair bound (see [`pair_margin`]) is nonpositive.
pub fn final_certificate(set: &SegmentSet, region: &Ellipsoid, rep: usize, eps: f64) -> CertificateCheck {
    let p = region.inverse_shape();
    let c = region.center;
    let rep_seg = &set.segments[rep];
    let upper = max_distance_upper(region, &p, rep_seg);
    let threshold = upper / (1.0 + eps);
    let rmax = region.max_semi_axis();
    let rep_foot = point_segment(&c, rep_seg);
    let mut lower = f64::INFINITY;
    let mut holds = true;
    for (k, s) in set.segments.iter().enumerate() {
        if k == rep {
            continue;
        }
        let foot = point_segment(&c, s);
        let cheap = foot.dist - rmax;
        lower = lower.min(cheap);
        if cheap >= threshold {
            continue;
        }
        if pair_margin(&p, &rep_foot, &foot, &c, rmax, eps) <= 0.0 {
            continue;
        }
        let refined = segment_distance_lower(region, &p, s);
        lower = lower.min(refined);
        if refined < threshold {
            holds = false;
            break;
        }
    }
    CertificateCheck { upper, lower, holds }
}

/// Upper bound on `max_{q ∈ E} [dist(q, rep) - (1+ε) dist(q, s)]`.
///
/// With `δ = q - c`, `|q - p| <= D_r + u_r·δ + |δ|²/(2 D_r)` for the foot `p` of
/// `c` on the representative, and `dist(q, s) >= D_s + u_s·δ` by convexity.
/// The linear part is maximized exactly with the support function of `E`.
fn pair_margin(p: &Mat, rep_foot: &Foot, foot: &Foot, c: &Point, rmax: f64, eps: f64) -> f64 {
    let (dr, ds) = (rep_foot.dist, foot.dist);
    if !(dr > 0.0) || !(ds > 0.0) {
        return f64::INFINITY;
    }
    let ur = (*c - rep_foot.point) * (1.0 / dr);
    let us = (*c - foot.point) * (1.0 / ds);
    let w = ur - us * (1.0 + eps);
    let bound = dr - (1.0 + eps) * ds + p.quad_form(&w).max(0.0).sqrt() + rmax * rmax / (2.0 * dr);
    // Rounding in the closed-form terms.
    bound + 1e-12 * (dr + ds + rmax)
}

/// Upper bound on `max_{q ∈ E} dist(q, s)`.
fn max_distance_upper(e: &Ellipsoid, p: &Mat, s: &Segment) -> f64 {
    let c = e.center;
    let rmax = e.max_semi_axis();
    let simple = point_segment_dist(&c, s) + rmax;
    let Some(v) = s.direction() else {
        return simple;
    };
    let d = c.dim();
    let w = c - s.a;
    let along = w.dot(&v);
    let perp = w.offset(&v, -along).norm();
    let proj = Mat::identity(d).sub(&Mat::outer(&v, &v));
    let spread = proj.mul(p).mul(&proj).max_eigenvalue().max(0.0).sqrt();
    let half = p.quad_form(&v).max(0.0).sqrt();
    let len = s.length();
    let over = (along + half - len).max(-(along - half)).max(0.0);
    let split = ((perp + spread).powi(2) + over * over).sqrt();
    simple.min(split)
}

/// Certified lower bound on the distance between an ellipsoid and a segment,
/// from a separating direction found by minimizing over the segment parameter.
fn segment_distance_lower(e: &Ellipsoid, p: &Mat, s: &Segment) -> f64 {
    let g = |t: f64| e.closest_point(&s.at(t));
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - phi * (hi - lo);
    let mut x2 = lo + phi * (hi - lo);
    let mut f1 = g(x1).0;
    let mut f2 = g(x2).0;
    for _ in 0..60 {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - phi * (hi - lo);
            f1 = g(x1).0;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + phi * (hi - lo);
            f2 = g(x2).0;
        }
        if hi - lo < 1e-12 {
            break;
        }
    }
    let mut best_t = 0.5 * (lo + hi);
    let mut best = g(best_t);
    for t in [0.0, 1.0] {
        let cand = g(t);
        if cand.0 < best.0 {
            best = cand;
            best_t = t;
        }
    }
    if best.0 <= 0.0 {
        return 0.0;
    }
    let q = s.at(best_t);
    let Some(w) = (q - best.1).normalized() else {
        return 0.0;
    };
    // Separation along w: min over the segment minus max over the ellipsoid.
    let seg_min = (s.a - e.center).dot(&w).min((s.b - e.center).dot(&w));
    let ell_max = p.quad_form(&w).max(0.0).sqrt();
    (seg_min - ell_max).max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::nearest_segment;
    use rand::SeedableRng;

    fn p(c: &[f64]) -> Point {
        Point::new(c)
    }

    #[test]
    fn certificate_bounds_are_sound() {
        let set = SegmentSet::new(
            vec![
                (p(&[0.0, 0.0]), p(&[4.0, 0.0])),
                (p(&[0.0, 1.0]), p(&[4.0, 1.5])),
                (p(&[5.0, -1.0]), p(&[5.0, 2.0])),
            ],
            false,
        )
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..50 {
            let c = p(&[rng.random_range(-1.0..6.0), rng.random_range(-1.0..2.5)]);
            let a = rng.random_range(0.01..0.5);
            let b = rng.random_range(0.01..0.5);
            let rot: f64 = rng.random_range(0.0..std::f64::consts::PI);
            let (cs, sn) = (rot.cos(), rot.sin());
            let r = Mat::from_rows(&[vec![cs, -sn], vec![sn, cs]]).unwrap();
            let shape = Mat::diag(&[1.0 / (a * a), 1.0 / (b * b)]).congruence(&r.transpose());
            let e = Ellipsoid::new(c, shape.symmetrized());
            let pm = e.inverse_shape();
            for s in &set.segments {
                let up = max_distance_upper(&e, &pm, s);
                let low = segment_distance_lower(&e, &pm, s);
                for _ in 0..300 {
                    let q = e.sample_interior(&mut rng);
                    let dq = point_segment_dist(&q, s);
                    assert!(dq <= up + 1e-12);
                    assert!(dq >= low - 1e-12);
                }
            }
            let rep = nearest_segment(&c, &set.segments).0;
            let cert = final_certificate(&set, &e, rep, 0.5);
            if cert.holds {
                for _ in 0..300 {
                    let q = e.sample_interior(&mut rng);
                    let got = point_segment_dist(&q, &set.segments[rep]);
                    let best = nearest_segment(&q, &set.segments).1;
                    assert!(got <= 1.5 * best + 1e-12);
                }
            }
        }
    }

    #[test]
    fn lower_bound_is_tight_for_separated_ball() {
        let s = Segment::new(p(&[-1.0, 2.0]), p(&[1.0, 2.0]), 0);
        let e = Ellipsoid::ball(p(&[0.0, 0.0]), 1.0);
        let low = segment_distance_lower(&e, &e.inverse_shape(), &s);
        assert!(low <= 1.0 && low > 1.0 - 1e-6, "{low}");
    }
}
