//! Capsules `C(x, r)`: intersections of concentric cylinders and balls centered
//! at `x`, one or two per segment. Everything reduces to quadratic forms in
//! `z - x`, so scaling about the center is exact.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_dims, Error, Result};
use crate::geometry::{lfs_unchecked, point_segment, SegmentSet};
use crate::linalg::{Mat, Point};
use crate::tensors::projector;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstraintKind {
    Cylinder,
    Ball,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConcentricConstraint {
    pub kind: ConstraintKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub axis: Option<Point>,
    pub threshold: f64,
    pub segment: usize,
}

impl ConcentricConstraint {
    pub fn ball(threshold: f64, segment: usize) -> Self {
        Self {
            kind: ConstraintKind::Ball,
            axis: None,
            threshold,
            segment,
        }
    }

    pub fn cylinder(axis: Point, threshold: f64, segment: usize) -> Self {
        Self {
            kind: ConstraintKind::Cylinder,
            axis: Some(axis),
            threshold,
            segment,
        }
    }

    /// `M_j`: `I - v v^T` for cylinders, `I` for balls.
    pub fn matrix_form(&self, dim: usize) -> Mat {
        match self.axis {
            Some(v) => projector(&v),
            None => Mat::identity(dim),
        }
    }

    /// `w^T M_j w` for an offset `w = z - x`.
    #[inline]
    pub fn form(&self, w: &Point) -> f64 {
        match &self.axis {
            Some(v) => {
                let a = w.dot(v);
                (w.norm_sq() - a * a).max(0.0)
            }
            None => w.norm_sq(),
        }
    }

    /// Projection of the offset `w` onto `{w : w^T M w <= rho^2}`.
    fn project(&self, w: &Point, rho: f64) -> Point {
        match &self.axis {
            Some(v) => {
                let a = w.dot(v);
                let perp = w.offset(v, -a);
                let n = perp.norm();
                if n <= rho {
                    *w
                } else {
                    (*v * a) + perp * (rho / n)
                }
            }
            None => {
                let n = w.norm();
                if n <= rho {
                    *w
                } else {
                    *w * (rho / n)
                }
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Capsule {
    pub center: Point,
    pub r: f64,
    pub constraints: Vec<ConcentricConstraint>,
}

pub fn build_capsule(set: &SegmentSet, x: &Point, r: f64) -> Result<Capsule> {
    check_dims(set.dim, x.dim())?;
    if !(r >= 0.0) {
        return Err(Error::Usage(format!("capsule radius must be non-negative, got {r}")));
    }
    Ok(capsule_unchecked(set, x, r))
}

pub(crate) fn capsule_unchecked(set: &SegmentSet, x: &Point, r: f64) -> Capsule {
    let mut constraints = Vec::with_capacity(2 * set.len());
    for s in &set.segments {
        let foot = point_segment(x, s);
        match (foot.interior, s.direction()) {
            (true, Some(v)) => {
                constraints.push(ConcentricConstraint::cylinder(v, r.max(foot.dist), s.id));
                let end = x.dist(&s.a).min(x.dist(&s.b));
                constraints.push(ConcentricConstraint::ball(r.max(end), s.id));
            }
            _ => constraints.push(ConcentricConstraint::ball(r.max(foot.dist), s.id)),
        }
    }
    Capsule {
        center: *x,
        r,
        constraints,
    }
}

impl Capsule {
    pub fn dim(&self) -> usize {
        self.center.dim()
    }

    /// Smallest `λ` with `z ∈ C^λ`: the gauge of the capsule at `z`.
    pub fn gauge(&self, z: &Point) -> f64 {
        let w = *z - self.center;
        let mut g: f64 = 0.0;
        for c in &self.constraints {
            g = g.max(c.form(&w).sqrt() / c.threshold);
        }
        g
    }

    /// Exact scaled membership `(z-x)^T M_j (z-x) <= (λ t_j)^2` for every constraint.
    pub fn contains(&self, z: &Point, lambda: f64) -> bool {
        let w = *z - self.center;
        self.constraints.iter().all(|c| {
            let t = lambda * c.threshold;
            c.form(&w) <= t * t
        })
    }

    /// Radius of the smallest ball constraint; the capsule lies inside that ball.
    pub fn bounding_radius(&self) -> f64 {
        self.constraints
            .iter()
            .filter(|c| c.kind == ConstraintKind::Ball)
            .map(|c| c.threshold)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn min_threshold(&self) -> f64 {
        self.constraints.iter().map(|c| c.threshold).fold(f64::INFINITY, f64::min)
    }

    /// Axis-aligned box `center ± λρ` enclosing `C^λ`.
    pub fn bounding_box(&self, lambda: f64) -> (Point, Point) {
        let rho = lambda * self.bounding_radius();
        let mut lo = self.center;
        let mut hi = self.center;
        for k in 0..self.dim() {
            lo[k] -= rho;
            hi[k] += rho;
        }
        (lo, hi)
    }

    /// Point on the boundary of `C^λ` in direction `w` from the center.
    pub fn boundary_point(&self, w: &Point, lambda: f64) -> Point {
        let g = self.gauge(&(self.center + *w));
        self.center + *w * (lambda / g)
    }
}

/// Alternating projections onto the constraints of two shrunken capsules.
/// A returned point is an exact member of both `C1^λ` and `C2^λ`.
pub fn shrunken_intersection_witness(c1: &Capsule, c2: &Capsule, lambda: f64) -> Option<Point> {
    if c1.dim() != c2.dim() {
        return None;
    }
    let inside = |z: &Point| c1.contains(z, lambda) && c2.contains(z, lambda);
    let mut z = c1.center.midpoint(&c2.center);
    if inside(&z) {
        return Some(z);
    }
    // Aim slightly inside so the final exact check can succeed.
    let target = lambda * (1.0 - 1e-7);
    let scale = c1.bounding_radius().min(c2.bounding_radius()).max(f64::MIN_POSITIVE);
    for _ in 0..200 {
        let before = z;
        for cap in [c1, c2] {
            for c in &cap.constraints {
                let w = z - cap.center;
                z = cap.center + c.project(&w, target * c.threshold);
            }
        }
        if inside(&z) {
            return Some(z);
        }
        if z.dist(&before) <= 1e-10 * scale {
            break;
        }
    }
    inside(&z).then_some(z)
}

/// Scale constants tying the packing and cover ellipsoids together.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScaleConstants {
    pub lambda: f64,
    pub lambda_prime: f64,
    pub lambda_double_prime: f64,
    pub alpha: f64,
    pub beta_lfs: f64,
    pub gamma: f64,
}

pub fn alpha(lambda: f64) -> f64 {
    (3.0 + lambda) / (1.0 - lambda)
}

pub fn beta_lfs(lambda: f64) -> f64 {
    (3.0 + lambda) * (1.0 + lambda) / ((1.0 - lambda) * (1.0 - lambda))
}

impl ScaleConstants {
    pub fn new(dim: usize, lambda_prime: f64) -> Self {
        let a = alpha(lambda_prime);
        Self {
            lambda: lambda_prime,
            lambda_prime,
            lambda_double_prime: lambda_prime * (dim as f64).sqrt() / a,
            alpha: a,
            beta_lfs: beta_lfs(lambda_prime),
            gamma: 2.0,
        }
    }

    pub fn for_dim(dim: usize) -> Self {
        Self::new(dim, 0.5)
    }
}

/// Inner double cone and outer cylinder sandwiching a capsule.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct BoundingVolumes {
    pub center: Point,
    pub axis: Point,
    pub base_radius: f64,
    /// `None` for a ball capsule.
    pub apex: Option<Point>,
    pub half_height: f64,
    pub outer_half_height: f64,
    /// Acute angle between `s1` and the segment generating the apex.
    pub angle: Option<f64>,
    pub unit_ball_volume: f64,
    /// True when the nearest point of `s1` is an endpoint and both volumes are the ball.
    pub ball_case: bool,
    pub nearest: usize,
    pub apex_segment: Option<usize>,
}

/// Volume of the unit ball in `R^k`.
pub fn unit_ball_volume(k: usize) -> f64 {
    match k {
        0 => 1.0,
        1 => 2.0,
        _ => unit_ball_volume(k - 2) * 2.0 * std::f64::consts::PI / k as f64,
    }
}

pub fn bounding_volumes(set: &SegmentSet, x: &Point, r: f64) -> Result<BoundingVolumes> {
    check_dims(set.dim, x.dim())?;
    if set.len() < 2 {
        return Err(Error::NotDefined("bounding volumes need two segments".into()));
    }
    let d = set.dim;
    let cap = capsule_unchecked(set, x, r);
    let lfs = lfs_unchecked(x, &set.segments);
    let s1 = lfs.nearest;
    let cyl1 = cap
        .constraints
        .iter()
        .find(|c| c.segment == s1 && c.kind == ConstraintKind::Cylinder);
    let unit = unit_ball_volume(d - 1);
    let Some(cyl1) = cyl1 else {
        let rho = cap.bounding_radius();
        return Ok(BoundingVolumes {
            center: *x,
            axis: Point::unit(d, 0),
            base_radius: rho,
            apex: None,
            half_height: rho,
            outer_half_height: rho,
            angle: None,
            unit_ball_volume: unit,
            ball_case: true,
            nearest: s1,
            apex_segment: None,
        });
    };
    let v1 = cyl1.axis.unwrap();
    let t1 = cyl1.threshold;
    let rho_min = cap.bounding_radius();
    let mut h = rho_min;
    let mut gen: Option<(usize, f64, f64)> = None;
    for c in &cap.constraints {
        if c.segment == s1 || c.kind != ConstraintKind::Cylinder {
            continue;
        }
        let v = c.axis.unwrap();
        let cos = v.dot(&v1).abs().min(1.0);
        let sin = (1.0 - cos * cos).max(0.0).sqrt();
        if sin <= 1e-12 {
            continue;
        }
        let s = c.threshold / sin;
        if s < h {
            h = s;
            gen = Some((c.segment, cos, c.threshold));
        }
    }
    let (outer, angle, apex_segment) = match gen {
        Some((seg, cos, t2)) => {
            let sin = (1.0 - cos * cos).sqrt();
            (((t2 + t1 * cos) / sin).min(rho_min), Some(cos.acos()), Some(seg))
        }
        None => (rho_min, None, None),
    };
    Ok(BoundingVolumes {
        center: *x,
        axis: v1,
        base_radius: t1,
        apex: Some(x.offset(&v1, h)),
        half_height: h,
        outer_half_height: outer,
        angle,
        unit_ball_volume: unit,
        ball_case: false,
        nearest: s1,
        apex_segment,
    })
}

impl BoundingVolumes {
    fn split(&self, z: &Point) -> (f64, f64) {
        let w = *z - self.center;
        let s = w.dot(&self.axis);
        (s.abs(), (w.norm_sq() - s * s).max(0.0).sqrt())
    }

    pub fn in_inner(&self, z: &Point) -> bool {
        if self.ball_case {
            return z.dist(&self.center) <= self.base_radius;
        }
        let (s, perp) = self.split(z);
        s <= self.half_height && perp <= self.base_radius * (1.0 - s / self.half_height)
    }

    pub fn in_outer(&self, z: &Point) -> bool {
        if self.ball_case {
            return z.dist(&self.center) <= self.base_radius;
        }
        let (s, perp) = self.split(z);
        s <= self.outer_half_height && perp <= self.base_radius
    }

    pub fn inner_volume(&self) -> f64 {
        let d = self.center.dim() as f64;
        if self.ball_case {
            return unit_ball_volume(self.center.dim()) * self.base_radius.powf(d);
        }
        2.0 * self.unit_ball_volume * self.base_radius.powf(d - 1.0) * self.half_height / d
    }

    pub fn outer_volume(&self) -> f64 {
        let d = self.center.dim() as f64;
        if self.ball_case {
            return self.inner_volume();
        }
        2.0 * self.unit_ball_volume * self.base_radius.powf(d - 1.0) * self.outer_half_height
    }

    pub fn volume_ratio(&self) -> f64 {
        self.outer_volume() / self.inner_volume()
    }

    /// Axis-aligned box enclosing the outer volume.
    pub fn bounding_box(&self) -> (Point, Point) {
        let ext = if self.ball_case {
            self.base_radius
        } else {
            (self.base_radius * self.base_radius + self.outer_half_height * self.outer_half_height).sqrt()
        };
        let mut lo = self.center;
        let mut hi = self.center;
        for k in 0..self.center.dim() {
            lo[k] -= ext;
            hi[k] += ext;
        }
        (lo, hi)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct VolumeEstimate {
    pub volume: f64,
    pub std_error: f64,
    pub hits: u64,
    pub samples: u64,
    /// Set when no sample hit the region.
    pub flagged: bool,
}

/// Hit-or-miss Monte Carlo volume of a region inside the box `[lo, hi]`.
pub fn mc_volume(
    membership: impl Fn(&Point) -> bool,
    lo: &Point,
    hi: &Point,
    samples: u64,
    seed: u64,
) -> VolumeEstimate {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = lo.dim();
    let box_vol: f64 = (0..d).map(|k| hi[k] - lo[k]).product();
    let mut hits = 0u64;
    let mut z = *lo;
    for _ in 0..samples {
        for k in 0..d {
            z[k] = rng.random_range(lo[k]..hi[k]);
        }
        if membership(&z) {
            hits += 1;
        }
    }
    let p = hits as f64 / samples.max(1) as f64;
    VolumeEstimate {
        volume: p * box_vol,
        std_error: box_vol * (p * (1.0 - p) / samples.max(1) as f64).sqrt(),
        hits,
        samples,
        flagged: hits == 0,
    }
}
