//! Distance primitives, instance statistics, local feature size and the domain ball.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::TOL;
use crate::error::{check_dims, Error, Result};
use crate::linalg::{Mat, Point};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Segment {
    pub a: Point,
    pub b: Point,
    pub id: usize,
}

impl Segment {
    pub fn new(a: Point, b: Point, id: usize) -> Self {
        assert_eq!(a.dim(), b.dim(), "segment endpoints differ in dimension");
        Self { a, b, id }
    }

    pub fn dim(&self) -> usize {
        self.a.dim()
    }

    pub fn length(&self) -> f64 {
        self.a.dist(&self.b)
    }

    pub fn is_degenerate(&self) -> bool {
        self.a == self.b
    }

    /// Unit direction `(b - a)/|b - a|`; `None` for a point site.
    pub fn direction(&self) -> Option<Point> {
        (self.b - self.a).normalized()
    }

    pub fn at(&self, t: f64) -> Point {
        self.a.offset(&(self.b - self.a), t)
    }
}

/// Closest point of a segment to a query.
#[derive(Clone, Copy, Debug)]
pub struct Foot {
    pub dist: f64,
    /// Clamped parameter in `[0, 1]`.
    pub t: f64,
    /// True when the unclamped projection falls strictly inside the segment.
    pub interior: bool,
    pub point: Point,
}

/// Unchecked point-segment distance; dimensions must agree.
#[inline]
pub fn point_segment(q: &Point, s: &Segment) -> Foot {
    let ab = s.b - s.a;
    let len2 = ab.norm_sq();
    let raw = if len2 > 0.0 { (*q - s.a).dot(&ab) / len2 } else { 0.0 };
    let interior = raw > 0.0 && raw < 1.0;
    let t = raw.clamp(0.0, 1.0);
    let point = s.a.offset(&ab, t);
    Foot {
        dist: q.dist(&point),
        t,
        interior,
        point,
    }
}

#[inline]
pub fn point_segment_dist(q: &Point, s: &Segment) -> f64 {
    point_segment(q, s).dist
}

pub fn dist_point_segment(q: &Point, s: &Segment) -> Result<Foot> {
    check_dims(s.dim(), q.dim())?;
    Ok(point_segment(q, s))
}

/// Minimum distance between two closed segments.
///
/// The squared distance is a convex quadratic on the parameter square, so the
/// minimum is either the interior critical point or lies on an edge of the
/// square, and every edge is an endpoint-to-segment problem.
pub fn dist_segment_segment(s1: &Segment, s2: &Segment) -> f64 {
    let mut best = point_segment_dist(&s1.a, s2)
        .min(point_segment_dist(&s1.b, s2))
        .min(point_segment_dist(&s2.a, s1))
        .min(point_segment_dist(&s2.b, s1));
    let d1 = s1.b - s1.a;
    let d2 = s2.b - s2.a;
    let r = s1.a - s2.a;
    let a = d1.norm_sq();
    let e = d2.norm_sq();
    let b = d1.dot(&d2);
    let c = d1.dot(&r);
    let f = d2.dot(&r);
    let det = a * e - b * b;
    if det > TOL.parallel * a * e && a > 0.0 && e > 0.0 {
        let s = (b * f - c * e) / det;
        let t = (a * f - b * c) / det;
        if s > 0.0 && s < 1.0 && t > 0.0 && t < 1.0 {
            best = best.min(s1.at(s).dist(&s2.at(t)));
        }
    }
    best
}

/// Index and distance of the nearest segment, ties to the lowest id.
pub fn nearest_segment(q: &Point, segs: &[Segment]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (i, s) in segs.iter().enumerate() {
        let d = point_segment_dist(q, s);
        if d < best.1 {
            best = (i, d);
        }
    }
    best
}

/// Local feature size: distance to the second-nearest segment.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Lfs {
    pub value: f64,
    pub nearest: usize,
    pub nearest_dist: f64,
    pub second: usize,
}

pub(crate) fn lfs_unchecked(x: &Point, segs: &[Segment]) -> Lfs {
    let mut n1 = (usize::MAX, f64::INFINITY);
    let mut n2 = (usize::MAX, f64::INFINITY);
    for (i, s) in segs.iter().enumerate() {
        let d = point_segment_dist(x, s);
        if d < n1.1 {
            n2 = n1;
            n1 = (i, d);
        } else if d < n2.1 {
            n2 = (i, d);
        }
    }
    Lfs {
        value: n2.1,
        nearest: n1.0,
        nearest_dist: n1.1,
        second: n2.0,
    }
}

pub fn local_feature_size(x: &Point, set: &SegmentSet) -> Result<Lfs> {
    check_dims(set.dim, x.dim())?;
    if set.len() < 2 {
        return Err(Error::NotDefined(
            "local feature size needs at least two segments".into(),
        ));
    }
    Ok(lfs_unchecked(x, &set.segments))
}

/// An immutable, validated set of pairwise disjoint segments.
#[derive(Clone, Debug)]
pub struct SegmentSet {
    pub segments: Vec<Segment>,
    pub dim: usize,
    pub diam: f64,
    /// `None` when `n = 1`.
    pub min_gap: Option<f64>,
    pub spread: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceStats {
    pub diam: f64,
    pub min_gap: f64,
    pub spread: f64,
}

impl SegmentSet {
    /// Validates and builds a set from endpoint pairs. Zero-length segments are
    /// rejected unless `allow_degenerate` is set, in which case they act as point sites.
    pub fn new(pairs: Vec<(Point, Point)>, allow_degenerate: bool) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::InvalidInstance("no segments".into()));
        }
        let dim = pairs[0].0.dim();
        if dim < 2 {
            return Err(Error::InvalidInstance("dimension must be at least 2".into()));
        }
        let mut segments = Vec::with_capacity(pairs.len());
        for (id, (a, b)) in pairs.into_iter().enumerate() {
            check_dims(dim, a.dim())?;
            check_dims(dim, b.dim())?;
            if !a.is_finite() || !b.is_finite() {
                return Err(Error::InvalidInstance(format!("segment {id} has non-finite coordinates")));
            }
            if a == b && !allow_degenerate {
                return Err(Error::InvalidInstance(format!("segment {id} has zero length")));
            }
            segments.push(Segment::new(a, b, id));
        }
        let diam = diameter(&segments);
        let (min_gap, spread) = if segments.len() >= 2 {
            let s = instance_stats_of(&segments, diam)?;
            (Some(s.min_gap), Some(s.spread))
        } else {
            (None, None)
        };
        Ok(Self {
            segments,
            dim,
            diam,
            min_gap,
            spread,
        })
    }

    pub fn len(&self) -> usize {
        self.segments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    pub fn endpoints(&self) -> Vec<Point> {
        self.segments.iter().flat_map(|s| [s.a, s.b]).collect()
    }

    pub fn nearest(&self, q: &Point) -> (usize, f64) {
        nearest_segment(q, &self.segments)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: InstanceFile =
            serde_json::from_str(text).map_err(|e| Error::parse("instance", e))?;
        file.into_set()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&InstanceFile::from_set(self)).expect("instance serializes")
    }
}

/// On-disk instance format: `{"dim": d, "segments": [[[a..],[b..]], ...]}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct InstanceFile {
    pub dim: usize,
    pub segments: Vec<[Vec<f64>; 2]>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub allow_degenerate: bool,
}

impl InstanceFile {
    pub fn from_set(set: &SegmentSet) -> Self {
        Self {
            dim: set.dim,
            segments: set.segments.iter().map(|s| [s.a.to_vec(), s.b.to_vec()]).collect(),
            allow_degenerate: set.segments.iter().any(|s| s.is_degenerate()),
        }
    }

    pub fn into_set(self) -> Result<SegmentSet> {
        let mut pairs = Vec::with_capacity(self.segments.len());
        for (i, [a, b]) in self.segments.iter().enumerate() {
            for p in [a, b] {
                if p.len() != self.dim {
                    return Err(Error::parse(
                        format!("segment {i}"),
                        format!("expected {} coordinates, found {}", self.dim, p.len()),
                    ));
                }
            }
            let pa = Point::try_from_slice(a)
                .ok_or_else(|| Error::parse(format!("segment {i}"), "unsupported dimension"))?;
            let pb = Point::try_from_slice(b)
                .ok_or_else(|| Error::parse(format!("segment {i}"), "unsupported dimension"))?;
            pairs.push((pa, pb));
        }
        SegmentSet::new(pairs, self.allow_degenerate)
    }
}

fn diameter(segs: &[Segment]) -> f64 {
    let pts: Vec<Point> = segs.iter().flat_map(|s| [s.a, s.b]).collect();
    let mut best: f64 = 0.0;
    for i in 0..pts.len() {
        for j in (i + 1)..pts.len() {
            best = best.max(pts[i].dist(&pts[j]));
        }
    }
    best
}

fn instance_stats_of(segs: &[Segment], diam: f64) -> Result<InstanceStats> {
    let mut min_gap = f64::INFINITY;
    let mut worst = (0, 0);
    for i in 0..segs.len() {
        for j in (i + 1)..segs.len() {
            let g = dist_segment_segment(&segs[i], &segs[j]);
            if g < min_gap {
                min_gap = g;
                worst = (i, j);
            }
        }
    }
    if !(min_gap > 0.0) {
        return Err(Error::InvalidInstance(format!(
            "segments {} and {} intersect",
            worst.0, worst.1
        )));
    }
    Ok(InstanceStats {
        diam,
        min_gap,
        spread: diam / min_gap,
    })
}

/// Diameter, minimum gap and spread of an instance with at least two segments.
pub fn instance_stats(set: &SegmentSet) -> Result<InstanceStats> {
    if set.len() < 2 {
        return Err(Error::NotDefined("minimum gap needs two segments".into()));
    }
    instance_stats_of(&set.segments, set.diam)
}

/// The minimum enclosing ball of the endpoints and its `1 + 2/eps` expansion.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DomainBall {
    pub center: Point,
    pub radius: f64,
    pub inner_radius: f64,
}

impl DomainBall {
    pub fn contains(&self, q: &Point) -> bool {
        q.dist(&self.center) <= self.radius * (1.0 + TOL.membership)
    }
}

pub fn domain_ball(set: &SegmentSet, eps: f64) -> Result<DomainBall> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::Usage(format!("epsilon must be positive, got {eps}")));
    }
    let (center, inner) = min_enclosing_ball(&set.endpoints(), 0x5eed_ba11);
    Ok(DomainBall {
        center,
        inner_radius: inner,
        radius: (1.0 + 2.0 / eps) * inner,
    })
}

/// Welzl's randomized minimum enclosing ball. The input order is shuffled with
/// `seed`; a final pass enlarges the radius if rounding left any point outside.
pub fn min_enclosing_ball(points: &[Point], seed: u64) -> (Point, f64) {
    assert!(!points.is_empty());
    let d = points[0].dim();
    let mut pts = points.to_vec();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    pts.shuffle(&mut rng);
    let mut support = Vec::with_capacity(d + 1);
    let (c, r) = welzl(&pts, pts.len(), &mut support, d);
    let r = pts.iter().fold(r.max(0.0), |m, p| m.max(p.dist(&c)));
    (c, r)
}

fn welzl(pts: &[Point], n: usize, support: &mut Vec<Point>, d: usize) -> (Point, f64) {
    if n == 0 || support.len() == d + 1 {
        return circumball(support, d);
    }
    let p = pts[n - 1];
    let ball = welzl(pts, n - 1, support, d);
    if ball.1 >= 0.0 && p.dist(&ball.0) <= ball.1 * (1.0 + 1e-12) + 1e-14 {
        return ball;
    }
    support.push(p);
    let ball = welzl(pts, n - 1, support, d);
    support.pop();
    ball
}

/// Smallest ball with all of `pts` on its boundary (affine circumsphere).
fn circumball(pts: &[Point], d: usize) -> (Point, f64) {
    match pts.len() {
        0 => (Point::zeros(d), -1.0),
        1 => (pts[0], 0.0),
        k => {
            let p0 = pts[0];
            let m = k - 1;
            let diffs: Vec<Point> = pts[1..].iter().map(|p| *p - p0).collect();
            let mut gram = Mat::zeros(m);
            let mut rhs = Point::zeros(m);
            for i in 0..m {
                for j in 0..m {
                    gram[(i, j)] = 2.0 * diffs[i].dot(&diffs[j]);
                }
                rhs[i] = diffs[i].norm_sq();
            }
            match gram.solve(&rhs) {
                Some(lam) => {
                    let mut c = p0;
                    for i in 0..m {
                        c = c.offset(&diffs[i], lam[i]);
                    }
                    let r = pts.iter().fold(0.0f64, |acc, p| acc.max(p.dist(&c)));
                    (c, r)
                }
                None => {
                    // Affinely dependent support: fall back to the farthest pair.
                    let mut best = (0, 0, -1.0);
                    for i in 0..k {
                        for j in (i + 1)..k {
                            let dd = pts[i].dist(&pts[j]);
                            if dd > best.2 {
                                best = (i, j, dd);
                            }
                        }
                    }
                    let c = pts[best.0].midpoint(&pts[best.1]);
                    let r = pts.iter().fold(0.0f64, |acc, p| acc.max(p.dist(&c)));
                    (c, r)
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seg(a: &[f64], b: &[f64], id: usize) -> Segment {
        Segment::new(Point::new(a), Point::new(b), id)
    }

    fn set(pairs: &[(&[f64], &[f64])]) -> Result<SegmentSet> {
        SegmentSet::new(
            pairs.iter().map(|(a, b)| (Point::new(a), Point::new(b))).collect(),
            false,
        )
    }

    #[test]
    fn point_segment_cases() {
        let s = seg(&[-1.0, 0.0], &[1.0, 0.0], 0);
        let f = dist_point_segment(&Point::new(&[0.0, 1.0]), &s).unwrap();
        assert_eq!(f.dist, 1.0);
        assert!(f.interior);
        let f = dist_point_segment(&Point::new(&[2.0, 0.0]), &s).unwrap();
        assert_eq!(f.dist, 1.0);
        assert!(!f.interior);
        assert_eq!(f.t, 1.0);
        assert!(dist_point_segment(&Point::new(&[0.0, 0.0, 0.0]), &s).is_err());
    }

    #[test]
    fn point_segment_matches_dense_sweep() {
        let s = seg(&[0.0, 0.0], &[0.0, 1.0], 0);
        let q = Point::new(&[3.0, 4.0]);
        let mut best = f64::INFINITY;
        let steps = 1_000_000;
        for k in 0..=steps {
            best = best.min(q.dist(&s.at(k as f64 / steps as f64)));
        }
        let got = point_segment_dist(&q, &s);
        assert!((got - best).abs() < 1e-9);
        assert!((got - 18f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn segment_segment_examples() {
        let a = seg(&[0.0, 0.0], &[1.0, 0.0], 0);
        assert_eq!(dist_segment_segment(&a, &seg(&[0.0, 1.0], &[1.0, 1.0], 1)), 1.0);
        assert_eq!(dist_segment_segment(&a, &seg(&[2.0, 0.0], &[3.0, 0.0], 1)), 1.0);
        let p = seg(&[0.0, 0.0, 0.0], &[1.0, 0.0, 0.0], 0);
        let q = seg(&[0.0, 0.0, 1.0], &[0.0, 1.0, 1.0], 1);
        let got = dist_segment_segment(&p, &q);
        let steps = 10_000;
        let mut best = f64::INFINITY;
        for i in 0..=steps {
            let x = p.at(i as f64 / steps as f64);
            for j in (0..=steps).step_by(1) {
                if i % 50 != 0 && j % 50 != 0 {
                    continue;
                }
                best = best.min(x.dist(&q.at(j as f64 / steps as f64)));
            }
        }
        assert!((got - best).abs() < 1e-6);
        assert!((got - 1.0).abs() < 1e-12);
    }

    #[test]
    fn crossing_segments_have_zero_distance() {
        let a = seg(&[-1.0, 0.0], &[1.0, 0.0], 0);
        let b = seg(&[0.0, -1.0], &[0.0, 1.0], 1);
        assert_eq!(dist_segment_segment(&a, &b), 0.0);
    }

    #[test]
    fn lfs_examples() {
        let s = set(&[(&[0.0, 0.0], &[10.0, 0.0]), (&[0.0, 2.0], &[10.0, 2.0])]).unwrap();
        let l = local_feature_size(&Point::new(&[5.0, 0.5]), &s).unwrap();
        assert_eq!(l.value, 1.5);
        assert_eq!((l.nearest, l.second), (0, 1));
        let l = local_feature_size(&Point::new(&[5.0, 1.0]), &s).unwrap();
        assert_eq!(l.value, 1.0);
        assert_eq!(l.nearest, 0);
        let one = set(&[(&[0.0, 0.0], &[1.0, 0.0])]).unwrap();
        assert!(matches!(
            local_feature_size(&Point::new(&[0.0, 1.0]), &one),
            Err(Error::NotDefined(_))
        ));
    }

    #[test]
    fn stats_examples() {
        let s = set(&[(&[0.0, 0.0], &[1.0, 0.0]), (&[0.0, 1.0], &[1.0, 1.0])]).unwrap();
        let st = instance_stats(&s).unwrap();
        assert!((st.diam - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(st.min_gap, 1.0);
        assert!((st.spread - 2f64.sqrt()).abs() < 1e-15);
        let far = set(&[(&[0.0, 0.0], &[1.0, 0.0]), (&[0.0, 10.0], &[1.0, 10.0])]).unwrap();
        assert_eq!(far.min_gap, Some(10.0));
        let touching = set(&[(&[0.0, 0.0], &[1.0, 0.0]), (&[1.0, 0.0], &[1.0, 1.0])]);
        assert!(matches!(touching, Err(Error::InvalidInstance(_))));
    }

    #[test]
    fn degenerate_segments_need_flag() {
        let pairs = vec![(Point::new(&[0.0, 0.0]), Point::new(&[0.0, 0.0]))];
        assert!(SegmentSet::new(pairs.clone(), false).is_err());
        assert!(SegmentSet::new(pairs, true).is_ok());
    }

    #[test]
    fn domain_ball_examples() {
        let s = set(&[(&[0.0, 0.0], &[10.0, 0.0])]).unwrap();
        let b = domain_ball(&s, 2.0).unwrap();
        assert!((b.center[0] - 5.0).abs() < 1e-12 && b.center[1].abs() < 1e-12);
        assert!((b.inner_radius - 5.0).abs() < 1e-12);
        assert!((b.radius - 10.0).abs() < 1e-12);
        let b = domain_ball(&s, 0.1).unwrap();
        assert!((b.radius - 21.0 * b.inner_radius).abs() < 1e-9);
        assert!(domain_ball(&s, 0.0).is_err());
    }

    #[test]
    fn enclosing_ball_of_triangle() {
        let pts = [
            Point::new(&[0.0, 0.0]),
            Point::new(&[2.0, 0.0]),
            Point::new(&[1.0, 1.0]),
            Point::new(&[1.0, 0.2]),
        ];
        let (c, r) = min_enclosing_ball(&pts, 1);
        assert!((c[0] - 1.0).abs() < 1e-12 && c[1].abs() < 1e-12);
        assert!((r - 1.0).abs() < 1e-12);
    }

    #[test]
    fn json_round_trip() {
        let s = set(&[(&[0.0, 0.1], &[1.0, 0.0]), (&[0.0, 1.0], &[1.0, 1.0])]).unwrap();
        let back = SegmentSet::from_json(&s.to_json()).unwrap();
        assert_eq!(back.segments, s.segments);
        assert!(SegmentSet::from_json("{\"dim\": 2, \"segments\": [[[0,0],[1]]]}").is_err());
        assert!(SegmentSet::from_json("{\"dim\": 2, \"segm").is_err());
    }
}
