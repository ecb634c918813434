//! The crossing-grid family that forces quadratically many cover elements.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{point_segment_dist, SegmentSet};
use crate::linalg::Point;
use crate::workbench::brute_force_nn;

#[derive(Clone, Debug)]
pub struct GriddleInstance {
    pub n: usize,
    pub epsilon: f64,
    pub delta: f64,
    /// Verticals `v_0..v_n` take ids `0..=n`, horizontals `h_0..h_n` take `n+1..=2n+1`.
    pub set: SegmentSet,
    pub query_points: Vec<GriddlePoint>,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct GriddlePoint {
    pub vertical: usize,
    /// `j` in `q_j = (i, j/2, δ)`.
    pub index: usize,
    pub point: Point,
}

impl GriddleInstance {
    pub fn vertical(&self, i: usize) -> usize {
        i
    }

    pub fn horizontal(&self, j: usize) -> usize {
        self.n + 1 + j
    }

    pub fn odd_points(&self) -> impl Iterator<Item = &GriddlePoint> {
        self.query_points.iter().filter(|p| p.index % 2 == 1)
    }
}

pub fn default_delta(eps: f64) -> f64 {
    0.8 / (2.0 * (1.0 + eps))
}

pub fn gen_griddle(n: usize, eps: f64, delta: Option<f64>) -> Result<GriddleInstance> {
    if n == 0 {
        return Err(Error::Usage("griddle needs n >= 1".into()));
    }
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::Usage(format!("epsilon must be positive, got {eps}")));
    }
    let bound = 1.0 / (2.0 * (1.0 + eps));
    let delta = delta.unwrap_or_else(|| default_delta(eps));
    if !(delta > 0.0) || delta >= bound {
        return Err(Error::Usage(format!(
            "delta {delta} must lie in (0, {bound}) for epsilon {eps}"
        )));
    }
    let nf = n as f64;
    let mut pairs = Vec::with_capacity(2 * (n + 1));
    for i in 0..=n {
        let x = i as f64;
        pairs.push((Point::new(&[x, 0.0, 0.0]), Point::new(&[x, nf, 0.0])));
    }
    for j in 0..=n {
        let y = j as f64;
        pairs.push((Point::new(&[0.0, y, delta]), Point::new(&[nf, y, delta])));
    }
    let set = SegmentSet::new(pairs, false)?;
    let mut query_points = Vec::with_capacity((n + 1) * (2 * n + 1));
    for i in 0..=n {
        for j in 0..=2 * n {
            query_points.push(GriddlePoint {
                vertical: i,
                index: j,
                point: Point::new(&[i as f64, j as f64 / 2.0, delta]),
            });
        }
    }
    Ok(GriddleInstance {
        n,
        epsilon: eps,
        delta,
        set,
        query_points,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct GriddleReport {
    pub points_checked: usize,
    pub witness_count: usize,
    pub failures: Vec<String>,
    /// Smallest `dist(q, other)/dist(q, v_i) - 1` over witnesses and other segments.
    pub min_relative_error: f64,
}

impl GriddleReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Checks, at every odd query point of every vertical, that `v_i` is the only
/// segment within factor `1+ε` of the nearest distance.
pub fn verify_griddle(g: &GriddleInstance) -> GriddleReport {
    let mut failures = Vec::new();
    let mut witnesses = 0;
    let mut min_rel = f64::INFINITY;
    let mut checked = 0;
    for p in g.odd_points() {
        checked += 1;
        let q = &p.point;
        let vi = g.vertical(p.vertical);
        let dv = point_segment_dist(q, &g.set.segments[vi]);
        let mut ok = true;
        if (dv - g.delta).abs() > 1e-12 {
            failures.push(format!("q{} on v{}: dist to v_i is {dv}, expected {}", p.index, p.vertical, g.delta));
            ok = false;
        }
        for s in &g.set.segments {
            if s.id == vi {
                continue;
            }
            let d = point_segment_dist(q, s);
            if d < 0.5 - 1e-12 {
                failures.push(format!("q{} on v{}: segment {} at {d} < 1/2", p.index, p.vertical, s.id));
                ok = false;
            }
            let rel = d / dv - 1.0;
            min_rel = min_rel.min(rel);
            if rel <= g.epsilon {
                failures.push(format!(
                    "q{} on v{}: segment {} has relative error {rel} <= epsilon",
                    p.index, p.vertical, s.id
                ));
                ok = false;
            }
        }
        if brute_force_nn(&g.set, q).0 != vi {
            failures.push(format!("q{} on v{}: oracle disagrees", p.index, p.vertical));
            ok = false;
        }
        if ok {
            witnesses += 1;
        }
    }
    GriddleReport {
        points_checked: checked,
        witness_count: witnesses,
        failures,
        min_relative_error: min_rel,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_bounds() {
        let g = gen_griddle(8, 1.0, None).unwrap();
        assert!((g.delta - 0.2).abs() < 1e-15);
        assert_eq!(g.set.len(), 18);
        assert!(1.0 / (2.0 * g.delta) - 1.0 > 1.0);
        assert!(matches!(gen_griddle(4, 0.5, Some(0.34)), Err(Error::Usage(_))));
        for eps in [0.1, 0.5, 1.0, 2.0] {
            let d = default_delta(eps);
            assert!(1.0 / (2.0 * d) - 1.0 > eps);
        }
    }

    #[test]
    fn query_point_distances() {
        let g = gen_griddle(8, 1.0, Some(0.2)).unwrap();
        let q = Point::new(&[0.0, 0.5, 0.2]);
        assert!((point_segment_dist(&q, &g.set.segments[g.vertical(0)]) - 0.2).abs() < 1e-15);
        assert!((point_segment_dist(&q, &g.set.segments[g.horizontal(0)]) - 0.5).abs() < 1e-15);
        for p in g.query_points.iter().filter(|p| p.index % 2 == 0) {
            assert_eq!(brute_force_nn(&g.set, &p.point).1, 0.0);
        }
    }

    #[test]
    fn witness_count() {
        let g = gen_griddle(8, 1.0, Some(0.2)).unwrap();
        let r = verify_griddle(&g);
        assert!(r.passed(), "{:?}", r.failures);
        assert_eq!(r.points_checked, 72);
        assert_eq!(r.witness_count, 72);
        assert!(r.witness_count >= 64);
    }
}
