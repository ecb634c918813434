//! Half-squared distance functions, their Hessians, and the local tensors built
//! from them: per-segment ellipsoids `E_i(x)`, the blended metric ball `Ẽ(x)`
//! and the cell `Ê(x) = ∩ E_i(x)`.

use serde::Serialize;

use crate::config::TOL;
use crate::ellipsoid::Ellipsoid;
use crate::error::{check_dims, Error, Result};
use crate::geometry::{point_segment, Segment, SegmentSet};
use crate::linalg::{Mat, Point};

/// Half squared distances from a point to a segment, its line and its nearest endpoint.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DistanceTriple {
    pub d_seg: f64,
    pub d_line: f64,
    pub d_endpoint: f64,
    pub interior_foot: bool,
}

pub fn distance_triple(x: &Point, s: &Segment) -> DistanceTriple {
    let foot = point_segment(x, s);
    let da = 0.5 * x.dist_sq(&s.a);
    let db = 0.5 * x.dist_sq(&s.b);
    let d_endpoint = da.min(db);
    let d_line = match s.direction() {
        Some(v) => {
            let w = *x - s.a;
            let along = w.dot(&v);
            (0.5 * (w.norm_sq() - along * along)).max(0.0)
        }
        None => d_endpoint,
    };
    let d_seg = if foot.interior { d_line } else { d_endpoint };
    DistanceTriple {
        d_seg,
        d_line,
        d_endpoint,
        interior_foot: foot.interior,
    }
}

/// Hessian of the half squared distance to the line with unit direction `v`.
pub fn hessian_line(v: &Point) -> Result<Mat> {
    if (v.norm() - 1.0).abs() > 1e-12 {
        return Err(Error::Usage(format!("direction must be a unit vector, |v| = {}", v.norm())));
    }
    Ok(projector(v))
}

/// `I - v v^T` for a unit vector `v`.
pub(crate) fn projector(v: &Point) -> Mat {
    Mat::identity(v.dim()).sub(&Mat::outer(v, v))
}

#[derive(Clone, Copy, Debug)]
pub struct LocalTensor {
    pub matrix: Mat,
    /// `1/D•`, attached to the segment direction.
    pub eigen_small: f64,
    /// `1/D`, on the orthogonal complement.
    pub eigen_large: f64,
    /// `None` for a point site.
    pub axis: Option<Point>,
}

impl LocalTensor {
    /// The ellipsoid `{y : ½ (y-x)^T H (y-x) <= 1}`.
    pub fn ellipsoid(&self, x: &Point) -> Ellipsoid {
        Ellipsoid::new(*x, self.matrix.scale(0.5))
    }
}

pub fn local_tensor(x: &Point, s: &Segment) -> Result<LocalTensor> {
    check_dims(s.dim(), x.dim())?;
    let t = distance_triple(x, s);
    if !(t.d_seg > 0.0) || !(t.d_endpoint > 0.0) {
        return Err(Error::SingularTensor(format!("point lies on segment {}", s.id)));
    }
    let large = 1.0 / t.d_seg;
    let small = 1.0 / t.d_endpoint;
    let axis = s.direction();
    let matrix = match axis {
        Some(v) => projector(&v)
            .scale(large)
            .add(&Mat::outer(&v, &v).scale(small)),
        None => Mat::scaled_identity(x.dim(), large),
    };
    Ok(LocalTensor {
        matrix,
        eigen_small: small,
        eigen_large: large,
        axis,
    })
}

/// `½ (y-x)^T H_i(x) (y-x)`.
pub fn local_form(x: &Point, s: &Segment, y: &Point) -> Result<f64> {
    check_dims(x.dim(), y.dim())?;
    Ok(0.5 * local_tensor(x, s)?.matrix.quad_form_at(y, x))
}

pub fn local_ellipsoid_membership(x: &Point, s: &Segment, y: &Point) -> Result<bool> {
    Ok(local_form(x, s, y)? <= 1.0 + TOL.membership)
}

/// `Σ_i H_i(x)`.
pub fn blended_tensor(x: &Point, set: &SegmentSet) -> Result<Mat> {
    check_dims(set.dim, x.dim())?;
    let mut h = Mat::zeros(set.dim);
    for s in &set.segments {
        h = h.add(&local_tensor(x, s)?.matrix);
    }
    Ok(h)
}

pub fn blended_form(x: &Point, set: &SegmentSet, y: &Point) -> Result<f64> {
    check_dims(x.dim(), y.dim())?;
    Ok(0.5 * blended_tensor(x, set)?.quad_form_at(y, x))
}

pub fn metric_ball_membership(x: &Point, set: &SegmentSet, y: &Point) -> Result<bool> {
    Ok(blended_form(x, set, y)? <= 1.0 + TOL.membership)
}

/// The metric ball `Ẽ(x)` as an ellipsoid.
pub fn metric_ball(x: &Point, set: &SegmentSet) -> Result<Ellipsoid> {
    Ok(Ellipsoid::new(*x, blended_tensor(x, set)?.scale(0.5)))
}

/// Largest per-segment form; `y ∈ Ê(x)` iff this is at most 1.
pub fn cell_form(x: &Point, set: &SegmentSet, y: &Point) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for s in &set.segments {
        worst = worst.max(local_form(x, s, y)?);
    }
    Ok(worst)
}

pub fn cell_membership(x: &Point, set: &SegmentSet, y: &Point) -> Result<bool> {
    for s in &set.segments {
        if local_form(x, s, y)? > 1.0 + TOL.membership {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(c: &[f64]) -> Point {
        Point::new(c)
    }

    fn fig_segment() -> Segment {
        Segment::new(p(&[0.0, 0.0]), p(&[10.0, 0.0]), 0)
    }

    #[test]
    fn triples_at_reference_points() {
        let t = distance_triple(&p(&[5.0, 1.0]), &fig_segment());
        assert!((t.d_line - 0.5).abs() < 1e-15);
        assert!((t.d_endpoint - 13.0).abs() < 1e-12);
        assert_eq!(t.d_seg, t.d_line);
        assert!(t.interior_foot);
        let t = distance_triple(&p(&[7.0, -0.5]), &fig_segment());
        assert!((t.d_line - 0.125).abs() < 1e-15);
        assert!((t.d_endpoint - 4.625).abs() < 1e-12);
        let t = distance_triple(&p(&[3.0, 0.0]), &fig_segment());
        assert_eq!(t.d_seg, 0.0);
    }

    #[test]
    fn line_hessian() {
        let h = hessian_line(&Point::unit(2, 0)).unwrap();
        assert_eq!(h.to_rows(), vec![vec![0.0, 0.0], vec![0.0, 1.0]]);
        let r = 0.5f64.sqrt();
        let h = hessian_line(&p(&[r, r])).unwrap();
        assert!(h.max_abs_diff(&Mat::from_rows(&[vec![0.5, -0.5], vec![-0.5, 0.5]]).unwrap()) < 1e-15);
        assert!(hessian_line(&p(&[1.0, 1.0])).is_err());
    }

    #[test]
    fn tensors_at_reference_points() {
        let t = local_tensor(&p(&[5.0, 1.0]), &fig_segment()).unwrap();
        assert!(t.matrix.max_abs_diff(&Mat::diag(&[1.0 / 13.0, 2.0])) < 1e-15);
        let e = t.ellipsoid(&p(&[5.0, 1.0]));
        let axes = e.semi_axes();
        assert!((axes[0] - 1.0).abs() < 1e-12 && (axes[1] - 26f64.sqrt()).abs() < 1e-12);

        let t = local_tensor(&p(&[7.0, -0.5]), &fig_segment()).unwrap();
        let axes = t.ellipsoid(&p(&[7.0, -0.5])).semi_axes();
        assert!((axes[0] - 0.5).abs() < 1e-12 && (axes[1] - 9.25f64.sqrt()).abs() < 1e-12);

        let x = p(&[10.0 + 0.875f64.sqrt(), 0.25]);
        let t = local_tensor(&x, &fig_segment()).unwrap();
        assert_eq!(t.eigen_small, t.eigen_large);
        let axes = t.ellipsoid(&x).semi_axes();
        assert!((axes[0] - 0.9375f64.sqrt()).abs() < 1e-12);
        assert!((axes[1] - 0.9375f64.sqrt()).abs() < 1e-12);

        assert!(matches!(
            local_tensor(&p(&[1.0, 0.0]), &fig_segment()),
            Err(Error::SingularTensor(_))
        ));
    }

    #[test]
    fn memberships_at_reference_points() {
        let x = p(&[5.0, 1.0]);
        let s = fig_segment();
        assert!(local_ellipsoid_membership(&x, &s, &x).unwrap());
        let f = local_form(&x, &s, &p(&[5.0 + 26f64.sqrt(), 1.0])).unwrap();
        assert!((f - 1.0).abs() < 1e-12);
        assert!((local_form(&x, &s, &p(&[5.0, 3.0])).unwrap() - 4.0).abs() < 1e-12);
        assert!(!local_ellipsoid_membership(&x, &s, &p(&[5.0, 3.0])).unwrap());
    }

    #[test]
    fn blended_of_parallel_copies_doubles() {
        let set = SegmentSet::new(
            vec![
                (p(&[0.0, 0.0]), p(&[10.0, 0.0])),
                (p(&[0.0, 2.0]), p(&[10.0, 2.0])),
            ],
            false,
        )
        .unwrap();
        let x = p(&[5.0, 1.0]);
        let h = blended_tensor(&x, &set).unwrap();
        let single = local_tensor(&x, &set.segments[0]).unwrap().matrix;
        assert!(h.max_abs_diff(&single.scale(2.0)) < 1e-14);
        let one = SegmentSet::new(vec![(p(&[0.0, 0.0]), p(&[10.0, 0.0]))], false).unwrap();
        let y = p(&[6.0, 1.3]);
        assert_eq!(
            metric_ball_membership(&x, &one, &y).unwrap(),
            local_ellipsoid_membership(&x, &one.segments[0], &y).unwrap()
        );
        assert_eq!(
            cell_membership(&x, &one, &y).unwrap(),
            local_ellipsoid_membership(&x, &one.segments[0], &y).unwrap()
        );
    }
}
