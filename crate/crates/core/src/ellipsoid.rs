//! Ellipsoids, exact concentric containment, disjointness, and the inscribed
//! ellipsoids `E^λ(x, r)` used as low-complexity stand-ins for capsules.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::capsule::{capsule_unchecked, Capsule, ConcentricConstraint, ConstraintKind, ScaleConstants};
use crate::config::TOL;
use crate::error::{check_dims, Error, Result};
use crate::geometry::SegmentSet;
use crate::linalg::{dense_spd_solve, orthonormal_complement, Mat, Point, SymEigen};

/// `{y : (y-c)^T A (y-c) <= 1}` with `A` symmetric positive definite.
#[derive(Clone, Copy, Debug)]
pub struct Ellipsoid {
    pub center: Point,
    pub shape: Mat,
    eigen: SymEigen,
}

impl PartialEq for Ellipsoid {
    fn eq(&self, other: &Self) -> bool {
        self.center == other.center && self.shape == other.shape
    }
}

impl Ellipsoid {
    /// Builds an ellipsoid from its shape matrix. Panics if `shape` is not
    /// positive definite; use [`Ellipsoid::try_new`] for untrusted input.
    pub fn new(center: Point, shape: Mat) -> Self {
        Self::try_new(center, shape).expect("shape must be symmetric positive definite")
    }

    pub fn try_new(center: Point, shape: Mat) -> Result<Self> {
        check_dims(center.dim(), shape.dim())?;
        if !shape.is_finite() || shape.max_abs_diff(&shape.transpose()) > 1e-12 * shape.frobenius().max(1.0) {
            return Err(Error::InvalidInstance("ellipsoid shape is not symmetric".into()));
        }
        let eigen = shape.sym_eigen();
        if !(eigen.values[0] > 0.0) {
            return Err(Error::InvalidInstance("ellipsoid shape is not positive definite".into()));
        }
        Ok(Self { center, shape, eigen })
    }

    /// The ball of radius `radius` about `center`.
    pub fn ball(center: Point, radius: f64) -> Self {
        Self::new(center, Mat::scaled_identity(center.dim(), 1.0 / (radius * radius)))
    }

    /// Builds from `P = A^{-1}` (squared semi-axes as eigenvalues).
    pub fn from_inverse_shape(center: Point, p: &Mat) -> Option<Self> {
        let a = p.spd_inverse()?;
        Self::try_new(center, a).ok()
    }

    pub fn dim(&self) -> usize {
        self.center.dim()
    }

    #[inline]
    pub fn form(&self, y: &Point) -> f64 {
        self.shape.quad_form_at(y, &self.center)
    }

    pub fn contains(&self, y: &Point) -> bool {
        self.form(y) <= 1.0 + TOL.membership
    }

    /// Semi-axis lengths in ascending order.
    pub fn semi_axes(&self) -> Vec<f64> {
        let mut axes: Vec<f64> = self.eigen.values.as_slice().iter().map(|a| 1.0 / a.sqrt()).collect();
        axes.sort_by(f64::total_cmp);
        axes
    }

    /// `(semi-axis, unit direction)` pairs, longest first.
    pub fn axes(&self) -> Vec<(f64, Point)> {
        (0..self.dim())
            .map(|k| (1.0 / self.eigen.values[k].sqrt(), self.eigen.vectors.column(k)))
            .collect()
    }

    pub fn max_semi_axis(&self) -> f64 {
        1.0 / self.eigen.values[0].sqrt()
    }

    pub fn min_semi_axis(&self) -> f64 {
        1.0 / self.eigen.values[self.dim() - 1].sqrt()
    }

    /// `L` with `E = {c + L u : |u| <= 1}` (columns are scaled principal axes).
    pub fn factor(&self) -> Mat {
        let d = self.dim();
        let mut l = self.eigen.vectors;
        for k in 0..d {
            let s = 1.0 / self.eigen.values[k].sqrt();
            for i in 0..d {
                l[(i, k)] *= s;
            }
        }
        l
    }

    /// `A^{-1}`.
    pub fn inverse_shape(&self) -> Mat {
        self.eigen.map(|a| 1.0 / a)
    }

    #[inline]
    pub fn from_unit(&self, u: &Point) -> Point {
        let d = self.dim();
        let mut y = self.center;
        for k in 0..d {
            let s = u[k] / self.eigen.values[k].sqrt();
            for i in 0..d {
                y[i] += s * self.eigen.vectors[(i, k)];
            }
        }
        y
    }

    /// Whitened coordinates of `y`: `E` maps to the unit ball.
    pub fn to_unit(&self, y: &Point) -> Point {
        let d = self.dim();
        let w = *y - self.center;
        let mut u = Point::zeros(d);
        for k in 0..d {
            let mut dot = 0.0;
            for i in 0..d {
                dot += self.eigen.vectors[(i, k)] * w[i];
            }
            u[k] = dot * self.eigen.values[k].sqrt();
        }
        u
    }

    /// Same center, semi-axes multiplied by `lambda`.
    pub fn scaled(&self, lambda: f64) -> Ellipsoid {
        let k = 1.0 / (lambda * lambda);
        let mut eigen = self.eigen;
        for i in 0..self.dim() {
            eigen.values[i] *= k;
        }
        Ellipsoid {
            center: self.center,
            shape: self.shape.scale(k),
            eigen,
        }
    }

    /// Same shape about a new center.
    pub fn translated(&self, center: Point) -> Ellipsoid {
        Ellipsoid { center, ..*self }
    }

    /// `log det A^{-1}`, i.e. twice the log of the volume up to a constant.
    pub fn log_det_inverse(&self) -> f64 {
        -self.eigen.values.as_slice().iter().map(|a| a.ln()).sum::<f64>()
    }

    pub fn volume(&self) -> f64 {
        crate::capsule::unit_ball_volume(self.dim()) * (0.5 * self.log_det_inverse()).exp()
    }

    /// Half-widths of the axis-aligned bounding box.
    pub fn half_widths(&self) -> Point {
        let p = self.inverse_shape();
        let mut h = Point::zeros(self.dim());
        for k in 0..self.dim() {
            h[k] = p[(k, k)].max(0.0).sqrt();
        }
        h
    }

    /// Euclidean distance from `p` to the ellipsoid and the closest point on it.
    pub fn closest_point(&self, p: &Point) -> (f64, Point) {
        let d = self.dim();
        let w = *p - self.center;
        let mut z = Point::zeros(d);
        for k in 0..d {
            z[k] = self.eigen.vectors.column(k).dot(&w);
        }
        let a = self.eigen.values;
        let inside: f64 = (0..d).map(|k| a[k] * z[k] * z[k]).sum();
        if inside <= 1.0 {
            return (0.0, *p);
        }
        // Solve Σ a_k z_k² / (1 + μ a_k)² = 1; Newton from μ = 0 increases monotonically.
        let mut mu = 0.0f64;
        for _ in 0..200 {
            let mut f = -1.0;
            let mut df = 0.0;
            for k in 0..d {
                let den = 1.0 + mu * a[k];
                let q = a[k] * z[k] * z[k] / (den * den);
                f += q;
                df -= 2.0 * q * a[k] / den;
            }
            if f <= 1e-15 || df == 0.0 {
                break;
            }
            let step = -f / df;
            mu += step;
            if step <= 1e-16 * mu {
                break;
            }
        }
        let mut y = self.center;
        for k in 0..d {
            y = y.offset(&self.eigen.vectors.column(k), z[k] / (1.0 + mu * a[k]));
        }
        (p.dist(&y), y)
    }

    /// Support function `max_{y ∈ E} <w, y - c>`.
    pub fn support(&self, w: &Point) -> f64 {
        self.inverse_shape().quad_form(w).max(0.0).sqrt()
    }

    pub fn sample_boundary<R: Rng + ?Sized>(&self, rng: &mut R) -> Point {
        self.from_unit(&random_unit(self.dim(), rng))
    }

    pub fn sample_interior<R: Rng + ?Sized>(&self, rng: &mut R) -> Point {
        let d = self.dim();
        let u = random_unit(d, rng);
        let radius: f64 = rng.random::<f64>().powf(1.0 / d as f64);
        self.from_unit(&(u * radius))
    }
}

pub(crate) fn random_unit<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Point {
    loop {
        let mut g = Point::zeros(d);
        for k in 0..d {
            g[k] = rng.sample(StandardNormal);
        }
        if let Some(u) = g.normalized() {
            return u;
        }
    }
}

#[derive(Serialize, Deserialize)]
struct EllipsoidRepr {
    center: Point,
    shape: Mat,
}

impl Serialize for Ellipsoid {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        EllipsoidRepr {
            center: self.center,
            shape: self.shape,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Ellipsoid {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = EllipsoidRepr::deserialize(d)?;
        Ellipsoid::try_new(r.center, r.shape).map_err(serde::de::Error::custom)
    }
}

/// `λ_max(L^T M L) / t^2` for a constraint concentric with `E`.
pub fn containment_ratio(e: &Ellipsoid, c: &ConcentricConstraint) -> f64 {
    let l = e.factor();
    let m = c.matrix_form(e.dim());
    m.congruence(&l).max_eigenvalue() / (c.threshold * c.threshold)
}

/// Exact test that `E ⊆ {y : (y-x)^T M (y-x) <= t^2}` for the shared center `x`.
/// Ratios within the boundary band count as not contained.
pub fn concentric_containment(e: &Ellipsoid, center: &Point, m: &Mat, t: f64) -> Result<bool> {
    check_dims(e.dim(), center.dim())?;
    if e.center.dist(center) > 1e-12 * (1.0 + center.norm()) {
        return Err(Error::Usage("ellipsoid and constraint are not concentric".into()));
    }
    let l = e.factor();
    let top = m.congruence(&l).max_eigenvalue();
    Ok(top <= t * t * (1.0 - TOL.boundary))
}

/// Minimum of `E2`'s quadratic form over `E1`.
pub fn min_form_over(e1: &Ellipsoid, e2: &Ellipsoid) -> f64 {
    let l = e1.factor();
    let dc = e1.center - e2.center;
    let m = e2.shape.congruence(&l);
    let g = l.tr_mul_vec(&e2.shape.mul_vec(&dc));
    let c0 = e2.shape.quad_form(&dc);
    let eig = m.sym_eigen();
    let d = e1.dim();
    let gh = eig.vectors.tr_mul_vec(&g);
    let mv = eig.values;
    let norm_at = |nu: f64| -> f64 {
        let mut s = 0.0;
        for k in 0..d {
            let q = gh[k] / (mv[k] + nu);
            s += q * q;
        }
        s.sqrt()
    };
    let value_at = |nu: f64| -> f64 {
        let mut f = c0;
        for k in 0..d {
            let u = -gh[k] / (mv[k] + nu);
            f += mv[k] * u * u + 2.0 * gh[k] * u;
        }
        f
    };
    if norm_at(0.0) <= 1.0 {
        return value_at(0.0).max(0.0);
    }
    // Newton on 1/|u(ν)| - 1, which is concave and increasing in ν.
    let mut nu = 0.0;
    for _ in 0..200 {
        let n = norm_at(nu);
        let psi = 1.0 / n - 1.0;
        if psi.abs() < 1e-15 {
            break;
        }
        let mut s3 = 0.0;
        for k in 0..d {
            let den = mv[k] + nu;
            s3 += gh[k] * gh[k] / (den * den * den);
        }
        let step = -psi * n * n * n / s3;
        nu += step;
        if step.abs() <= 1e-16 * nu.max(1e-300) {
            break;
        }
    }
    value_at(nu).max(0.0)
}

/// True when the closed ellipsoids are disjoint; touching counts as intersecting.
pub fn ellipsoids_disjoint(e1: &Ellipsoid, e2: &Ellipsoid) -> bool {
    let gap = e1.center.dist(&e2.center);
    if gap > (e1.max_semi_axis() + e2.max_semi_axis()) * (1.0 + 1e-9) {
        return true;
    }
    if gap <= e1.min_semi_axis() + e2.min_semi_axis() {
        return false;
    }
    let thr = 1.0 + TOL.boundary;
    min_form_over(e1, e2) > thr && min_form_over(e2, e1) > thr
}

/// Constraint set after discarding those implied by others.
struct Reduced {
    rho: f64,
    /// `(axis, t / rho)` for cylinders tighter than the smallest ball.
    cylinders: Vec<(Point, f64)>,
}

fn reduce(cap: &Capsule) -> Reduced {
    let rho = cap.bounding_radius();
    let mut cylinders: Vec<(Point, f64)> = Vec::new();
    for c in &cap.constraints {
        if c.kind != ConstraintKind::Cylinder || c.threshold >= rho {
            continue;
        }
        let v = c.axis.unwrap();
        let tau = c.threshold / rho;
        match cylinders.iter_mut().find(|(w, _)| w.dot(&v).abs() > 1.0 - 1e-12) {
            Some(slot) => slot.1 = slot.1.min(tau),
            None => cylinders.push((v, tau)),
        }
    }
    Reduced { rho, cylinders }
}

/// Log-barrier objective pieces for the normalized problem
/// `max log det P  s.t.  P <= I,  U_j^T P U_j <= tau_j^2 I`.
struct Barrier {
    d: usize,
    bases: Vec<Vec<Point>>,
    taus: Vec<f64>,
}

struct BarrierEval {
    value: f64,
    p_inv: Mat,
    b: Mat,
    cs: Vec<Mat>,
}

impl Barrier {
    fn new(red: &Reduced, d: usize) -> Self {
        Self {
            d,
            bases: red.cylinders.iter().map(|(v, _)| orthonormal_complement(v)).collect(),
            taus: red.cylinders.iter().map(|(_, t)| *t).collect(),
        }
    }

    fn slack(&self, p: &Mat, j: usize) -> Mat {
        let u = &self.bases[j];
        let m = self.d - 1;
        let tau2 = self.taus[j] * self.taus[j];
        let mut s = Mat::zeros(m);
        let pu: Vec<Point> = u.iter().map(|c| p.mul_vec(c)).collect();
        for a in 0..m {
            for b in 0..m {
                s[(a, b)] = if a == b { tau2 } else { 0.0 } - u[a].dot(&pu[b]);
            }
        }
        s
    }

    fn log_det_p(&self, p: &Mat) -> Option<f64> {
        p.spd_log_det()
    }

    fn feasible_value(&self, p: &Mat, mu: f64) -> Option<f64> {
        let mut v = self.log_det_p(p)?;
        v += mu * Mat::identity(self.d).sub(p).spd_log_det()?;
        for j in 0..self.taus.len() {
            v += mu * self.slack(p, j).spd_log_det()?;
        }
        Some(v)
    }

    fn eval(&self, p: &Mat, mu: f64) -> Option<BarrierEval> {
        let value = self.feasible_value(p, mu)?;
        let p_inv = p.spd_inverse()?;
        let b = Mat::identity(self.d).sub(p).spd_inverse()?;
        let mut cs = Vec::with_capacity(self.taus.len());
        for j in 0..self.taus.len() {
            let s_inv = self.slack(p, j).spd_inverse()?;
            let u = &self.bases[j];
            let mut c = Mat::zeros(self.d);
            for a in 0..u.len() {
                for bb in 0..u.len() {
                    let w = s_inv[(a, bb)];
                    if w != 0.0 {
                        c = c.add(&Mat::outer(&u[a], &u[bb]).scale(w));
                    }
                }
            }
            cs.push(c.symmetrized());
        }
        Some(BarrierEval { value, p_inv, b, cs })
    }

    /// One damped Newton step; returns the new iterate and the Newton decrement.
    fn newton_step(&self, p: &Mat, mu: f64) -> Option<(Mat, f64)> {
        let d = self.d;
        let ev = self.eval(p, mu)?;
        let mut grad = ev.p_inv.sub(&ev.b.scale(mu));
        for c in &ev.cs {
            grad = grad.sub(&c.scale(mu));
        }
        let n = d * d;
        let mut k = vec![0.0; n * n];
        let mut add_kron = |m: &Mat, w: f64| {
            for i in 0..d {
                for j in 0..d {
                    let row = i * d + j;
                    for a in 0..d {
                        let mia = m[(i, a)] * w;
                        if mia == 0.0 {
                            continue;
                        }
                        for b in 0..d {
                            k[row * n + a * d + b] += mia * m[(j, b)];
                        }
                    }
                }
            }
        };
        add_kron(&ev.p_inv, 1.0);
        add_kron(&ev.b, mu);
        for c in &ev.cs {
            add_kron(c, mu);
        }
        let mut rhs: Vec<f64> = (0..n).map(|idx| grad[(idx / d, idx % d)]).collect();
        let g0 = rhs.clone();
        if !dense_spd_solve(n, &mut k, &mut rhs) {
            return None;
        }
        let mut x = Mat::zeros(d);
        for idx in 0..n {
            x[(idx / d, idx % d)] = rhs[idx];
        }
        let x = x.symmetrized();
        let dec: f64 = g0.iter().zip(&rhs).map(|(a, b)| a * b).sum();
        if !(dec > 0.0) {
            return Some((*p, 0.0));
        }
        let mut step = 1.0;
        for _ in 0..60 {
            let cand = p.add(&x.scale(step));
            if let Some(v) = self.feasible_value(&cand, mu) {
                if v >= ev.value + 0.25 * step * dec {
                    return Some((cand, dec));
                }
            }
            step *= 0.5;
        }
        Some((*p, 0.0))
    }
}

/// Result of the inscribed-ellipsoid solver including the accepted log-det trace.
#[derive(Clone, Debug)]
pub struct InscribedSolve {
    pub ellipsoid: Ellipsoid,
    /// `log det P` of each accepted outer iterate, normalized by the smallest ball.
    pub trace: Vec<f64>,
    pub initial_log_det: f64,
}

/// Largest-volume concentric ellipsoid found inside `C^λ`, certified inside
/// every constraint.
pub fn inscribed_ellipsoid(cap: &Capsule, lambda: f64) -> Ellipsoid {
    inscribed_ellipsoid_traced(cap, lambda).ellipsoid
}

pub fn inscribed_ellipsoid_traced(cap: &Capsule, lambda: f64) -> InscribedSolve {
    let d = cap.dim();
    let red = reduce(cap);
    let (p_norm, trace, initial) = match red.cylinders.len() {
        0 => (Mat::identity(d), vec![0.0], 0.0),
        1 => {
            let (v, tau) = red.cylinders[0];
            let vv = Mat::outer(&v, &v);
            let p = vv.add(&Mat::identity(d).sub(&vv).scale(tau * tau));
            let ld = p.spd_log_det().unwrap_or(f64::NEG_INFINITY);
            (p, vec![ld], ld)
        }
        _ => barrier_solve(&red, d),
    };
    let scale = red.rho * red.rho;
    let mut p = p_norm.scale(scale).symmetrized();
    // Certify against the full constraint list and pull back into the interior.
    let margin = 1.0 - 2.0 * TOL.boundary;
    let mut e = Ellipsoid::from_inverse_shape(cap.center, &p).expect("positive definite");
    for _ in 0..20 {
        let worst = cap
            .constraints
            .iter()
            .map(|c| containment_ratio(&e, c))
            .fold(0.0f64, f64::max);
        if worst <= margin {
            break;
        }
        p = p.scale(margin / worst * (1.0 - 1e-12));
        e = Ellipsoid::from_inverse_shape(cap.center, &p).expect("positive definite");
    }
    let e = if lambda == 1.0 { e } else { e.scaled(lambda) };
    InscribedSolve {
        ellipsoid: e,
        trace,
        initial_log_det: initial,
    }
}

/// Constraint-tensor initializer `{u : u^T (Σ M_j / t_j^2) u <= 1}` scaled to touch.
fn tensor_initializer(red: &Reduced, d: usize) -> Mat {
    let mut h = Mat::identity(d);
    for (v, tau) in &red.cylinders {
        let m = Mat::identity(d).sub(&Mat::outer(v, v));
        h = h.add(&m.scale(1.0 / (tau * tau)));
    }
    let p = h.spd_inverse().expect("constraint tensor is positive definite");
    fit_to_constraints(red, &p)
}

fn fit_to_constraints(red: &Reduced, p: &Mat) -> Mat {
    let d = p.dim();
    let mut worst = p.max_eigenvalue();
    for (v, tau) in &red.cylinders {
        let m = Mat::identity(d).sub(&Mat::outer(v, v));
        worst = worst.max(m.mul(p).mul(&m).max_eigenvalue() / (tau * tau));
    }
    p.scale(1.0 / worst)
}

fn barrier_solve(red: &Reduced, d: usize) -> (Mat, Vec<f64>, f64) {
    let tau_min = red.cylinders.iter().map(|c| c.1).fold(1.0f64, f64::min);
    let ball = Mat::scaled_identity(d, tau_min * tau_min);
    let tensor = tensor_initializer(red, d);
    let ld_ball = ball.spd_log_det().unwrap();
    let ld_tensor = tensor.spd_log_det().unwrap_or(f64::NEG_INFINITY);
    let (init, init_ld) = if ld_tensor >= ld_ball { (tensor, ld_tensor) } else { (ball, ld_ball) };

    let barrier = Barrier::new(red, d);
    let mut p = init.scale(0.25);
    let mut best = init;
    let mut best_ld = init_ld;
    let mut trace = vec![init_ld];
    let mut mu = 1.0;
    let m_total = (d + red.cylinders.len() * (d - 1)) as f64;
    for _stage in 0..40 {
        for _ in 0..60 {
            match barrier.newton_step(&p, mu) {
                Some((next, dec)) => {
                    p = next;
                    if dec < 1e-10 {
                        break;
                    }
                }
                None => break,
            }
        }
        let ld = p.spd_log_det().unwrap_or(f64::NEG_INFINITY);
        if ld >= best_ld {
            let gain = ld - best_ld;
            best = p;
            best_ld = ld;
            trace.push(ld);
            if gain < 1e-8 * best_ld.abs().max(1.0) && mu * m_total < 1e-8 {
                break;
            }
        }
        if mu * m_total < 1e-11 {
            break;
        }
        mu /= 8.0;
    }
    (best, trace, init_ld)
}

/// `E' = E^{λ'}(x, r)` and `E'' = E' · λ''/λ'` about `x`.
pub fn proxy_pair(
    set: &SegmentSet,
    x: &Point,
    r: f64,
    consts: &ScaleConstants,
) -> Result<(Ellipsoid, Ellipsoid)> {
    check_dims(set.dim, x.dim())?;
    let cap = capsule_unchecked(set, x, r);
    if !(cap.min_threshold() > 0.0) {
        return Err(Error::SingularTensor("capsule has a zero threshold".into()));
    }
    let unit = inscribed_ellipsoid(&cap, 1.0);
    Ok(proxies_from_unit(&unit, consts))
}

pub(crate) fn proxies_from_unit(unit: &Ellipsoid, consts: &ScaleConstants) -> (Ellipsoid, Ellipsoid) {
    let outer = unit.scaled(consts.lambda_prime);
    let inner = outer.scaled(consts.lambda_double_prime / consts.lambda_prime);
    (outer, inner)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::capsule::build_capsule;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn p(c: &[f64]) -> Point {
        Point::new(c)
    }

    #[test]
    fn point_membership() {
        let e = Ellipsoid::new(p(&[5.0, 1.0]), Mat::diag(&[1.0 / 26.0, 1.0]));
        assert!(e.contains(&p(&[5.0, 1.0])));
        assert!(e.contains(&p(&[5.0 + 26f64.sqrt(), 1.0])));
        assert!(!e.contains(&p(&[5.0, 2.1])));
        let b = Ellipsoid::ball(p(&[0.0, 0.0]), 1.0);
        assert!(b.contains(&p(&[0.0, 1.0])));
    }

    #[test]
    fn containment_examples() {
        let o = p(&[0.0, 0.0]);
        let unit = Ellipsoid::ball(o, 1.0);
        assert!(concentric_containment(&unit, &o, &Mat::identity(2), 2.0).unwrap());
        let cyl = Mat::diag(&[0.0, 1.0]);
        let long = Ellipsoid::new(o, Mat::diag(&[1.0 / 9.0, 1.0]));
        assert!(concentric_containment(&long, &o, &cyl, 2.0).unwrap());
        let tall = Ellipsoid::new(o, Mat::diag(&[1.0, 1.0 / 9.0]));
        assert!(!concentric_containment(&tall, &o, &cyl, 2.0).unwrap());
        assert!(concentric_containment(&unit, &p(&[1.0, 0.0]), &cyl, 2.0).is_err());
    }

    #[test]
    fn disjointness_examples() {
        let a = Ellipsoid::ball(p(&[0.0, 0.0]), 1.0);
        assert!(ellipsoids_disjoint(&a, &Ellipsoid::ball(p(&[3.0, 0.0]), 1.0)));
        assert!(!ellipsoids_disjoint(&a, &a));
        assert!(!ellipsoids_disjoint(&a, &Ellipsoid::ball(p(&[2.0, 0.0]), 1.0)));
        // Long thin ellipses crossing at right angles away from their centers.
        let h = Ellipsoid::new(p(&[0.0, 0.0]), Mat::diag(&[1.0 / 100.0, 4.0]));
        let v = Ellipsoid::new(p(&[6.0, 6.0]), Mat::diag(&[4.0, 1.0 / 100.0]));
        assert!(!ellipsoids_disjoint(&h, &v));
        let v2 = Ellipsoid::new(p(&[6.0, 11.0]), Mat::diag(&[4.0, 1.0 / 100.0]));
        assert!(ellipsoids_disjoint(&h, &v2));
    }

    #[test]
    fn min_form_matches_sampling() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let e1 = Ellipsoid::new(p(&[0.0, 0.0, 0.0]), Mat::diag(&[1.0, 0.25, 4.0]));
        let e2 = Ellipsoid::new(p(&[2.0, 1.0, -0.5]), Mat::from_rows(&[
            vec![2.0, 0.3, 0.0],
            vec![0.3, 1.0, 0.1],
            vec![0.0, 0.1, 0.5],
        ]).unwrap());
        let exact = min_form_over(&e1, &e2);
        let mut sampled = f64::INFINITY;
        for _ in 0..200_000 {
            sampled = sampled.min(e2.form(&e1.sample_boundary(&mut rng)));
        }
        assert!(exact <= sampled + 1e-12);
        assert!(sampled - exact < 1e-2);
    }

    #[test]
    fn ball_capsule_gives_ball() {
        let cap = Capsule {
            center: p(&[1.0, 2.0]),
            r: 3.0,
            constraints: vec![ConcentricConstraint::ball(3.0, 0)],
        };
        let e = inscribed_ellipsoid(&cap, 1.0);
        for a in e.semi_axes() {
            assert!((a - 3.0).abs() < 1e-8);
        }
        let half = inscribed_ellipsoid(&cap, 0.5);
        for a in half.semi_axes() {
            assert!((a - 1.5).abs() < 1e-8);
        }
    }

    #[test]
    fn cylinder_and_ball_matches_grid_search() {
        let set = SegmentSet::new(vec![(p(&[0.0, 0.0]), p(&[10.0, 0.0]))], false).unwrap();
        let cap = build_capsule(&set, &p(&[5.0, 3.0]), 1.0).unwrap();
        let e = inscribed_ellipsoid(&cap, 1.0);
        // Grid search over axis-aligned semi-axes (a, b) with exact feasibility.
        let o = cap.center;
        let mut best = (0.0, 0.0, 0.0);
        for i in 1..=120 {
            for j in 1..=120 {
                let (a, b) = (i as f64 * 0.05, j as f64 * 0.05);
                let cand = Ellipsoid::new(o, Mat::diag(&[1.0 / (a * a), 1.0 / (b * b)]));
                let ok = cap.constraints.iter().all(|c| {
                    containment_ratio(&cand, c) <= 1.0 + 1e-12
                });
                if ok && a * b > best.2 {
                    best = (a, b, a * b);
                }
            }
        }
        let axes = e.semi_axes();
        assert!((axes[1] - 34f64.sqrt()).abs() < 1e-6);
        assert!((axes[0] - 3.0).abs() < 1e-6);
        assert!(axes[0] * axes[1] >= best.2 - 1e-9);
    }

    #[test]
    fn barrier_solution_beats_initializers_and_is_certified() {
        let set = SegmentSet::new(
            vec![
                (p(&[0.0, 0.0, 0.0]), p(&[4.0, 0.0, 0.0])),
                (p(&[2.0, -2.0, 1.0]), p(&[2.0, 2.0, 1.0])),
                (p(&[0.0, 3.0, -1.0]), p(&[3.0, 0.0, -1.0])),
            ],
            false,
        )
        .unwrap();
        let x = p(&[1.9, 0.3, 0.4]);
        let cap = build_capsule(&set, &x, 0.05).unwrap();
        let sol = inscribed_ellipsoid_traced(&cap, 1.0);
        for w in sol.trace.windows(2) {
            assert!(w[1] >= w[0]);
        }
        for c in &cap.constraints {
            assert!(containment_ratio(&sol.ellipsoid, c) <= 1.0 - TOL.boundary);
        }
        let rho = cap.bounding_radius();
        let ld = sol.ellipsoid.log_det_inverse() - d_log(rho, 3);
        assert!(ld >= sol.initial_log_det - 1e-9);
        // Metric-ball initializer from the local tensors is also inscribed.
        let tilde = crate::tensors::metric_ball(&x, &set).unwrap();
        assert!(sol.ellipsoid.log_det_inverse() >= tilde.log_det_inverse() - 1e-9);
    }

    fn d_log(rho: f64, d: usize) -> f64 {
        2.0 * d as f64 * rho.ln()
    }

    #[test]
    fn proxy_pair_scales() {
        let set = SegmentSet::new(vec![(p(&[0.0, 0.0]), p(&[1.0, 0.0])), (p(&[0.0, 5.0]), p(&[1.0, 5.0]))], false)
            .unwrap();
        let k = ScaleConstants::for_dim(2);
        let x = p(&[-3.0, -4.0]);
        let (outer, inner) = proxy_pair(&set, &x, 1.0, &k).unwrap();
        let ball = 5.0;
        for a in outer.semi_axes() {
            assert!((a - ball / 2.0).abs() < 1e-7);
        }
        for a in inner.semi_axes() {
            assert!((a - ball * 2f64.sqrt() / 14.0).abs() < 1e-7);
        }
    }
}
