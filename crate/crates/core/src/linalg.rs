//! Small dense linear algebra on fixed-capacity vectors and matrices.
//!
//! Every geometric object in this crate lives in `R^d` with `d <= MAX_DIM`, so
//! points and matrices are stored inline (no heap allocation) and are `Copy`.

use std::fmt;
use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub, SubAssign};

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Largest supported ambient dimension.
pub const MAX_DIM: usize = 8;

/// Off-diagonal mass (relative to the Frobenius norm) at which Jacobi sweeps stop.
pub const JACOBI_THRESHOLD: f64 = 1e-13;

/// A point (or vector) in `R^d`.
#[derive(Clone, Copy)]
pub struct Point {
    dim: usize,
    coords: [f64; MAX_DIM],
}

impl Point {
    /// Builds a point from a slice. Panics if the slice is empty or longer than
    /// [`MAX_DIM`]; use [`Point::try_from_slice`] for untrusted input.
    pub fn new(coords: &[f64]) -> Self {
        Self::try_from_slice(coords).expect("point dimension out of range")
    }

    pub fn try_from_slice(coords: &[f64]) -> Option<Self> {
        if coords.is_empty() || coords.len() > MAX_DIM {
            return None;
        }
        let mut p = Self::zeros(coords.len());
        p.coords[..coords.len()].copy_from_slice(coords);
        Some(p)
    }

    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1 && dim <= MAX_DIM, "dimension {dim} out of range");
        Self {
            dim,
            coords: [0.0; MAX_DIM],
        }
    }

    /// The `k`-th standard basis vector.
    pub fn unit(dim: usize, k: usize) -> Self {
        let mut p = Self::zeros(dim);
        p.coords[k] = 1.0;
        p
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn as_slice(&self) -> &[f64] {
        &self.coords[..self.dim]
    }

    #[inline]
    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.coords[..self.dim]
    }

    #[inline]
    pub fn dot(&self, other: &Point) -> f64 {
        debug_assert_eq!(self.dim, other.dim);
        let mut s = 0.0;
        for i in 0..self.dim {
            s += self.coords[i] * other.coords[i];
        }
        s
    }

    #[inline]
    pub fn norm_sq(&self) -> f64 {
        self.dot(self)
    }

    #[inline]
    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    #[inline]
    pub fn dist(&self, other: &Point) -> f64 {
        (*self - *other).norm()
    }

    #[inline]
    pub fn dist_sq(&self, other: &Point) -> f64 {
        (*self - *other).norm_sq()
    }

    /// `self + t * dir`.
    #[inline]
    pub fn offset(&self, dir: &Point, t: f64) -> Point {
        let mut out = *self;
        for i in 0..self.dim {
            out.coords[i] += t * dir.coords[i];
        }
        out
    }

    /// Unit vector in the direction of `self`, or `None` for the zero vector.
    pub fn normalized(&self) -> Option<Point> {
        let n = self.norm();
        if n > 0.0 && n.is_finite() {
            Some(*self * (1.0 / n))
        } else {
            None
        }
    }

    pub fn is_finite(&self) -> bool {
        self.as_slice().iter().all(|c| c.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        self.as_slice().iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    pub fn to_vec(&self) -> Vec<f64> {
        self.as_slice().to_vec()
    }

    pub fn midpoint(&self, other: &Point) -> Point {
        (*self + *other) * 0.5
    }
}

impl PartialEq for Point {
    fn eq(&self, other: &Self) -> bool {
        self.as_slice() == other.as_slice()
    }
}

impl fmt::Debug for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.as_slice()).finish()
    }
}

impl Index<usize> for Point {
    type Output = f64;
    #[inline]
    fn index(&self, i: usize) -> &f64 {
        &self.as_slice()[i]
    }
}

impl IndexMut<usize> for Point {
    #[inline]
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.as_mut_slice()[i]
    }
}

impl Add for Point {
    type Output = Point;
    #[inline]
    fn add(mut self, rhs: Point) -> Point {
        debug_assert_eq!(self.dim, rhs.dim);
        for i in 0..self.dim {
            self.coords[i] += rhs.coords[i];
        }
        self
    }
}

impl AddAssign for Point {
    #[inline]
    fn add_assign(&mut self, rhs: Point) {
        *self = *self + rhs;
    }
}

impl Sub for Point {
    type Output = Point;
    #[inline]
    fn sub(mut self, rhs: Point) -> Point {
        debug_assert_eq!(self.dim, rhs.dim);
        for i in 0..self.dim {
            self.coords[i] -= rhs.coords[i];
        }
        self
    }
}

impl SubAssign for Point {
    #[inline]
    fn sub_assign(&mut self, rhs: Point) {
        *self = *self - rhs;
    }
}

impl Mul<f64> for Point {
    type Output = Point;
    #[inline]
    fn mul(mut self, s: f64) -> Point {
        for i in 0..self.dim {
            self.coords[i] *= s;
        }
        self
    }
}

impl Neg for Point {
    type Output = Point;
    #[inline]
    fn neg(self) -> Point {
        self * -1.0
    }
}

impl Serialize for Point {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.as_slice().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Point {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = Vec::<f64>::deserialize(d)?;
        Point::try_from_slice(&v)
            .ok_or_else(|| D::Error::custom(format!("point dimension {} out of range", v.len())))
    }
}

/// A square matrix of size `n <= MAX_DIM`, row-major.
#[derive(Clone, Copy)]
pub struct Mat {
    n: usize,
    data: [f64; MAX_DIM * MAX_DIM],
}

impl Mat {
    pub fn zeros(n: usize) -> Self {
        assert!(n >= 1 && n <= MAX_DIM, "dimension {n} out of range");
        Self {
            n,
            data: [0.0; MAX_DIM * MAX_DIM],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::scaled_identity(n, 1.0)
    }

    pub fn scaled_identity(n: usize, s: f64) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = s;
        }
        m
    }

    pub fn diag(values: &[f64]) -> Self {
        let mut m = Self::zeros(values.len());
        for (i, v) in values.iter().enumerate() {
            m[(i, i)] = *v;
        }
        m
    }

    /// Builds a matrix from rows; `None` if the rows are ragged or the size is
    /// unsupported.
    pub fn from_rows(rows: &[Vec<f64>]) -> Option<Self> {
        let n = rows.len();
        if n == 0 || n > MAX_DIM || rows.iter().any(|r| r.len() != n) {
            return None;
        }
        let mut m = Self::zeros(n);
        for (i, r) in rows.iter().enumerate() {
            for (j, v) in r.iter().enumerate() {
                m[(i, j)] = *v;
            }
        }
        Some(m)
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self[(i, j)]).collect())
            .collect()
    }

    /// `u v^T`.
    pub fn outer(u: &Point, v: &Point) -> Self {
        let n = u.dim();
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = u[i] * v[j];
            }
        }
        m
    }

    /// Builds the matrix whose columns are the given vectors (must be square).
    pub fn from_columns(cols: &[Point]) -> Self {
        let n = cols.len();
        let mut m = Self::zeros(n);
        for (j, c) in cols.iter().enumerate() {
            assert_eq!(c.dim(), n);
            for i in 0..n {
                m[(i, j)] = c[i];
            }
        }
        m
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn column(&self, j: usize) -> Point {
        let mut p = Point::zeros(self.n);
        for i in 0..self.n {
            p[i] = self[(i, j)];
        }
        p
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn mul_vec(&self, v: &Point) -> Point {
        debug_assert_eq!(self.n, v.dim());
        let mut out = Point::zeros(self.n);
        for i in 0..self.n {
            let mut s = 0.0;
            for j in 0..self.n {
                s += self.data[i * MAX_DIM + j] * v[j];
            }
            out[i] = s;
        }
        out
    }

    /// `M^T v`.
    pub fn tr_mul_vec(&self, v: &Point) -> Point {
        let mut out = Point::zeros(self.n);
        for j in 0..self.n {
            let mut s = 0.0;
            for i in 0..self.n {
                s += self.data[i * MAX_DIM + j] * v[i];
            }
            out[j] = s;
        }
        out
    }

    pub fn mul(&self, other: &Mat) -> Mat {
        debug_assert_eq!(self.n, other.n);
        let n = self.n;
        let mut out = Mat::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * MAX_DIM + k];
                if a == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out.data[i * MAX_DIM + j] += a * other.data[k * MAX_DIM + j];
                }
            }
        }
        out
    }

    /// `B^T self B`.
    pub fn congruence(&self, b: &Mat) -> Mat {
        b.transpose().mul(&self.mul(b))
    }

    pub fn add(&self, other: &Mat) -> Mat {
        let mut out = *self;
        for i in 0..self.n {
            for j in 0..self.n {
                out.data[i * MAX_DIM + j] += other.data[i * MAX_DIM + j];
            }
        }
        out
    }

    pub fn sub(&self, other: &Mat) -> Mat {
        self.add(&other.scale(-1.0))
    }

    pub fn scale(&self, s: f64) -> Mat {
        let mut out = *self;
        for i in 0..self.n {
            for j in 0..self.n {
                out.data[i * MAX_DIM + j] *= s;
            }
        }
        out
    }

    /// `v^T M v`.
    #[inline]
    pub fn quad_form(&self, v: &Point) -> f64 {
        let n = self.n;
        let mut s = 0.0;
        for i in 0..n {
            let mut row = 0.0;
            for j in 0..n {
                row += self.data[i * MAX_DIM + j] * v[j];
            }
            s += v[i] * row;
        }
        s
    }

    /// `(y - c)^T M (y - c)` without materializing the difference twice.
    #[inline]
    pub fn quad_form_at(&self, y: &Point, c: &Point) -> f64 {
        self.quad_form(&(*y - *c))
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius(&self) -> f64 {
        let mut s = 0.0;
        for i in 0..self.n {
            for j in 0..self.n {
                s += self[(i, j)] * self[(i, j)];
            }
        }
        s.sqrt()
    }

    pub fn max_abs_diff(&self, other: &Mat) -> f64 {
        let mut m: f64 = 0.0;
        for i in 0..self.n {
            for j in 0..self.n {
                m = m.max((self[(i, j)] - other[(i, j)]).abs());
            }
        }
        m
    }

    /// Symmetric part `(M + M^T)/2`.
    pub fn symmetrized(&self) -> Mat {
        self.add(&self.transpose()).scale(0.5)
    }

    pub fn is_finite(&self) -> bool {
        (0..self.n).all(|i| (0..self.n).all(|j| self[(i, j)].is_finite()))
    }

    /// Lower Cholesky factor of a symmetric positive-definite matrix.
    pub fn cholesky(&self) -> Option<Mat> {
        let n = self.n;
        let mut l = Mat::zeros(n);
        for j in 0..n {
            let mut d = self[(j, j)];
            for k in 0..j {
                d -= l[(j, k)] * l[(j, k)];
            }
            if !(d > 0.0) || !d.is_finite() {
                return None;
            }
            let d = d.sqrt();
            l[(j, j)] = d;
            for i in (j + 1)..n {
                let mut s = self[(i, j)];
                for k in 0..j {
                    s -= l[(i, k)] * l[(j, k)];
                }
                l[(i, j)] = s / d;
            }
        }
        Some(l)
    }

    /// Inverse of a symmetric positive-definite matrix via Cholesky.
    pub fn spd_inverse(&self) -> Option<Mat> {
        let l = self.cholesky()?;
        let n = self.n;
        let mut inv = Mat::zeros(n);
        for col in 0..n {
            let e = Point::unit(n, col);
            let x = cholesky_solve(&l, &e);
            for i in 0..n {
                inv[(i, col)] = x[i];
            }
        }
        Some(inv.symmetrized())
    }

    /// `log det` of a symmetric positive-definite matrix.
    pub fn spd_log_det(&self) -> Option<f64> {
        let l = self.cholesky()?;
        Some((0..self.n).map(|i| 2.0 * l[(i, i)].ln()).sum())
    }

    /// Solves `M x = b` by Gaussian elimination with partial pivoting.
    pub fn solve(&self, b: &Point) -> Option<Point> {
        let n = self.n;
        let mut a = *self;
        let mut x = *b;
        let scale = self.frobenius().max(f64::MIN_POSITIVE);
        for col in 0..n {
            let piv = (col..n)
                .max_by(|&i, &j| a[(i, col)].abs().total_cmp(&a[(j, col)].abs()))
                .unwrap();
            if a[(piv, col)].abs() <= 1e-14 * scale {
                return None;
            }
            if piv != col {
                for k in 0..n {
                    let tmp = a[(col, k)];
                    a[(col, k)] = a[(piv, k)];
                    a[(piv, k)] = tmp;
                }
                x.as_mut_slice().swap(col, piv);
            }
            for i in (col + 1)..n {
                let f = a[(i, col)] / a[(col, col)];
                if f == 0.0 {
                    continue;
                }
                for k in col..n {
                    a[(i, k)] -= f * a[(col, k)];
                }
                x[i] -= f * x[col];
            }
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for k in (i + 1)..n {
                s -= a[(i, k)] * x[k];
            }
            x[i] = s / a[(i, i)];
        }
        Some(x)
    }

    /// Symmetric eigendecomposition by cyclic Jacobi rotations.
    ///
    /// Eigenvalues are returned in ascending order; `vectors` holds the matching
    /// unit eigenvectors as columns, so `self = V diag(values) V^T`.
    pub fn sym_eigen(&self) -> SymEigen {
        let n = self.n;
        let mut a = self.symmetrized();
        let mut v = Mat::identity(n);
        let total = a.frobenius();
        if total > 0.0 {
            for _sweep in 0..64 {
                let mut off = 0.0;
                for p in 0..n {
                    for q in (p + 1)..n {
                        off += 2.0 * a[(p, q)] * a[(p, q)];
                    }
                }
                if off.sqrt() <= JACOBI_THRESHOLD * total {
                    break;
                }
                for p in 0..n {
                    for q in (p + 1)..n {
                        let apq = a[(p, q)];
                        if apq == 0.0 {
                            continue;
                        }
                        let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                        let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                        let c = 1.0 / (t * t + 1.0).sqrt();
                        let s = t * c;
                        for k in 0..n {
                            let akp = a[(k, p)];
                            let akq = a[(k, q)];
                            a[(k, p)] = c * akp - s * akq;
                            a[(k, q)] = s * akp + c * akq;
                        }
                        for k in 0..n {
                            let apk = a[(p, k)];
                            let aqk = a[(q, k)];
                            a[(p, k)] = c * apk - s * aqk;
                            a[(q, k)] = s * apk + c * aqk;
                        }
                        a[(p, q)] = 0.0;
                        a[(q, p)] = 0.0;
                        for k in 0..n {
                            let vkp = v[(k, p)];
                            let vkq = v[(k, q)];
                            v[(k, p)] = c * vkp - s * vkq;
                            v[(k, q)] = s * vkp + c * vkq;
                        }
                    }
                }
            }
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| a[(i, i)].total_cmp(&a[(j, j)]));
        let mut values = Point::zeros(n);
        let mut vectors = Mat::zeros(n);
        for (dst, &src) in order.iter().enumerate() {
            values[dst] = a[(src, src)];
            for k in 0..n {
                vectors[(k, dst)] = v[(k, src)];
            }
        }
        SymEigen { values, vectors }
    }

    /// Largest eigenvalue of a symmetric matrix.
    pub fn max_eigenvalue(&self) -> f64 {
        if self.n == 1 {
            return self[(0, 0)];
        }
        if self.n == 2 {
            let (a, b, d) = (self[(0, 0)], 0.5 * (self[(0, 1)] + self[(1, 0)]), self[(1, 1)]);
            let mean = 0.5 * (a + d);
            let rad = (0.25 * (a - d) * (a - d) + b * b).sqrt();
            return mean + rad;
        }
        let e = self.sym_eigen();
        e.values[self.n - 1]
    }
}

impl Index<(usize, usize)> for Mat {
    type Output = f64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        debug_assert!(i < self.n && j < self.n);
        &self.data[i * MAX_DIM + j]
    }
}

impl IndexMut<(usize, usize)> for Mat {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        debug_assert!(i < self.n && j < self.n);
        &mut self.data[i * MAX_DIM + j]
    }
}

impl PartialEq for Mat {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n
            && (0..self.n).all(|i| (0..self.n).all(|j| self[(i, j)] == other[(i, j)]))
    }
}

impl fmt::Debug for Mat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.to_rows()).finish()
    }
}

impl Serialize for Mat {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.to_rows().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Mat {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let rows = Vec::<Vec<f64>>::deserialize(d)?;
        Mat::from_rows(&rows).ok_or_else(|| D::Error::custom("matrix must be square with 1..=8 rows"))
    }
}

/// Result of [`Mat::sym_eigen`].
#[derive(Clone, Copy, Debug)]
pub struct SymEigen {
    pub values: Point,
    pub vectors: Mat,
}

impl SymEigen {
    /// Rebuilds `V f(D) V^T` for a spectral function `f`.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Mat {
        let n = self.values.dim();
        let mut out = Mat::zeros(n);
        for k in 0..n {
            let w = f(self.values[k]);
            let col = self.vectors.column(k);
            out = out.add(&Mat::outer(&col, &col).scale(w));
        }
        out.symmetrized()
    }
}

/// Solves `L L^T x = b` given the lower Cholesky factor.
pub fn cholesky_solve(l: &Mat, b: &Point) -> Point {
    let n = l.dim();
    let mut y = *b;
    for i in 0..n {
        let mut s = y[i];
        for k in 0..i {
            s -= l[(i, k)] * y[k];
        }
        y[i] = s / l[(i, i)];
    }
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in (i + 1)..n {
            s -= l[(k, i)] * y[k];
        }
        y[i] = s / l[(i, i)];
    }
    y
}

/// An orthonormal basis of the complement of the unit vector `v`, returned as
/// `d - 1` vectors.
pub fn orthonormal_complement(v: &Point) -> Vec<Point> {
    let d = v.dim();
    let mut basis: Vec<Point> = Vec::with_capacity(d - 1);
    // Start from the standard basis vectors least aligned with v.
    let mut axes: Vec<usize> = (0..d).collect();
    axes.sort_by(|&i, &j| v[i].abs().total_cmp(&v[j].abs()));
    for &k in &axes {
        if basis.len() == d - 1 {
            break;
        }
        let mut w = Point::unit(d, k);
        w = w.offset(v, -w.dot(v));
        for b in &basis {
            w = w.offset(b, -w.dot(b));
        }
        if let Some(u) = w.normalized() {
            if w.norm() > 1e-8 {
                basis.push(u);
            }
        }
    }
    basis
}

/// Dense row-major square system solved by Cholesky; used for the Newton
/// systems in the ellipsoid solver whose size is `d^2`.
pub(crate) fn dense_spd_solve(n: usize, a: &mut [f64], b: &mut [f64]) -> bool {
    for j in 0..n {
        let mut d = a[j * n + j];
        for k in 0..j {
            d -= a[j * n + k] * a[j * n + k];
        }
        if !(d > 0.0) || !d.is_finite() {
            return false;
        }
        let d = d.sqrt();
        a[j * n + j] = d;
        for i in (j + 1)..n {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= a[i * n + k] * a[j * n + k];
            }
            a[i * n + j] = s / d;
        }
    }
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= a[i * n + k] * b[k];
        }
        b[i] = s / a[i * n + i];
    }
    for i in (0..n).rev() {
        let mut s = b[i];
        for k in (i + 1)..n {
            s -= a[k * n + i] * b[k];
        }
        b[i] = s / a[i * n + i];
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    fn approx(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
    }

    #[test]
    fn jacobi_reconstructs_matrix() {
        let m = Mat::from_rows(&[
            vec![4.0, 1.0, -2.0],
            vec![1.0, 3.0, 0.5],
            vec![-2.0, 0.5, 6.0],
        ])
        .unwrap();
        let e = m.sym_eigen();
        let back = e.map(|x| x);
        assert!(back.max_abs_diff(&m) < 1e-12);
        assert!(e.values[0] <= e.values[1] && e.values[1] <= e.values[2]);
        let vt_v = e.vectors.transpose().mul(&e.vectors);
        assert!(vt_v.max_abs_diff(&Mat::identity(3)) < 1e-12);
    }

    #[test]
    fn two_by_two_max_eigen_matches_jacobi() {
        let m = Mat::from_rows(&[vec![2.0, 0.7], vec![0.7, -1.0]]).unwrap();
        assert!(approx(m.max_eigenvalue(), m.sym_eigen().values[1], 1e-14));
    }

    #[test]
    fn spd_inverse_and_logdet() {
        let m = Mat::from_rows(&[vec![2.0, 0.5], vec![0.5, 1.0]]).unwrap();
        let inv = m.spd_inverse().unwrap();
        assert!(inv.mul(&m).max_abs_diff(&Mat::identity(2)) < 1e-14);
        assert!(approx(m.spd_log_det().unwrap(), (2.0f64 - 0.25).ln(), 1e-14));
        assert!(Mat::diag(&[1.0, -1.0]).cholesky().is_none());
    }

    #[test]
    fn gaussian_solve() {
        let m = Mat::from_rows(&[vec![0.0, 2.0], vec![3.0, 1.0]]).unwrap();
        let x = m.solve(&Point::new(&[4.0, 5.0])).unwrap();
        assert!(approx(x[0], 1.0, 1e-14) && approx(x[1], 2.0, 1e-14));
        let singular = Mat::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]).unwrap();
        assert!(singular.solve(&Point::new(&[1.0, 1.0])).is_none());
    }

    #[test]
    fn complement_is_orthonormal() {
        let v = Point::new(&[1.0, 2.0, -0.5]).normalized().unwrap();
        let basis = orthonormal_complement(&v);
        assert_eq!(basis.len(), 2);
        for (i, b) in basis.iter().enumerate() {
            assert!(b.dot(&v).abs() < 1e-14);
            assert!((b.norm() - 1.0).abs() < 1e-14);
            for c in &basis[i + 1..] {
                assert!(b.dot(c).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn dense_solver() {
        let mut a = vec![4.0, 1.0, 1.0, 3.0];
        let mut b = vec![1.0, 2.0];
        assert!(dense_spd_solve(2, &mut a, &mut b));
        assert!(approx(4.0 * b[0] + b[1], 1.0, 1e-14));
        assert!(approx(b[0] + 3.0 * b[1], 2.0, 1e-14));
    }
}
