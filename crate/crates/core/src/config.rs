//! Numerical tolerances shared by every module.

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    /// Absolute slack for distance comparisons.
    pub abs: f64,
    /// Relative slack on quadratic membership forms (`form <= 1 + membership`).
    pub membership: f64,
    /// Eigenvalue accuracy assumed by containment decisions.
    pub eigen: f64,
    /// Decisions within this relative band of a boundary resolve to "not contained".
    pub boundary: f64,
    /// Relative determinant below which two segment directions count as parallel.
    pub parallel: f64,
}

pub const TOL: Tolerances = Tolerances {
    abs: 1e-9,
    membership: 1e-12,
    eigen: 1e-11,
    boundary: 1e-9,
    parallel: 1e-12,
};

impl Default for Tolerances {
    fn default() -> Self {
        TOL
    }
}
