/// Numerical tolerances used by geometric predicates.
///
/// `rel` bounds relative residuals of geometric predicates, `abs` bounds
/// absolute residuals on unit-scaled homogeneous vectors. `twist_rel` is a
/// looser bound for comparing twists, which compound a distance and an
/// angle measurement.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tol {
    pub rel: f64,
    pub abs: f64,
    pub twist_rel: f64,
}

impl Default for Tol {
    fn default() -> Self {
        Tol {
            rel: 1e-9,
            abs: 1e-12,
            twist_rel: 1e-7,
        }
    }
}

impl Tol {
    /// Tolerance with a custom relative epsilon; the other bounds keep
    /// their defaults.
    pub fn with_rel(rel: f64) -> Self {
        Tol {
            rel,
            ..Tol::default()
        }
    }
}
