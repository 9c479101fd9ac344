//! Net generators: the degenerate axis net and its transform, the
//! discrete tractrix surface of revolution.
//!
//! The axis net puts all points of column `i` on the z-axis at heights
//! `j` with horizontal radial normals at azimuth `2πi/k`. Its grid faces
//! carry no curvature, but the neighbour construction still propagates a
//! transform seeded at `(0, d, 0)`: the meridian stays in the plane
//! `x = 0` and becomes a discrete tractrix when the seed normal is
//! vertical, and consecutive columns differ by the rotation through
//! `2π/k` about the axis.

use nalgebra::Vector3;
use thiserror::Error;

use crate::backlund::{propagate, BacklundError};
use crate::geom::{GeomError, PlueckerLine};
use crate::net::{ContactElement, NetError, NetPatch};
use crate::Tol;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeneratorError {
    #[error("shape parameter k must be at least 3")]
    ShapeParameterTooSmall,
    #[error("seed distance must be positive")]
    NonPositiveDistance,
    #[error("patch must have at least one row and column")]
    EmptyPatch,
    #[error("net error: {0}")]
    Net(#[from] NetError),
    #[error("transform error: {0}")]
    Backlund(#[from] BacklundError),
    #[error("geometry error: {0}")]
    Geom(#[from] GeomError),
}

#[derive(Clone, Copy, Debug)]
pub struct AxisParams {
    /// Angular resolution: column `i` carries azimuth `2πi/k`.
    pub k: u32,
    pub rows: usize,
    pub cols: usize,
}

#[derive(Clone, Copy, Debug)]
pub struct TractrixParams {
    pub k: u32,
    /// Seed distance from the axis.
    pub d: f64,
    /// Seed normal angle; the tangent-segment length is constant for π/2.
    pub alpha: f64,
    pub rows: usize,
    pub cols: usize,
}

impl Default for TractrixParams {
    fn default() -> Self {
        TractrixParams {
            k: 12,
            d: 1.0,
            alpha: std::f64::consts::FRAC_PI_2,
            rows: 12,
            cols: 10,
        }
    }
}

/// The degenerate source net: points `(0, 0, j)`, normals
/// `(cos(2πi/k), sin(2πi/k), 0)`. All faces are collinear, so the
/// curvature is undefined, yet every edge is a principal pair.
pub fn axis_net(params: &AxisParams, tol: Tol) -> Result<NetPatch, GeneratorError> {
    if params.k < 3 {
        return Err(GeneratorError::ShapeParameterTooSmall);
    }
    if params.rows == 0 || params.cols == 0 {
        return Err(GeneratorError::EmptyPatch);
    }
    let mut elements = Vec::with_capacity(params.rows * params.cols);
    for j in 0..params.rows {
        for i in 0..params.cols {
            let ang = 2.0 * std::f64::consts::PI * i as f64 / params.k as f64;
            elements.push(ContactElement::new(
                Vector3::new(0.0, 0.0, j as f64),
                Vector3::new(ang.cos(), ang.sin(), 0.0),
            )?);
        }
    }
    Ok(NetPatch::from_elements(params.rows, params.cols, elements)?.verify_principal(tol))
}

/// Transform of the axis net seeded at `(0, d, 0)` with normal
/// `(0, cos α, sin α)`: the discrete pseudosphere of revolution.
pub fn tractrix_net(params: &TractrixParams, tol: Tol) -> Result<NetPatch, GeneratorError> {
    if params.d <= 0.0 {
        return Err(GeneratorError::NonPositiveDistance);
    }
    let source = axis_net(
        &AxisParams {
            k: params.k,
            rows: params.rows,
            cols: params.cols,
        },
        tol,
    )?;
    let seed = ContactElement::new(
        Vector3::new(0.0, params.d, 0.0),
        Vector3::new(0.0, params.alpha.cos(), params.alpha.sin()),
    )?;
    Ok(propagate(&source, &seed, tol)?)
}

/// Length of the tangent segment from the element's point to the meet of
/// its meridian tangent line with the axis. The tangent direction is the
/// in-meridian-plane direction orthogonal to the normal; the length is
/// evaluated in the radial form `r / |tangent · radial|`, which stays
/// well-conditioned when the tangent runs nearly parallel to the axis.
pub fn tangent_segment_length(
    element: &ContactElement,
    axis: &PlueckerLine,
    tol: Tol,
) -> Result<f64, GeneratorError> {
    let q = element.point();
    let axis_dir = axis.dir / axis.dir.norm();
    let radial = q - axis.point_nearest_origin();
    let radial = radial - radial.dot(&axis_dir) * axis_dir;
    let r = radial.norm();
    if r < tol.abs {
        return Err(GeneratorError::Geom(GeomError::DegenerateInput(
            "point on the axis",
        )));
    }
    let radial_dir = radial / r;
    let plane_normal = axis_dir.cross(&radial_dir);
    let tangent_dir = element.normal().cross(&plane_normal);
    let tn = tangent_dir.norm();
    if tn < tol.abs {
        return Err(GeneratorError::Geom(GeomError::DegenerateInput(
            "normal orthogonal to the meridian plane",
        )));
    }
    let inward = tangent_dir.dot(&radial_dir).abs() / tn;
    if inward < tol.abs {
        return Err(GeneratorError::Geom(GeomError::DegenerateInput(
            "tangent parallel to the axis",
        )));
    }
    Ok(r / inward)
}
