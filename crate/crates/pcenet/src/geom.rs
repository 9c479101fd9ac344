//! Homogeneous projective geometry kernel.
//!
//! Points and planes are homogeneous 4-vectors with the incidence pairing
//! `u0*x0 + u.x = 0`; a vanishing first coordinate marks an ideal point
//! (a direction). Oriented lines carry Plücker coordinates `(g, h)` with
//! `h = p × g` for any point `p` on the line; reversing orientation negates
//! both parts. Euclidean displacements are homogeneous 4×4 matrices acting
//! on point columns, kept normalized so the homogenizing entry is 1.

use nalgebra::{Matrix3, Matrix4, Rotation3, Unit, Vector3, Vector4};
use thiserror::Error;

use crate::Tol;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeomError {
    #[error("degenerate input: {0}")]
    DegenerateInput(&'static str),
    #[error("planes are parallel")]
    ParallelPlanes,
    #[error("line lies in the plane")]
    LineInPlane,
    #[error("lines are skew (perpendicular distance {0:.3e})")]
    SkewLines(f64),
    #[error("lines are parallel")]
    ParallelLines,
    #[error("lines intersect; twist is undefined")]
    IntersectingLines,
}

/// Residual of projective equality of two nonzero vectors: the norm of
/// the wedge of the unit-normalized inputs, computed componentwise so
/// that equal rays give a residual at machine precision. Zero iff the
/// vectors agree up to a nonzero scalar, of either sign.
pub fn proj_residual<const N: usize>(a: &[f64; N], b: &[f64; N]) -> f64 {
    let na = a.iter().map(|v| v * v).sum::<f64>().sqrt();
    let nb = b.iter().map(|v| v * v).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        return f64::INFINITY;
    }
    let mut acc = 0.0;
    for i in 0..N {
        for j in (i + 1)..N {
            let w = (a[i] / na) * (b[j] / nb) - (a[j] / na) * (b[i] / nb);
            acc += w * w;
        }
    }
    acc.sqrt()
}

/// Point of projective 3-space in homogeneous coordinates `[x0, x]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HPoint(pub Vector4<f64>);

impl HPoint {
    pub fn new(coords: Vector4<f64>) -> Result<Self, GeomError> {
        if coords.norm() == 0.0 {
            return Err(GeomError::DegenerateInput("zero homogeneous point"));
        }
        Ok(HPoint(coords))
    }

    /// Finite point `[1, p]`.
    pub fn finite(p: Vector3<f64>) -> Self {
        HPoint(Vector4::new(1.0, p.x, p.y, p.z))
    }

    /// Ideal point (direction) `[0, d]`.
    pub fn ideal(d: Vector3<f64>) -> Self {
        HPoint(Vector4::new(0.0, d.x, d.y, d.z))
    }

    pub fn weight(&self) -> f64 {
        self.0[0]
    }

    pub fn spatial(&self) -> Vector3<f64> {
        self.0.fixed_rows::<3>(1).into_owned()
    }

    pub fn is_ideal(&self, tol: Tol) -> bool {
        self.0[0].abs() <= tol.abs * self.0.norm()
    }

    /// Affine coordinates, if the point is finite.
    pub fn affine(&self, tol: Tol) -> Option<Vector3<f64>> {
        if self.is_ideal(tol) {
            None
        } else {
            Some(self.spatial() / self.0[0])
        }
    }

    pub fn proj_residual(&self, other: &HPoint) -> f64 {
        proj_residual(
            &[self.0[0], self.0[1], self.0[2], self.0[3]],
            &[other.0[0], other.0[1], other.0[2], other.0[3]],
        )
    }

    pub fn proj_eq(&self, other: &HPoint, tol: Tol) -> bool {
        self.proj_residual(other) < tol.rel
    }
}

/// Plane in homogeneous coordinates `[u0, u]`; incident with `[x0, x]`
/// iff `u0*x0 + u.x = 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HPlane(pub Vector4<f64>);

impl HPlane {
    pub fn new(coords: Vector4<f64>) -> Result<Self, GeomError> {
        if coords.norm() == 0.0 {
            return Err(GeomError::DegenerateInput("zero homogeneous plane"));
        }
        Ok(HPlane(coords))
    }

    /// Finite plane through `p` with normal vector `n`.
    pub fn from_point_normal(p: Vector3<f64>, n: Vector3<f64>) -> Result<Self, GeomError> {
        if n.norm() == 0.0 {
            return Err(GeomError::DegenerateInput("zero plane normal"));
        }
        Ok(HPlane(Vector4::new(-n.dot(&p), n.x, n.y, n.z)))
    }

    pub fn offset(&self) -> f64 {
        self.0[0]
    }

    pub fn normal(&self) -> Vector3<f64> {
        self.0.fixed_rows::<3>(1).into_owned()
    }

    /// Incidence residual with a point, normalized to unit scales.
    pub fn incidence_residual(&self, x: &HPoint) -> f64 {
        self.0.dot(&x.0).abs() / (self.0.norm() * x.0.norm())
    }

    pub fn contains(&self, x: &HPoint, tol: Tol) -> bool {
        self.incidence_residual(x) < tol.abs.max(tol.rel * 1e-3)
    }

    pub fn proj_residual(&self, other: &HPlane) -> f64 {
        proj_residual(
            &[self.0[0], self.0[1], self.0[2], self.0[3]],
            &[other.0[0], other.0[1], other.0[2], other.0[3]],
        )
    }

    pub fn proj_eq(&self, other: &HPlane, tol: Tol) -> bool {
        self.proj_residual(other) < tol.rel
    }
}

/// Oriented line in Plücker coordinates: direction `g` and moment
/// `h = p × g` for any point `p` on the line.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PlueckerLine {
    pub dir: Vector3<f64>,
    pub moment: Vector3<f64>,
}

impl PlueckerLine {
    /// Line from raw Plücker coordinates; enforces the Plücker condition
    /// `g.h = 0` relative to the coordinate scale.
    pub fn new(dir: Vector3<f64>, moment: Vector3<f64>) -> Result<Self, GeomError> {
        if dir.norm() == 0.0 {
            return Err(GeomError::DegenerateInput("zero line direction"));
        }
        let res = dir.dot(&moment).abs() / (dir.norm() * (dir.norm() + moment.norm()));
        if res > 1e-9 {
            return Err(GeomError::DegenerateInput("Plücker condition violated"));
        }
        Ok(PlueckerLine { dir, moment })
    }

    /// Oriented line through `p` in direction `dir`.
    pub fn through_point(p: Vector3<f64>, dir: Vector3<f64>) -> Result<Self, GeomError> {
        if dir.norm() == 0.0 {
            return Err(GeomError::DegenerateInput("zero line direction"));
        }
        Ok(PlueckerLine {
            dir,
            moment: p.cross(&dir),
        })
    }

    /// Join of two homogeneous points, oriented from `x` towards `y`.
    /// Fails for two ideal points (a line at infinity).
    pub fn join(x: &HPoint, y: &HPoint) -> Result<Self, GeomError> {
        let g = x.weight() * y.spatial() - y.weight() * x.spatial();
        let h = x.spatial().cross(&y.spatial());
        PlueckerLine::new(g, h)
    }

    pub fn reverse(&self) -> Self {
        PlueckerLine {
            dir: -self.dir,
            moment: -self.moment,
        }
    }

    /// Same carrier line and orientation, with unit direction.
    pub fn unit(&self) -> Self {
        let n = self.dir.norm();
        PlueckerLine {
            dir: self.dir / n,
            moment: self.moment / n,
        }
    }

    /// The point of the line closest to the origin.
    pub fn point_nearest_origin(&self) -> Vector3<f64> {
        self.dir.cross(&self.moment) / self.dir.norm_squared()
    }

    /// Distance from an affine point to the line.
    pub fn distance_to_point(&self, p: Vector3<f64>) -> f64 {
        (p.cross(&self.dir) - self.moment).norm() / self.dir.norm()
    }

    /// Residual of equality as oriented lines (unit-normalized).
    pub fn oriented_residual(&self, other: &PlueckerLine) -> f64 {
        let a = self.unit();
        let b = other.unit();
        ((a.dir - b.dir).norm_squared() + (a.moment - b.moment).norm_squared()).sqrt()
    }

    /// Mutual moment with another oriented line; vanishes iff the lines
    /// are coplanar (intersecting or parallel).
    pub fn mutual_moment(&self, other: &PlueckerLine) -> f64 {
        self.dir.dot(&other.moment) + other.dir.dot(&self.moment)
    }
}

/// Direct or opposite Euclidean isometry as a homogeneous 4×4 matrix with
/// first row `(1, 0, 0, 0)`, acting on homogeneous point columns.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Motion(pub Matrix4<f64>);

impl Motion {
    pub fn identity() -> Self {
        Motion(Matrix4::identity())
    }

    /// Builds a motion from a linear part and a translation; the linear
    /// part is not checked for orthogonality.
    pub fn from_parts(linear: Matrix3<f64>, translation: Vector3<f64>) -> Self {
        let mut m = Matrix4::identity();
        m.fixed_view_mut::<3, 3>(1, 1).copy_from(&linear);
        m.fixed_view_mut::<3, 1>(1, 0).copy_from(&translation);
        Motion(m)
    }

    /// Rotation by `angle` about an oriented line, positive by the
    /// right-hand rule around the line's direction.
    pub fn rotation_about_line(axis: &PlueckerLine, angle: f64) -> Self {
        let dir = Unit::new_normalize(axis.dir);
        let r = Rotation3::from_axis_angle(&dir, angle);
        let c = axis.point_nearest_origin();
        let t = c - r * c;
        Motion::from_parts(r.into_inner(), t)
    }

    pub fn linear(&self) -> Matrix3<f64> {
        self.0.fixed_view::<3, 3>(1, 1).into_owned()
    }

    pub fn translation(&self) -> Vector3<f64> {
        self.0.fixed_view::<3, 1>(1, 0).into_owned()
    }

    /// `self` after `other` (matrix product `self * other`).
    pub fn compose(&self, other: &Motion) -> Motion {
        Motion(self.0 * other.0)
    }

    pub fn is_direct(&self) -> bool {
        self.linear().determinant() > 0.0
    }

    pub fn act_hpoint(&self, x: &HPoint) -> HPoint {
        HPoint(self.0 * x.0)
    }

    pub fn act_point(&self, p: Vector3<f64>) -> Vector3<f64> {
        self.linear() * p + self.translation()
    }

    pub fn act_direction(&self, d: Vector3<f64>) -> Vector3<f64> {
        self.linear() * d
    }

    pub fn act_line(&self, l: &PlueckerLine) -> PlueckerLine {
        let g = self.act_direction(l.dir);
        let p = self.act_point(l.point_nearest_origin());
        PlueckerLine {
            dir: g,
            moment: p.cross(&g),
        }
    }

    /// Residual of the linear part against a proper rotation.
    pub fn rotation_residual(&self) -> f64 {
        let l = self.linear();
        let ortho = (l.transpose() * l - Matrix3::identity()).norm();
        let det = (l.determinant() - 1.0).abs();
        ortho.max(det)
    }
}

/// Bisector plane of two finite points; contains their affine midpoint
/// and is orthogonal to their affine difference.
pub fn bisector_plane(x: &HPoint, y: &HPoint, tol: Tol) -> Result<HPlane, GeomError> {
    if x.is_ideal(tol) || y.is_ideal(tol) {
        return Err(GeomError::DegenerateInput("bisector of an ideal point"));
    }
    if x.proj_eq(y, tol) {
        return Err(GeomError::DegenerateInput("bisector of equal points"));
    }
    let (x0, xv) = (x.weight(), x.spatial());
    let (y0, yv) = (y.weight(), y.spatial());
    let u0 = y0 * y0 * xv.dot(&xv) - x0 * x0 * yv.dot(&yv);
    let uv = 2.0 * x0 * y0 * (x0 * yv - y0 * xv);
    HPlane::new(Vector4::new(u0, uv.x, uv.y, uv.z))
}

/// Intersection point of a plane and a line. An ideal result (line
/// parallel to the plane) is returned as an ideal point; only a line
/// contained in the plane is rejected.
pub fn meet_plane_line(u: &HPlane, l: &PlueckerLine, _tol: Tol) -> Result<HPoint, GeomError> {
    let x0 = u.normal().dot(&l.dir);
    let xv = -u.offset() * l.dir + u.normal().cross(&l.moment);
    let scale = (u.0.norm() * (l.dir.norm() + l.moment.norm())).max(f64::MIN_POSITIVE);
    if (x0 * x0 + xv.norm_squared()).sqrt() <= 1e-12 * scale {
        return Err(GeomError::LineInPlane);
    }
    Ok(HPoint(Vector4::new(x0, xv.x, xv.y, xv.z)))
}

/// Reflection in a finite plane, normalized so the homogenizing entry
/// is 1. Involutive and fixing the plane pointwise.
pub fn reflection_matrix(u: &HPlane, _tol: Tol) -> Result<Motion, GeomError> {
    let n = u.normal();
    let nn = n.norm_squared();
    if nn == 0.0 {
        return Err(GeomError::DegenerateInput("reflection in an ideal plane"));
    }
    let (u0, u1, u2, u3) = (u.offset(), n.x, n.y, n.z);
    let m = Matrix4::new(
        nn,
        0.0,
        0.0,
        0.0,
        -2.0 * u0 * u1,
        -u1 * u1 + u2 * u2 + u3 * u3,
        -2.0 * u1 * u2,
        -2.0 * u1 * u3,
        -2.0 * u0 * u2,
        -2.0 * u1 * u2,
        u1 * u1 - u2 * u2 + u3 * u3,
        -2.0 * u2 * u3,
        -2.0 * u0 * u3,
        -2.0 * u1 * u3,
        -2.0 * u2 * u3,
        u1 * u1 + u2 * u2 - u3 * u3,
    );
    Ok(Motion(m / nn))
}

/// Composition of the reflections in `beta`, then `gamma`: the rotation
/// about their intersection line. Parallel planes are rejected.
pub fn rotation_from_two_reflections(
    beta: &HPlane,
    gamma: &HPlane,
    tol: Tol,
) -> Result<Motion, GeomError> {
    let nb = beta.normal();
    let ng = gamma.normal();
    if nb.cross(&ng).norm() <= tol.abs * nb.norm() * ng.norm() {
        // Equal planes compose to the identity; keep that case.
        if beta.proj_residual(gamma) > tol.rel {
            return Err(GeomError::ParallelPlanes);
        }
    }
    let b = reflection_matrix(beta, tol)?;
    let c = reflection_matrix(gamma, tol)?;
    Ok(c.compose(&b))
}

/// Plane through three homogeneous points (4D cofactor expansion).
pub fn join_points(a: &HPoint, b: &HPoint, c: &HPoint, _tol: Tol) -> Result<HPlane, GeomError> {
    let rows = [a.0, b.0, c.0];
    let minor = |c0: usize, c1: usize, c2: usize| {
        Matrix3::new(
            rows[0][c0],
            rows[0][c1],
            rows[0][c2],
            rows[1][c0],
            rows[1][c1],
            rows[1][c2],
            rows[2][c0],
            rows[2][c1],
            rows[2][c2],
        )
        .determinant()
    };
    let u = Vector4::new(
        minor(1, 2, 3),
        -minor(0, 2, 3),
        minor(0, 1, 3),
        -minor(0, 1, 2),
    );
    let scale = a.0.norm() * b.0.norm() * c.0.norm();
    if u.norm() <= 1e-12 * scale {
        return Err(GeomError::DegenerateInput("joined points are collinear"));
    }
    HPlane::new(u)
}

/// Intersection line of two non-parallel planes. The orientation follows
/// `u.normal() × v.normal()`.
pub fn meet_planes(u: &HPlane, v: &HPlane, tol: Tol) -> Result<PlueckerLine, GeomError> {
    let nu = u.normal();
    let nv = v.normal();
    let g = nu.cross(&nv);
    if g.norm() <= tol.abs * nu.norm() * nv.norm() {
        return Err(GeomError::ParallelPlanes);
    }
    // Point on both planes as a combination of the two normals.
    let a11 = nu.dot(&nu);
    let a12 = nu.dot(&nv);
    let a22 = nv.dot(&nv);
    let det = a11 * a22 - a12 * a12;
    let alpha = (-u.offset() * a22 + v.offset() * a12) / det;
    let beta = (-v.offset() * a11 + u.offset() * a12) / det;
    let p = alpha * nu + beta * nv;
    PlueckerLine::through_point(p, g)
}

/// Feet and length of the common perpendicular of two non-parallel lines.
#[derive(Clone, Copy, Debug)]
pub struct CommonPerpendicular {
    pub foot_a: Vector3<f64>,
    pub foot_b: Vector3<f64>,
    pub distance: f64,
}

pub fn common_perpendicular(
    a: &PlueckerLine,
    b: &PlueckerLine,
    tol: Tol,
) -> Result<CommonPerpendicular, GeomError> {
    let g1 = a.dir;
    let g2 = b.dir;
    let cx = g1.cross(&g2);
    if cx.norm() <= tol.rel * g1.norm() * g2.norm() {
        return Err(GeomError::ParallelLines);
    }
    let p1 = a.point_nearest_origin();
    let p2 = b.point_nearest_origin();
    let r = p2 - p1;
    // p1 + s g1 and p2 + t g2 with the difference orthogonal to g1, g2.
    let (a11, a12, a22) = (g1.dot(&g1), g1.dot(&g2), g2.dot(&g2));
    let det = a12 * a12 - a11 * a22;
    let s = (a12 * r.dot(&g2) - a22 * r.dot(&g1)) / det;
    let t = (a11 * r.dot(&g2) - a12 * r.dot(&g1)) / det;
    let foot_a = p1 + s * g1;
    let foot_b = p2 + t * g2;
    Ok(CommonPerpendicular {
        foot_a,
        foot_b,
        distance: (foot_b - foot_a).norm(),
    })
}

/// Shortest distance between two lines (any mutual position).
pub fn line_distance(a: &PlueckerLine, b: &PlueckerLine) -> f64 {
    let cx = a.dir.cross(&b.dir);
    let p1 = a.point_nearest_origin();
    let p2 = b.point_nearest_origin();
    if cx.norm() <= 1e-14 * a.dir.norm() * b.dir.norm() {
        let g = a.dir / a.dir.norm();
        let r = p2 - p1;
        return (r - r.dot(&g) * g).norm();
    }
    ((p2 - p1).dot(&cx) / cx.norm()).abs()
}

/// Signed twist of two oriented lines.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Twist {
    /// `sin(angle) / distance`; zero for parallel lines.
    pub value: f64,
    pub distance: f64,
    pub sin_angle: f64,
    pub cos_angle: f64,
    /// Set when the directions are parallel and the twist degenerates to 0.
    pub parallel: bool,
}

/// Twist of two oriented lines: `sin(angle)/distance`, the angle measured
/// from `n` to `m` around the ray from the foot on `n` to the foot on `m`.
/// Intersecting lines are rejected; parallel lines yield twist 0 with the
/// `parallel` flag set.
pub fn twist(n: &PlueckerLine, m: &PlueckerLine, tol: Tol) -> Result<Twist, GeomError> {
    let gn = n.dir / n.dir.norm();
    let gm = m.dir / m.dir.norm();
    if gn.cross(&gm).norm() <= tol.rel {
        let d = line_distance(n, m);
        if d <= tol.rel {
            return Err(GeomError::IntersectingLines);
        }
        return Ok(Twist {
            value: 0.0,
            distance: d,
            sin_angle: 0.0,
            cos_angle: gn.dot(&gm),
            parallel: true,
        });
    }
    let cp = common_perpendicular(n, m, tol)?;
    let scale = 1.0 + cp.foot_a.norm().max(cp.foot_b.norm());
    if cp.distance <= tol.rel * scale {
        return Err(GeomError::IntersectingLines);
    }
    let v = (cp.foot_b - cp.foot_a) / cp.distance;
    let sin_angle = gn.cross(&gm).dot(&v);
    let cos_angle = gn.dot(&gm);
    Ok(Twist {
        value: sin_angle / cp.distance,
        distance: cp.distance,
        sin_angle,
        cos_angle,
        parallel: false,
    })
}

/// Common point of two coplanar lines. Nearly-skew input within tolerance
/// yields the midpoint of the common perpendicular segment.
pub fn line_meet_point(n: &PlueckerLine, m: &PlueckerLine, tol: Tol) -> Result<HPoint, GeomError> {
    let cp = common_perpendicular(n, m, tol)?;
    let scale = 1.0 + cp.foot_a.norm().max(cp.foot_b.norm());
    if cp.distance > tol.rel * scale {
        return Err(GeomError::SkewLines(cp.distance));
    }
    Ok(HPoint::finite(0.5 * (cp.foot_a + cp.foot_b)))
}

/// Cross ratio `(a-c)(b-d) / ((a-d)(b-c))` of four parameters.
pub fn cross_ratio(a: f64, b: f64, c: f64, d: f64) -> f64 {
    ((a - c) * (b - d)) / ((a - d) * (b - c))
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Vector3;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn v(x: f64, y: f64, z: f64) -> Vector3<f64> {
        Vector3::new(x, y, z)
    }

    fn tol() -> Tol {
        Tol::default()
    }

    fn random_vec(rng: &mut ChaCha8Rng, scale: f64) -> Vector3<f64> {
        v(
            rng.random_range(-scale..scale),
            rng.random_range(-scale..scale),
            rng.random_range(-scale..scale),
        )
    }

    fn random_unit(rng: &mut ChaCha8Rng) -> Vector3<f64> {
        loop {
            let w = random_vec(rng, 1.0);
            if w.norm() > 1e-3 {
                return w / w.norm();
            }
        }
    }

    /// Independent check that `plane` bisects the affine points `x`, `y`:
    /// midpoint incidence plus normal parallel to the difference.
    fn bisector_oracle(plane: &HPlane, x: Vector3<f64>, y: Vector3<f64>) -> f64 {
        let mid = HPoint::finite(0.5 * (x + y));
        let inc = plane.incidence_residual(&mid);
        let n = plane.normal() / plane.normal().norm();
        let d = (y - x) / (y - x).norm();
        let par = n.cross(&d).norm();
        inc.max(par)
    }

    #[test]
    fn bisector_symmetric_pair() {
        let b = bisector_plane(
            &HPoint::finite(v(1.0, 0.0, 0.0)),
            &HPoint::finite(v(-1.0, 0.0, 0.0)),
            tol(),
        )
        .unwrap();
        assert!(b.proj_eq(&HPlane(Vector4::new(0.0, 1.0, 0.0, 0.0)), tol()));
    }

    #[test]
    fn bisector_offset_pair() {
        let b = bisector_plane(
            &HPoint::finite(v(0.0, 0.0, 0.0)),
            &HPoint::finite(v(2.0, 0.0, 0.0)),
            tol(),
        )
        .unwrap();
        assert!(b.proj_eq(&HPlane(Vector4::new(-1.0, 1.0, 0.0, 0.0)), tol()));
        assert!(bisector_oracle(&b, v(0.0, 0.0, 0.0), v(2.0, 0.0, 0.0)) < 1e-12);
    }

    #[test]
    fn bisector_scale_invariance() {
        let x = HPoint(Vector4::new(2.0, 2.0, 0.0, 0.0));
        let y = HPoint(Vector4::new(1.0, -1.0, 0.0, 0.0));
        let b = bisector_plane(&x, &y, tol()).unwrap();
        assert!(b.proj_eq(&HPlane(Vector4::new(0.0, 1.0, 0.0, 0.0)), tol()));
        assert!(bisector_oracle(&b, v(1.0, 0.0, 0.0), v(-1.0, 0.0, 0.0)) < 1e-12);
    }

    #[test]
    fn bisector_rejects_degenerate_input() {
        let p = HPoint::finite(v(1.0, 2.0, 3.0));
        assert!(bisector_plane(&p, &p, tol()).is_err());
        assert!(bisector_plane(&p, &HPoint::ideal(v(1.0, 0.0, 0.0)), tol()).is_err());
    }

    #[test]
    fn bisector_reflection_swaps_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let x = random_vec(&mut rng, 5.0);
            let y = random_vec(&mut rng, 5.0);
            if (x - y).norm() < 1e-3 {
                continue;
            }
            let b = bisector_plane(&HPoint::finite(x), &HPoint::finite(y), tol()).unwrap();
            let r = reflection_matrix(&b, tol()).unwrap();
            let img = r.act_hpoint(&HPoint::finite(x));
            assert!(
                img.proj_residual(&HPoint::finite(y)) < 1e-9,
                "reflection must swap the pair"
            );
        }
    }

    #[test]
    fn meet_plane_line_z_axis() {
        let plane = HPlane(Vector4::new(-1.0, 0.0, 0.0, 1.0));
        let line = PlueckerLine::through_point(v(0.0, 0.0, 0.0), v(0.0, 0.0, 1.0)).unwrap();
        let p = meet_plane_line(&plane, &line, tol()).unwrap();
        assert!(p.proj_eq(&HPoint::finite(v(0.0, 0.0, 1.0)), tol()));
    }

    #[test]
    fn meet_plane_line_parametric_oracle() {
        // Plane x = 0, line through (1, 0, 0) with direction (-1, 1, 0):
        // the parametric solution is (0, 1, 0).
        let plane = HPlane(Vector4::new(0.0, 1.0, 0.0, 0.0));
        let line = PlueckerLine::through_point(v(1.0, 0.0, 0.0), v(-1.0, 1.0, 0.0)).unwrap();
        let p = meet_plane_line(&plane, &line, tol()).unwrap();
        assert!(p.proj_eq(&HPoint::finite(v(0.0, 1.0, 0.0)), tol()));
        assert!(plane.incidence_residual(&p) < 1e-12);
        assert!(line.distance_to_point(p.affine(tol()).unwrap()) < 1e-12);
    }

    #[test]
    fn meet_plane_line_parallel_is_ideal() {
        let plane = HPlane(Vector4::new(0.0, 0.0, 0.0, 1.0));
        let line = PlueckerLine::through_point(v(0.0, 0.0, 1.0), v(1.0, 0.0, 0.0)).unwrap();
        let p = meet_plane_line(&plane, &line, tol()).unwrap();
        assert!(p.is_ideal(tol()));
        assert!(proj_residual(&[p.0[1], p.0[2], p.0[3]], &[1.0, 0.0, 0.0]) < 1e-12);
    }

    #[test]
    fn meet_plane_line_contained_is_error() {
        let plane = HPlane(Vector4::new(0.0, 0.0, 0.0, 1.0));
        let line = PlueckerLine::through_point(v(1.0, 2.0, 0.0), v(1.0, 0.0, 0.0)).unwrap();
        assert_eq!(
            meet_plane_line(&plane, &line, tol()),
            Err(GeomError::LineInPlane)
        );
    }

    #[test]
    fn reflection_in_coordinate_plane() {
        let r = reflection_matrix(&HPlane(Vector4::new(0.0, 1.0, 0.0, 0.0)), tol()).unwrap();
        let expect = Matrix4::from_diagonal(&Vector4::new(1.0, -1.0, 1.0, 1.0));
        assert!((r.0 - expect).norm() < 1e-14);
    }

    #[test]
    fn reflection_in_shifted_plane() {
        // Plane x = 1 maps the origin to (2, 0, 0).
        let r = reflection_matrix(&HPlane(Vector4::new(-1.0, 1.0, 0.0, 0.0)), tol()).unwrap();
        let img = r.act_point(v(0.0, 0.0, 0.0));
        assert!((img - v(2.0, 0.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn reflection_is_involutive() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..1000 {
            let n = random_unit(&mut rng);
            let p0 = random_vec(&mut rng, 3.0);
            let u = HPlane::from_point_normal(p0, n).unwrap();
            let r = reflection_matrix(&u, tol()).unwrap();
            let x = random_vec(&mut rng, 3.0);
            let back = r.act_point(r.act_point(x));
            assert!((back - x).norm() < 1e-12 * (1.0 + x.norm()));
        }
    }

    #[test]
    fn two_reflections_give_quarter_turn() {
        // Reflect first in y = x, then in x = 0: the quarter turn about z
        // taking (1, 0, 0) to (0, 1, 0). Cross-checked against composing
        // the two affine reflections directly.
        let beta = HPlane(Vector4::new(0.0, 1.0, -1.0, 0.0));
        let gamma = HPlane(Vector4::new(0.0, 1.0, 0.0, 0.0));
        let r = rotation_from_two_reflections(&beta, &gamma, tol()).unwrap();
        let affine_refl =
            |n: Vector3<f64>, x: Vector3<f64>| x - 2.0 * (x.dot(&n)) * n / n.norm_squared();
        let x = v(1.0, 0.0, 0.0);
        let expect = affine_refl(gamma.normal(), affine_refl(beta.normal(), x));
        assert!((expect - v(0.0, 1.0, 0.0)).norm() < 1e-14);
        assert!((r.act_point(x) - expect).norm() < 1e-14);
        assert!(r.is_direct());
        assert!(r.rotation_residual() < 1e-12);
    }

    #[test]
    fn two_reflections_fix_intersection_line() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..200 {
            let beta = HPlane::from_point_normal(random_vec(&mut rng, 2.0), random_unit(&mut rng))
                .unwrap();
            let gamma = HPlane::from_point_normal(random_vec(&mut rng, 2.0), random_unit(&mut rng))
                .unwrap();
            if beta.normal().cross(&gamma.normal()).norm() < 1e-2 {
                continue;
            }
            let r = rotation_from_two_reflections(&beta, &gamma, tol()).unwrap();
            let axis = meet_planes(&beta, &gamma, tol()).unwrap();
            for s in [-1.0, 0.0, 2.5] {
                let p = axis.point_nearest_origin() + s * axis.dir / axis.dir.norm();
                assert!((r.act_point(p) - p).norm() < 1e-9 * (1.0 + p.norm()));
            }
        }
    }

    #[test]
    fn equal_planes_compose_to_identity() {
        let u = HPlane(Vector4::new(0.5, 1.0, 2.0, -1.0));
        let r = rotation_from_two_reflections(&u, &u, tol()).unwrap();
        assert!((r.0 - Matrix4::identity()).norm() < 1e-12);
    }

    #[test]
    fn parallel_planes_are_rejected() {
        let u = HPlane(Vector4::new(0.0, 1.0, 0.0, 0.0));
        let w = HPlane(Vector4::new(-1.0, 1.0, 0.0, 0.0));
        assert_eq!(
            rotation_from_two_reflections(&u, &w, tol()),
            Err(GeomError::ParallelPlanes)
        );
    }

    #[test]
    fn twist_of_reference_frame() {
        // Feet (0, 0, ±1/2), directions (1, ±1, 0): distance 1, angle
        // a quarter turn, twist +1.
        let e = 0.5;
        let n = PlueckerLine::through_point(v(0.0, 0.0, e), v(1.0, 1.0, 0.0)).unwrap();
        let m = PlueckerLine::through_point(v(0.0, 0.0, -e), v(1.0, -1.0, 0.0)).unwrap();
        let t = twist(&n, &m, tol()).unwrap();
        assert!((t.distance - 1.0).abs() < 1e-14);
        assert!((t.sin_angle - 1.0).abs() < 1e-14);
        assert!((t.value - 1.0).abs() < 1e-14);
        assert!(!t.parallel);
    }

    #[test]
    fn twist_mutual_moment_oracle() {
        // sin(angle) = -mutual_moment / distance for unit directions.
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..200 {
            let n = PlueckerLine::through_point(random_vec(&mut rng, 2.0), random_unit(&mut rng))
                .unwrap();
            let m = PlueckerLine::through_point(random_vec(&mut rng, 2.0), random_unit(&mut rng))
                .unwrap();
            match twist(&n, &m, tol()) {
                Ok(t) if !t.parallel => {
                    let mm = n.unit().mutual_moment(&m.unit());
                    assert!(
                        (t.sin_angle + mm / t.distance).abs() < 1e-9,
                        "mutual moment mismatch: {} vs {}",
                        t.sin_angle,
                        -mm / t.distance
                    );
                }
                _ => {}
            }
        }
    }

    #[test]
    fn twist_parallel_lines() {
        let n = PlueckerLine::through_point(v(0.0, 0.0, 0.0), v(0.0, 0.0, 1.0)).unwrap();
        let m = PlueckerLine::through_point(v(1.0, 0.0, 0.0), v(0.0, 0.0, 1.0)).unwrap();
        let t = twist(&n, &m, tol()).unwrap();
        assert!(t.parallel);
        assert_eq!(t.value, 0.0);
        assert!((t.distance - 1.0).abs() < 1e-14);
    }

    #[test]
    fn twist_swap_symmetry() {
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        for _ in 0..200 {
            let n = PlueckerLine::through_point(random_vec(&mut rng, 2.0), random_unit(&mut rng))
                .unwrap();
            let m = PlueckerLine::through_point(random_vec(&mut rng, 2.0), random_unit(&mut rng))
                .unwrap();
            if let (Ok(a), Ok(b)) = (twist(&n, &m, tol()), twist(&m, &n, tol())) {
                assert!((a.value - b.value).abs() < 1e-9 * (1.0 + a.value.abs()));
            }
        }
    }

    #[test]
    fn twist_rejects_intersecting_lines() {
        let n = PlueckerLine::through_point(v(0.0, 0.0, 0.0), v(1.0, 0.0, 0.0)).unwrap();
        let m = PlueckerLine::through_point(v(0.0, 0.0, 0.0), v(0.0, 1.0, 0.0)).unwrap();
        assert_eq!(twist(&n, &m, tol()), Err(GeomError::IntersectingLines));
    }

    #[test]
    fn twist_isometry_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..300 {
            let n = PlueckerLine::through_point(random_vec(&mut rng, 2.0), random_unit(&mut rng))
                .unwrap();
            let m = PlueckerLine::through_point(random_vec(&mut rng, 2.0), random_unit(&mut rng))
                .unwrap();
            let axis =
                PlueckerLine::through_point(random_vec(&mut rng, 2.0), random_unit(&mut rng))
                    .unwrap();
            let g = Motion::rotation_about_line(&axis, rng.random_range(-3.0..3.0));
            if let Ok(t) = twist(&n, &m, tol()) {
                if t.parallel {
                    continue;
                }
                let t2 = twist(&g.act_line(&n), &g.act_line(&m), tol()).unwrap();
                assert!((t.value - t2.value).abs() < 1e-9 * (1.0 + t.value.abs()));
            }
        }
    }

    #[test]
    fn line_meet_point_axes() {
        let x = PlueckerLine::through_point(v(0.0, 0.0, 0.0), v(1.0, 0.0, 0.0)).unwrap();
        let y = PlueckerLine::through_point(v(0.0, 0.0, 0.0), v(0.0, 1.0, 0.0)).unwrap();
        let p = line_meet_point(&x, &y, tol()).unwrap();
        assert!(p.proj_eq(&HPoint::finite(v(0.0, 0.0, 0.0)), tol()));
    }

    #[test]
    fn line_meet_point_offset() {
        let z = PlueckerLine::through_point(v(0.0, 0.0, 0.0), v(0.0, 0.0, 1.0)).unwrap();
        let l = PlueckerLine::through_point(v(0.0, 0.0, 3.0), v(1.0, 0.0, 0.0)).unwrap();
        let p = line_meet_point(&z, &l, tol()).unwrap();
        assert!(p.proj_eq(&HPoint::finite(v(0.0, 0.0, 3.0)), tol()));
    }

    #[test]
    fn line_meet_point_skew_is_error() {
        let z = PlueckerLine::through_point(v(0.0, 0.0, 0.0), v(0.0, 0.0, 1.0)).unwrap();
        let l = PlueckerLine::through_point(v(0.0, 1.0, 0.0), v(1.0, 0.0, 0.0)).unwrap();
        assert!(matches!(
            line_meet_point(&z, &l, tol()),
            Err(GeomError::SkewLines(_))
        ));
    }

    #[test]
    fn motion_preserves_pluecker_condition() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        for _ in 0..1000 {
            let l = PlueckerLine::through_point(random_vec(&mut rng, 4.0), random_unit(&mut rng))
                .unwrap();
            let axis =
                PlueckerLine::through_point(random_vec(&mut rng, 2.0), random_unit(&mut rng))
                    .unwrap();
            let g = Motion::rotation_about_line(&axis, rng.random_range(-3.0..3.0));
            let img = g.act_line(&l);
            let res = img.dir.dot(&img.moment).abs()
                / (img.dir.norm() * (img.dir.norm() + img.moment.norm()));
            assert!(res < 1e-12);
        }
    }

    #[test]
    fn join_points_spans_plane() {
        let a = HPoint::finite(v(1.0, 0.0, 0.0));
        let b = HPoint::finite(v(0.0, 1.0, 0.0));
        let c = HPoint::finite(v(0.0, 0.0, 1.0));
        let u = join_points(&a, &b, &c, tol()).unwrap();
        for p in [&a, &b, &c] {
            assert!(u.incidence_residual(p) < 1e-14);
        }
        // An ideal point in the span works as well.
        let d = HPoint::ideal(v(1.0, -1.0, 0.0));
        assert!(u.incidence_residual(&d) < 1e-14);
    }

    #[test]
    fn join_points_collinear_is_error() {
        let a = HPoint::finite(v(0.0, 0.0, 0.0));
        let b = HPoint::finite(v(1.0, 0.0, 0.0));
        let c = HPoint::finite(v(2.0, 0.0, 0.0));
        assert!(join_points(&a, &b, &c, tol()).is_err());
    }

    #[test]
    fn cross_ratio_reference_value() {
        assert!((cross_ratio(0.0, 1.0, 2.0, 3.0) - 4.0 / 3.0).abs() < 1e-15);
    }
}
