//! Dual quaternions as points of the Study quadric.
//!
//! A displacement is a homogeneous 8-vector `[primal, dual]` subject to
//! the Study condition `primal . dual = 0`. The primal part is a rotation
//! quaternion `(w, v)`; the action on homogeneous points is the sandwich
//! `x0' + ε x' = econj(A) * (x0 + ε x) * conj(A)`, which scales the
//! homogenizing coordinate by the squared primal norm.

use nalgebra::{Matrix3, Vector3, Vector4};
use rand::Rng;
use thiserror::Error;

use crate::geom::{GeomError, HPoint, Motion, PlueckerLine};
use crate::Tol;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DualQuatError {
    #[error("dual quaternion is not invertible (primal part vanishes)")]
    NonInvertible,
    #[error("relative displacement is not a rotation")]
    NotARotation,
    #[error("line lies inside the Study quadric")]
    LineInQuadric,
    #[error("geometry error: {0}")]
    Geom(#[from] GeomError),
}

/// Hamilton product of two quaternions stored as `(w, x, y, z)`.
fn qmul(a: &Vector4<f64>, b: &Vector4<f64>) -> Vector4<f64> {
    let (aw, av) = (a[0], Vector3::new(a[1], a[2], a[3]));
    let (bw, bv) = (b[0], Vector3::new(b[1], b[2], b[3]));
    let w = aw * bw - av.dot(&bv);
    let v = aw * bv + bw * av + av.cross(&bv);
    Vector4::new(w, v.x, v.y, v.z)
}

fn qconj(a: &Vector4<f64>) -> Vector4<f64> {
    Vector4::new(a[0], -a[1], -a[2], -a[3])
}

fn qvec(a: &Vector4<f64>) -> Vector3<f64> {
    Vector3::new(a[1], a[2], a[3])
}

fn qfromvec(v: Vector3<f64>) -> Vector4<f64> {
    Vector4::new(0.0, v.x, v.y, v.z)
}

/// Dual quaternion `primal + ε dual`, both parts `(w, x, y, z)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DualQuaternion {
    pub primal: Vector4<f64>,
    pub dual: Vector4<f64>,
}

impl DualQuaternion {
    pub fn new(primal: Vector4<f64>, dual: Vector4<f64>) -> Self {
        DualQuaternion { primal, dual }
    }

    pub fn identity() -> Self {
        DualQuaternion::new(Vector4::new(1.0, 0.0, 0.0, 0.0), Vector4::zeros())
    }

    pub fn from_coords(c: [f64; 8]) -> Self {
        DualQuaternion::new(
            Vector4::new(c[0], c[1], c[2], c[3]),
            Vector4::new(c[4], c[5], c[6], c[7]),
        )
    }

    pub fn coords(&self) -> [f64; 8] {
        [
            self.primal[0],
            self.primal[1],
            self.primal[2],
            self.primal[3],
            self.dual[0],
            self.dual[1],
            self.dual[2],
            self.dual[3],
        ]
    }

    /// Translation by `t`.
    pub fn translation(t: Vector3<f64>) -> Self {
        DualQuaternion::new(Vector4::new(1.0, 0.0, 0.0, 0.0), qfromvec(-0.5 * t))
    }

    /// Rotation by `angle` about an oriented line, right-handed around the
    /// line's direction.
    pub fn rotation_about_line(axis: &PlueckerLine, angle: f64) -> Self {
        let u = axis.unit();
        let (s, c) = (0.5 * angle).sin_cos();
        let primal = Vector4::new(c, s * u.dir.x, s * u.dir.y, s * u.dir.z);
        let dual = qfromvec(-s * u.moment);
        DualQuaternion::new(primal, dual)
    }

    pub fn multiply(&self, rhs: &DualQuaternion) -> DualQuaternion {
        DualQuaternion::new(
            qmul(&self.primal, &rhs.primal),
            qmul(&self.primal, &rhs.dual) + qmul(&self.dual, &rhs.primal),
        )
    }

    /// Quaternion conjugation of both parts.
    pub fn conjugate(&self) -> DualQuaternion {
        DualQuaternion::new(qconj(&self.primal), qconj(&self.dual))
    }

    /// ε-conjugation: negate the dual part.
    pub fn eps_conjugate(&self) -> DualQuaternion {
        DualQuaternion::new(self.primal, -self.dual)
    }

    /// Zero both scalar coordinates.
    pub fn vector_part(&self) -> DualQuaternion {
        DualQuaternion::new(qfromvec(qvec(&self.primal)), qfromvec(qvec(&self.dual)))
    }

    pub fn inverse(&self) -> Result<DualQuaternion, DualQuatError> {
        let nn = self.primal.norm_squared();
        if nn == 0.0 {
            return Err(DualQuatError::NonInvertible);
        }
        // A * conj(A) = |P|^2 + 2ε<P,D>; divide conj(A) by that dual scalar.
        let s = self.primal.dot(&self.dual);
        let c = self.conjugate();
        Ok(DualQuaternion::new(
            c.primal / nn,
            c.dual / nn - 2.0 * s / (nn * nn) * c.primal,
        ))
    }

    /// Representative with unit primal norm and the first nonzero primal
    /// coordinate positive.
    pub fn normalize(&self) -> Result<DualQuaternion, DualQuatError> {
        let n = self.primal.norm();
        if n == 0.0 {
            return Err(DualQuatError::NonInvertible);
        }
        let mut sign = 1.0;
        for k in 0..4 {
            if self.primal[k].abs() > 1e-12 * n {
                sign = self.primal[k].signum();
                break;
            }
        }
        Ok(DualQuaternion::new(
            self.primal * sign / n,
            self.dual * sign / n,
        ))
    }

    /// Residual of the Study condition, normalized by the coordinate scale.
    pub fn study_residual(&self) -> f64 {
        let n = self.primal.norm_squared() + self.dual.norm_squared();
        if n == 0.0 {
            return f64::INFINITY;
        }
        self.primal.dot(&self.dual).abs() / n
    }

    pub fn proj_residual(&self, other: &DualQuaternion) -> f64 {
        crate::geom::proj_residual(&self.coords(), &other.coords())
    }

    /// Raw sandwich action on a homogeneous point; the output weight is
    /// the input weight scaled by the squared primal norm.
    pub fn act_hpoint(&self, x: &HPoint) -> HPoint {
        let x0 = Vector4::new(x.weight(), 0.0, 0.0, 0.0);
        let xv = qfromvec(x.spatial());
        let e = self.eps_conjugate();
        let c = self.conjugate();
        // (e.primal + ε e.dual) (x0 + ε xv) (c.primal + ε c.dual)
        let primal = qmul(&qmul(&e.primal, &x0), &c.primal);
        let dual = qmul(&qmul(&e.primal, &xv), &c.primal)
            + qmul(&qmul(&e.primal, &x0), &c.dual)
            + qmul(&qmul(&e.dual, &x0), &c.primal);
        let w = primal[0];
        let v = qvec(&dual);
        HPoint(Vector4::new(w, v.x, v.y, v.z))
    }

    pub fn act_point(&self, p: Vector3<f64>) -> Vector3<f64> {
        let img = self.act_hpoint(&HPoint::finite(p));
        img.spatial() / img.weight()
    }

    pub fn act_direction(&self, d: Vector3<f64>) -> Vector3<f64> {
        let img = self.act_hpoint(&HPoint::ideal(d));
        img.spatial() / self.primal.norm_squared()
    }

    pub fn act_line(&self, l: &PlueckerLine) -> PlueckerLine {
        let g = self.act_direction(l.dir);
        let p = self.act_point(l.point_nearest_origin());
        PlueckerLine {
            dir: g,
            moment: p.cross(&g),
        }
    }

    /// Homogeneous 4×4 matrix of the same displacement.
    pub fn to_motion(&self) -> Result<Motion, DualQuatError> {
        let nn = self.primal.norm_squared();
        if nn == 0.0 {
            return Err(DualQuatError::NonInvertible);
        }
        let q = self.primal / self.primal.norm();
        let (w, x, y, z) = (q[0], q[1], q[2], q[3]);
        let rot = Matrix3::new(
            1.0 - 2.0 * (y * y + z * z),
            2.0 * (x * y - w * z),
            2.0 * (x * z + w * y),
            2.0 * (x * y + w * z),
            1.0 - 2.0 * (x * x + z * z),
            2.0 * (y * z - w * x),
            2.0 * (x * z - w * y),
            2.0 * (y * z + w * x),
            1.0 - 2.0 * (x * x + y * y),
        );
        let t = qvec(&qmul(&(-2.0 * self.dual), &qconj(&self.primal))) / nn;
        Ok(Motion::from_parts(rot, t))
    }

    /// Dual quaternion of a direct isometry given as a motion matrix.
    pub fn from_motion(m: &Motion) -> Result<DualQuaternion, DualQuatError> {
        if !m.is_direct() {
            return Err(DualQuatError::NotARotation);
        }
        let r = m.linear();
        // Shepperd's method: pick the best-conditioned branch.
        let tr = r.trace();
        let (w, x, y, z);
        if tr > 0.0 {
            let s = (tr + 1.0).sqrt() * 2.0;
            w = 0.25 * s;
            x = (r[(2, 1)] - r[(1, 2)]) / s;
            y = (r[(0, 2)] - r[(2, 0)]) / s;
            z = (r[(1, 0)] - r[(0, 1)]) / s;
        } else if r[(0, 0)] > r[(1, 1)] && r[(0, 0)] > r[(2, 2)] {
            let s = (1.0 + r[(0, 0)] - r[(1, 1)] - r[(2, 2)]).sqrt() * 2.0;
            w = (r[(2, 1)] - r[(1, 2)]) / s;
            x = 0.25 * s;
            y = (r[(0, 1)] + r[(1, 0)]) / s;
            z = (r[(0, 2)] + r[(2, 0)]) / s;
        } else if r[(1, 1)] > r[(2, 2)] {
            let s = (1.0 + r[(1, 1)] - r[(0, 0)] - r[(2, 2)]).sqrt() * 2.0;
            w = (r[(0, 2)] - r[(2, 0)]) / s;
            x = (r[(0, 1)] + r[(1, 0)]) / s;
            y = 0.25 * s;
            z = (r[(1, 2)] + r[(2, 1)]) / s;
        } else {
            let s = (1.0 + r[(2, 2)] - r[(0, 0)] - r[(1, 1)]).sqrt() * 2.0;
            w = (r[(1, 0)] - r[(0, 1)]) / s;
            x = (r[(0, 2)] + r[(2, 0)]) / s;
            y = (r[(1, 2)] + r[(2, 1)]) / s;
            z = 0.25 * s;
        }
        let primal = Vector4::new(w, x, y, z);
        let dual = qmul(&qfromvec(-0.5 * m.translation()), &primal);
        DualQuaternion::new(primal, dual).normalize()
    }
}

/// Symmetric bilinear form of the Study quadric,
/// `(primal(x) . dual(y) + primal(y) . dual(x)) / 2`.
pub fn study_pairing(x: &DualQuaternion, y: &DualQuaternion) -> f64 {
    0.5 * (x.primal.dot(&y.dual) + y.primal.dot(&x.dual))
}

/// Embedding of an oriented line into dual-quaternion coordinates;
/// two lines are incident iff the Study pairing of their embeddings
/// vanishes.
pub fn line_embedding(l: &PlueckerLine) -> DualQuaternion {
    DualQuaternion::new(qfromvec(l.dir), qfromvec(l.moment))
}

/// True iff `a` differs from `base` by a pure rotation: the dual scalar
/// of the relative displacement vanishes and the relative displacement is
/// neither the identity nor a translation.
pub fn is_rotation(a: &DualQuaternion, base: &DualQuaternion, tol: Tol) -> bool {
    let rel = match base
        .inverse()
        .map(|i| a.multiply(&i))
        .and_then(|r| r.normalize())
    {
        Ok(r) => r,
        Err(_) => return false,
    };
    let scale = 1.0 + rel.dual.norm();
    if rel.dual[0].abs() > tol.rel * scale {
        return false;
    }
    qvec(&rel.primal).norm() > tol.rel
}

/// Axis of the relative rotation `a` versus `base`, expressed in the
/// moving frame (the frame transported by `base`).
pub fn rotation_axis_moving(
    a: &DualQuaternion,
    base: &DualQuaternion,
    tol: Tol,
) -> Result<PlueckerLine, DualQuatError> {
    if !is_rotation(a, base, tol) {
        return Err(DualQuatError::NotARotation);
    }
    let rel = a.multiply(&base.inverse()?).normalize()?;
    // The ε-conjugated vector part is the line embedding of the fixed-frame
    // axis, scaled by sin(angle/2).
    let emb = rel.vector_part().eps_conjugate();
    let g = qvec(&emb.primal);
    let h = qvec(&emb.dual);
    let s = g.norm();
    let fixed_axis = PlueckerLine::new(g / s, h / s)?;
    let back = base.inverse()?.normalize()?;
    Ok(back.act_line(&fixed_axis))
}

/// Second intersection of the projective line `base + λ·dir` with the
/// Study quadric, `base` lying on the quadric.
#[derive(Clone, Debug)]
pub enum StudyIntersection {
    /// The transversal case: the other intersection point.
    Second(DualQuaternion),
    /// The line touches the quadric at `base` only.
    Tangent,
}

pub fn second_study_intersection(
    base: &DualQuaternion,
    dir: &DualQuaternion,
    tol: Tol,
) -> Result<StudyIntersection, DualQuatError> {
    let bd = study_pairing(base, dir);
    let dd = study_pairing(dir, dir);
    let scale = base.primal.norm() + base.dual.norm() + dir.primal.norm() + dir.dual.norm();
    let eps = tol.abs * scale * scale;
    if dd.abs() <= eps && bd.abs() <= eps {
        return Err(DualQuatError::LineInQuadric);
    }
    if dd.abs() <= eps {
        // Double root at infinity: the second point is `dir` itself.
        return Ok(StudyIntersection::Second(*dir));
    }
    if bd.abs() <= eps {
        return Ok(StudyIntersection::Tangent);
    }
    let lambda = -2.0 * bd / dd;
    Ok(StudyIntersection::Second(DualQuaternion::new(
        base.primal + lambda * dir.primal,
        base.dual + lambda * dir.dual,
    )))
}

/// Uniformly random displacement, for tests and sampling.
pub fn random_displacement<R: Rng>(rng: &mut R, translation_scale: f64) -> DualQuaternion {
    let mut primal = Vector4::zeros();
    loop {
        for k in 0..4 {
            primal[k] = rng.random_range(-1.0..1.0);
        }
        if primal.norm() > 1e-2 {
            break;
        }
    }
    let t = Vector3::new(
        rng.random_range(-translation_scale..translation_scale),
        rng.random_range(-translation_scale..translation_scale),
        rng.random_range(-translation_scale..translation_scale),
    );
    let rot = DualQuaternion::new(primal / primal.norm(), Vector4::zeros());
    DualQuaternion::translation(t).multiply(&rot)
}
