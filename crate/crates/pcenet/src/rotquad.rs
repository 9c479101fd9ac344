//! Rotation quadrilaterals fitted to two fixed transversal lines.
//!
//! The reference frame places the common-perpendicular feet at
//! `(0, 0, ±e)` and the (unnormalized) directions at `(1, ±t, 0)`, so the
//! half distance is `e` and the angle is `2·atan(t)`. Side positions are
//! sampled by solving the defining linear conditions — the relative
//! displacement is a rotation whose axis meets both lines — and
//! intersecting a random direction of their null space with the Study
//! quadric. The fourth position is pinned down the same way by six linear
//! conditions, whose solution line through the first position meets the
//! quadric in exactly one further point.
//!
//! The area-ratio identity `S0/S = -t²/((1+t²)·e²)` for the κ-weighted
//! projected areas of the homologous vertex and normal quadrilaterals —
//! in polynomial form `(1+t²)·e²·S0 + t²·S = 0` — is verified by
//! Monte-Carlo sampling over the free parameters.

use nalgebra::{DMatrix, SMatrix, SVector, Vector3};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::dualquat::{
    is_rotation, line_embedding, rotation_axis_moving, second_study_intersection, DualQuatError,
    DualQuaternion, StudyIntersection,
};
use crate::geom::{GeomError, HPoint, PlueckerLine};
use crate::net::{gaussian_curvature, ContactElement, ElementaryQuad, NetError};
use crate::Tol;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RotQuadError {
    #[error("degenerate configuration parameters (t and e must be nonzero)")]
    DegenerateConfig,
    #[error("sampling failed to produce a non-degenerate draw")]
    DegenerateDraw,
    #[error("solution line is tangent: the fourth position degenerates")]
    TangentLine,
    #[error("constraint system has unexpected rank {0}")]
    UnexpectedRank(usize),
    #[error("dual quaternion error: {0}")]
    DualQuat(#[from] DualQuatError),
    #[error("geometry error: {0}")]
    Geom(#[from] GeomError),
    #[error("net error: {0}")]
    Net(#[from] NetError),
}

/// Frame parameters: angle parameter `t` (angle `2·atan t`) and half
/// distance `e`.
#[derive(Clone, Copy, Debug)]
pub struct RotQuadConfig {
    pub t: f64,
    pub e: f64,
}

impl RotQuadConfig {
    pub fn new(t: f64, e: f64) -> Result<Self, RotQuadError> {
        if t == 0.0 || e == 0.0 {
            return Err(RotQuadError::DegenerateConfig);
        }
        Ok(RotQuadConfig { t, e })
    }

    /// Foot and direction of the first transversal.
    pub fn n_foot(&self) -> Vector3<f64> {
        Vector3::new(0.0, 0.0, self.e)
    }

    pub fn n_dir(&self) -> Vector3<f64> {
        Vector3::new(1.0, self.t, 0.0)
    }

    /// Foot and direction of the second transversal.
    pub fn m_foot(&self) -> Vector3<f64> {
        Vector3::new(0.0, 0.0, -self.e)
    }

    pub fn m_dir(&self) -> Vector3<f64> {
        Vector3::new(1.0, -self.t, 0.0)
    }

    pub fn n_line(&self) -> PlueckerLine {
        PlueckerLine::through_point(self.n_foot(), self.n_dir()).expect("nonzero direction")
    }

    pub fn m_line(&self) -> PlueckerLine {
        PlueckerLine::through_point(self.m_foot(), self.m_dir()).expect("nonzero direction")
    }

    /// The curvature all homologous quadrilaterals must carry.
    pub fn expected_curvature(&self) -> f64 {
        let t2 = self.t * self.t;
        -t2 / ((1.0 + t2) * (1.0 + t2) * self.e * self.e)
    }
}

/// 8×8 matrix of the right multiplication `x ↦ x ⋆ b`.
fn right_mul_matrix(b: &DualQuaternion) -> SMatrix<f64, 8, 8> {
    let mut m = SMatrix::<f64, 8, 8>::zeros();
    for k in 0..8 {
        let mut c = [0.0; 8];
        c[k] = 1.0;
        let col = DualQuaternion::from_coords(c).multiply(b).coords();
        for (r, value) in col.iter().enumerate() {
            m[(r, k)] = *value;
        }
    }
    m
}

/// Row of the linear functional `x ↦ Ω(econj(vpart(x)), embed(line))`.
fn pairing_row(line: &PlueckerLine) -> SVector<f64, 8> {
    let emb = line_embedding(line);
    let g = emb.primal;
    let h = emb.dual;
    SVector::<f64, 8>::from_column_slice(&[0.0, h[1], h[2], h[3], 0.0, -g[1], -g[2], -g[3]])
}

/// Row extracting the dual scalar (the rotation condition coordinate).
fn dual_scalar_row() -> SVector<f64, 8> {
    let mut r = SVector::<f64, 8>::zeros();
    r[4] = 1.0;
    r
}

/// Null space of a set of linear functionals on the 8 coordinates.
fn null_space(rows: &[SVector<f64, 8>]) -> Vec<SVector<f64, 8>> {
    let mut m = DMatrix::<f64>::zeros(8, 8);
    for (r, row) in rows.iter().enumerate() {
        for c in 0..8 {
            m[(r, c)] = row[c];
        }
    }
    let svd = m.svd(false, true);
    let vt = svd.v_t.expect("svd of small matrix");
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let mut basis = Vec::new();
    for k in 0..8 {
        if svd.singular_values[k] <= 1e-10 * smax.max(1.0) {
            let mut v = SVector::<f64, 8>::zeros();
            for c in 0..8 {
                v[c] = vt[(k, c)];
            }
            basis.push(v);
        }
    }
    basis
}

fn to_dq(v: &SVector<f64, 8>) -> DualQuaternion {
    DualQuaternion::from_coords([v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7]])
}

fn identity_coords() -> SVector<f64, 8> {
    let mut v = SVector::<f64, 8>::zeros();
    v[0] = 1.0;
    v
}

/// Random displacement satisfying the side-position conditions: the
/// displacement relative to the identity is a rotation whose axis meets
/// both transversals. The returned representative is deliberately left
/// unnormalized.
///
/// The solution set is a quadric cone with vertex at the identity (the
/// rotation condition is the quadric's tangent hyperplane there), so the
/// intersection line is anchored at a known smooth cone point — a
/// rotation about the common perpendicular, whose axis meets both lines
/// by construction — and a random null-space direction is shot from it.
pub fn sample_side_position<R: Rng>(
    cfg: &RotQuadConfig,
    rng: &mut R,
    tol: Tol,
) -> Result<DualQuaternion, RotQuadError> {
    let rows = vec![
        dual_scalar_row(),
        pairing_row(&cfg.n_line()),
        pairing_row(&cfg.m_line()),
    ];
    let basis = null_space(&rows);
    if basis.len() != 5 {
        return Err(RotQuadError::UnexpectedRank(8 - basis.len()));
    }
    let z_axis = PlueckerLine::through_point(Vector3::zeros(), Vector3::new(0.0, 0.0, 1.0))
        .expect("axis direction");
    for _ in 0..64 {
        let theta = rng.random_range(0.3..std::f64::consts::TAU - 0.3);
        let anchor = DualQuaternion::rotation_about_line(&z_axis, theta);
        let anchor_coords = SVector::<f64, 8>::from_column_slice(&anchor.coords());
        let mut dir = SVector::<f64, 8>::zeros();
        for b in &basis {
            dir += rng.random_range(-1.0..1.0) * b;
        }
        dir -= dir.dot(&anchor_coords) / anchor_coords.norm_squared() * anchor_coords;
        if dir.norm() < 1e-6 {
            continue;
        }
        let candidate = match second_study_intersection(&anchor, &to_dq(&dir), tol) {
            Ok(StudyIntersection::Second(a)) => a,
            Ok(StudyIntersection::Tangent) => continue,
            Err(DualQuatError::LineInQuadric) => continue,
            Err(e) => return Err(e.into()),
        };
        if is_rotation(&candidate, &DualQuaternion::identity(), tol) {
            return Ok(candidate);
        }
    }
    Err(RotQuadError::DegenerateDraw)
}

/// The unique fourth position completing `identity, a1, ?, a3`: six
/// linear conditions leave a projective line through the identity whose
/// second Study-quadric point is the answer.
pub fn solve_fourth_position(
    a1: &DualQuaternion,
    a3: &DualQuaternion,
    cfg: &RotQuadConfig,
    tol: Tol,
) -> Result<DualQuaternion, RotQuadError> {
    let n = cfg.n_line();
    let m = cfg.m_line();
    let mut rows = Vec::with_capacity(6);
    for a in [a1, a3] {
        let inv = a.inverse()?;
        let rm = right_mul_matrix(&inv);
        rows.push((rm.transpose() * dual_scalar_row()).into_owned());
        let motion = a.normalize()?;
        for line in [&n, &m] {
            let img = motion.act_line(line);
            rows.push((rm.transpose() * pairing_row(&img)).into_owned());
        }
    }
    let basis = null_space(&rows);
    if basis.len() != 2 {
        return Err(RotQuadError::UnexpectedRank(8 - basis.len()));
    }
    // Orthonormalize and express the identity inside the span.
    let u1 = basis[0] / basis[0].norm();
    let mut u2 = basis[1] - basis[1].dot(&u1) * u1;
    u2 /= u2.norm();
    let e0 = identity_coords();
    let c1 = e0.dot(&u1);
    let c2 = e0.dot(&u2);
    let inside = c1 * u1 + c2 * u2;
    if (inside - e0).norm() > 1e-7 {
        return Err(RotQuadError::UnexpectedRank(6));
    }
    let dir = -c2 * u1 + c1 * u2;
    if dir.norm() < 1e-9 {
        return Err(RotQuadError::DegenerateDraw);
    }
    match second_study_intersection(&DualQuaternion::identity(), &to_dq(&dir), tol)? {
        StudyIntersection::Second(a2) => Ok(a2),
        StudyIntersection::Tangent => Err(RotQuadError::TangentLine),
    }
}

/// Four positions, the first being the identity, any two neighbours
/// related by a rotation whose axis meets both transversals.
#[derive(Clone, Debug)]
pub struct RotationQuadrilateral {
    pub positions: [DualQuaternion; 4],
    pub cfg: RotQuadConfig,
}

impl RotationQuadrilateral {
    /// Samples the two side positions and solves for the fourth.
    pub fn build<R: Rng>(cfg: &RotQuadConfig, rng: &mut R, tol: Tol) -> Result<Self, RotQuadError> {
        for _ in 0..32 {
            let a1 = sample_side_position(cfg, rng, tol)?;
            let a3 = sample_side_position(cfg, rng, tol)?;
            if a1.proj_residual(&a3) < 1e-6 {
                continue;
            }
            let a2 = match solve_fourth_position(&a1, &a3, cfg, tol) {
                Ok(a2) => a2,
                Err(RotQuadError::TangentLine) | Err(RotQuadError::DegenerateDraw) => continue,
                Err(e) => return Err(e),
            };
            let quad = RotationQuadrilateral {
                positions: [DualQuaternion::identity(), a1, a2, a3],
                cfg: *cfg,
            };
            if quad.is_generic(tol) {
                return Ok(quad);
            }
        }
        Err(RotQuadError::DegenerateDraw)
    }

    fn is_generic(&self, tol: Tol) -> bool {
        for k in 0..4 {
            if !is_rotation(&self.positions[(k + 1) % 4], &self.positions[k], tol) {
                return false;
            }
        }
        true
    }

    /// Relative displacement from position `i` to position `j`.
    pub fn relative(&self, i: usize, j: usize) -> DualQuaternion {
        self.positions[j % 4].multiply(&self.positions[i % 4].inverse().expect("valid position"))
    }

    /// Moving-frame axis of the relative rotation `i → i+1`.
    pub fn moving_axis(&self, i: usize, tol: Tol) -> Result<PlueckerLine, RotQuadError> {
        Ok(rotation_axis_moving(
            &self.positions[(i + 1) % 4],
            &self.positions[i % 4],
            tol,
        )?)
    }

    /// Residual of the composition identity around the cycle.
    pub fn composition_residual(&self) -> f64 {
        let r01 = self.relative(0, 1);
        let r12 = self.relative(1, 2);
        let r23 = self.relative(2, 3);
        let r30 = self.relative(3, 0);
        r30.multiply(&r23)
            .multiply(&r12)
            .multiply(&r01)
            .proj_residual(&DualQuaternion::identity())
    }

    /// Largest Study pairing of any moving axis with the two transversal
    /// embeddings, normalized to unit scales.
    pub fn transversal_residual(&self, tol: Tol) -> Result<f64, RotQuadError> {
        let n = line_embedding(&self.cfg.n_line().unit());
        let m = line_embedding(&self.cfg.m_line().unit());
        let mut worst: f64 = 0.0;
        for i in 0..4 {
            let axis = self.moving_axis(i, tol)?.unit();
            let emb = line_embedding(&axis);
            for t in [&n, &m] {
                worst = worst.max(crate::dualquat::study_pairing(&emb, t).abs());
            }
        }
        Ok(worst)
    }

    /// Raw homogeneous images of a homogeneous point under the four
    /// positions plus the κ factors (squared primal norms).
    pub fn homologous_raw(&self, x: &HPoint) -> ([HPoint; 4], [f64; 4]) {
        let imgs = [
            self.positions[0].act_hpoint(x),
            self.positions[1].act_hpoint(x),
            self.positions[2].act_hpoint(x),
            self.positions[3].act_hpoint(x),
        ];
        let kappas = [
            self.positions[0].primal.norm_squared(),
            self.positions[1].primal.norm_squared(),
            self.positions[2].primal.norm_squared(),
            self.positions[3].primal.norm_squared(),
        ];
        (imgs, kappas)
    }
}

/// κ-weighted projected area on the first two coordinates,
/// `Σ (x_i·y_{i+1} − y_i·x_{i+1})·κ_{i+2}·κ_{i+3}` (indices mod 4), which
/// compensates the homogeneous scaling of the four images.
pub fn projected_area(points: &[HPoint; 4], kappas: &[f64; 4]) -> f64 {
    let mut s = 0.0;
    for i in 0..4 {
        let a = &points[i].0;
        let b = &points[(i + 1) % 4].0;
        s += (a[1] * b[2] - a[2] * b[1]) * kappas[(i + 2) % 4] * kappas[(i + 3) % 4];
    }
    s
}

/// The two homologous elementary quadrilaterals: images of the contact
/// elements at the two common-perpendicular feet (normals normalized to
/// unit length).
pub fn homologous_quads(
    quad: &RotationQuadrilateral,
    tol: Tol,
) -> Result<(ElementaryQuad, ElementaryQuad), RotQuadError> {
    let build = |foot: Vector3<f64>, dir: Vector3<f64>| -> Result<ElementaryQuad, RotQuadError> {
        let mut elems = Vec::with_capacity(4);
        for a in &quad.positions {
            let n = a.normalize()?;
            let p = n.act_point(foot);
            let d = n.act_direction(dir);
            elems.push(ContactElement::new(p, d)?);
        }
        Ok(ElementaryQuad::new(
            [elems[0], elems[1], elems[2], elems[3]],
            tol,
        )?)
    };
    let p_quad = build(quad.cfg.n_foot(), quad.cfg.n_dir())?;
    let q_quad = build(quad.cfg.m_foot(), quad.cfg.m_dir())?;
    Ok((p_quad, q_quad))
}

#[derive(Clone, Copy, Debug)]
pub struct Theorem2Trial {
    pub t: f64,
    pub e: f64,
    /// Relative residual of the area identity `(1+t²)e²·S0 + t²·S`.
    pub area_residual: f64,
    /// Relative deviation of the affine vertex-quad curvature from the
    /// expected value.
    pub curvature_residual: f64,
    pub curvature: f64,
    pub redraws: u32,
}

#[derive(Clone, Debug)]
pub struct Theorem2Report {
    pub trials: Vec<Theorem2Trial>,
    pub max_area_residual: f64,
    pub max_curvature_residual: f64,
}

impl Theorem2Report {
    pub fn pass(&self, eps: f64) -> bool {
        self.max_area_residual < eps && self.max_curvature_residual < eps
    }
}

#[derive(Clone, Copy, Debug)]
pub struct Theorem2Params {
    pub trials: usize,
    pub t_range: (f64, f64),
    pub e_range: (f64, f64),
    pub seed: u64,
}

impl Default for Theorem2Params {
    fn default() -> Self {
        Theorem2Params {
            trials: 100,
            t_range: (0.2, 2.0),
            e_range: (0.2, 2.0),
            seed: 42,
        }
    }
}

/// Monte-Carlo verification of the area-ratio identity and the curvature
/// value over random rotation quadrilaterals. Draws whose projected areas
/// degenerate are redrawn.
pub fn verify_theorem2(params: &Theorem2Params, tol: Tol) -> Result<Theorem2Report, RotQuadError> {
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut trials = Vec::with_capacity(params.trials);
    for _ in 0..params.trials {
        let t = rng.random_range(params.t_range.0..=params.t_range.1);
        let e = rng.random_range(params.e_range.0..=params.e_range.1);
        let cfg = RotQuadConfig::new(t, e)?;
        let mut redraws = 0u32;
        let trial = loop {
            let quad = RotationQuadrilateral::build(&cfg, &mut rng, tol)?;
            let (p_raw, kp) = quad.homologous_raw(&HPoint::finite(cfg.n_foot()));
            let (n_raw, kn) = quad.homologous_raw(&HPoint::ideal(cfg.n_dir()));
            let s = projected_area(&p_raw, &kp);
            let s0 = projected_area(&n_raw, &kn);
            // Genericity of the projection: both affine projected areas
            // must be visible at the configuration scale.
            let kprod: f64 = kp.iter().product();
            let s_affine = s / kprod;
            let s0_affine = s0 / kprod;
            let p_scale: f64 = p_raw
                .iter()
                .map(|p| (p.spatial() / p.weight()).norm())
                .fold(1.0, f64::max);
            let n_scale = 1.0 + t * t;
            if s_affine.abs() < 1e-6 * p_scale * p_scale || s0_affine.abs() < 1e-6 * n_scale {
                redraws += 1;
                if redraws > 64 {
                    return Err(RotQuadError::DegenerateDraw);
                }
                continue;
            }
            let t2 = t * t;
            // The signed area ratio S0/S equals -t²/((1+t²)e²); in
            // polynomial form (1+t²)e²·S0 + t²·S vanishes.
            let lhs = (1.0 + t2) * e * e * s0 + t2 * s;
            let area_residual = lhs.abs() / (t2 * s).abs();
            let (p_quad, _) = homologous_quads(&quad, tol)?;
            let k = gaussian_curvature(&p_quad, tol)?;
            let expected = cfg.expected_curvature();
            let curvature_residual = (k - expected).abs() / expected.abs();
            break Theorem2Trial {
                t,
                e,
                area_residual,
                curvature_residual,
                curvature: k,
                redraws,
            };
        };
        trials.push(trial);
    }
    let max_area_residual = trials.iter().map(|t| t.area_residual).fold(0.0, f64::max);
    let max_curvature_residual = trials
        .iter()
        .map(|t| t.curvature_residual)
        .fold(0.0, f64::max);
    Ok(Theorem2Report {
        trials,
        max_area_residual,
        max_curvature_residual,
    })
}

/// Relative spread of the homologous-quad curvature over repeated draws
/// at a fixed configuration, together with its mean.
pub fn curvature_spread(
    cfg: &RotQuadConfig,
    draws: usize,
    seed: u64,
    tol: Tol,
) -> Result<(f64, f64), RotQuadError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut values = Vec::with_capacity(draws);
    while values.len() < draws {
        let quad = RotationQuadrilateral::build(cfg, &mut rng, tol)?;
        let (p_quad, _) = match homologous_quads(&quad, tol) {
            Ok(q) => q,
            Err(_) => continue,
        };
        match gaussian_curvature(&p_quad, tol) {
            Ok(k) => values.push(k),
            Err(_) => continue,
        }
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let spread = values
        .iter()
        .map(|k| (k - mean).abs() / mean.abs())
        .fold(0.0, f64::max);
    Ok((spread, mean))
}
