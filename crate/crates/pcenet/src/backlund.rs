//! The neighbour construction and everything built on it: seed normals,
//! closure roots over the pencil of candidate normal lines, patch-wide
//! propagation, mate verification and the projectivity of the induced
//! line maps.
//!
//! One step of the construction takes a principal pair `(p_i, p_j)` and a
//! transform element `(q_i, m_i)` and produces `(q_j, m_j)` as the image
//! under the rotation about `h ∨ k`, where `h` is the meet of the two
//! source normals and `k` the meet of `M_i` with the bisector plane. The
//! rotation is realized as the composition of the reflections in the
//! bisector plane and in the plane spanned by `N_j` and `k`; both meets
//! may be ideal, which the homogeneous machinery handles transparently.

use nalgebra::Vector3;
use thiserror::Error;

use crate::geom::{
    common_perpendicular, cross_ratio, join_points, line_distance, line_meet_point,
    meet_plane_line, rotation_from_two_reflections, GeomError, HPlane, HPoint, Motion,
    PlueckerLine,
};
use crate::net::{
    check_principal_net, curvature_profile, element_bisector, gaussian_curvature,
    principal_residual, quad_at, ContactElement, CurvatureProfile, ElementaryQuad, NetError,
    NetPatch,
};
use crate::Tol;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BacklundError {
    #[error("not a principal pair (residual {0:.3e})")]
    NotPrincipalPair(f64),
    #[error("rotation plane is degenerate: k lies on the target normal")]
    GammaDegenerate,
    #[error("q0 is not in the tangent plane (residual {0:.3e})")]
    Q0NotInTangentPlane(f64),
    #[error("curvature incompatible with the seed distance (|sin| = {0:.3e})")]
    CurvatureIncompatible(f64),
    #[error("degenerate seed: {0}")]
    DegenerateSeed(&'static str),
    #[error("source net curvature is not constant")]
    InconsistentCurvature,
    #[error("closure violated at cell ({0}, {1}) (residual {2:.3e})")]
    ClosureViolation(usize, usize, f64),
    #[error("net dimensions differ")]
    DimensionMismatch,
    #[error("degenerate configuration: {0}")]
    DegenerateConfiguration(&'static str),
    #[error("geometry error: {0}")]
    Geom(#[from] GeomError),
    #[error("net error: {0}")]
    Net(#[from] NetError),
}

/// Diagnostic data of one neighbour step.
#[derive(Clone, Debug)]
pub struct TransformFrame {
    /// Meet of the two source normal lines (possibly ideal).
    pub h: HPoint,
    /// Meet of the transform normal with the bisector plane (possibly ideal).
    pub k: HPoint,
    pub beta: HPlane,
    pub gamma: HPlane,
    pub rotation: Motion,
    /// How far the rotation is from mapping the source element onto its
    /// neighbour; at machine level for valid input.
    pub residual: f64,
}

/// One neighbour step: maps the transform element `qi` attached to `pi`
/// to the element attached to `pj`.
pub fn neighbour_step(
    pi: &ContactElement,
    pj: &ContactElement,
    qi: &ContactElement,
    tol: Tol,
) -> Result<(ContactElement, TransformFrame), BacklundError> {
    let pres = principal_residual(pi, pj, tol)?;
    if pres > tol.rel {
        return Err(BacklundError::NotPrincipalPair(pres));
    }
    let beta = element_bisector(pi, pj, tol)?;
    let h = meet_plane_line(&beta, &pi.normal_line(), tol)?;
    // Transform element riding on the source normal line itself: the
    // rotation frame is ambiguous (k falls onto h), but every admissible
    // rotation agrees with the plain mirror on that line, so apply it.
    let ni_line = pi.normal_line();
    let mi_line = qi.normal_line();
    if ni_line.dir.cross(&mi_line.dir).norm() < tol.rel
        && line_distance(&ni_line, &mi_line) < tol.rel * (1.0 + pi.point().norm())
    {
        let mirror = crate::geom::reflection_matrix(&beta, tol)?;
        let img = pi.transform(&mirror);
        let scale = 1.0 + pj.point().norm();
        let residual =
            ((img.point() - pj.point()).norm() / scale).max((img.normal() - pj.normal()).norm());
        let qj = qi.transform(&mirror);
        return Ok((
            qj,
            TransformFrame {
                h,
                k: h,
                beta,
                gamma: beta,
                rotation: mirror,
                residual,
            },
        ));
    }
    let k = meet_plane_line(&beta, &qi.normal_line(), tol)?;
    // The rotation plane through N_j and k; equals p_j ∨ h ∨ k since h
    // lies on N_j, but stays valid when h coincides with p_j.
    let gamma = join_points(
        &HPoint::finite(pj.point()),
        &HPoint::ideal(pj.normal()),
        &k,
        tol,
    )
    .map_err(|_| BacklundError::GammaDegenerate)?;
    let rotation = rotation_from_two_reflections(&beta, &gamma, tol)?;
    let img = pi.transform(&rotation);
    let scale = 1.0 + pj.point().norm();
    let residual =
        ((img.point() - pj.point()).norm() / scale).max((img.normal() - pj.normal()).norm());
    if residual > 1e-6 {
        return Err(BacklundError::GammaDegenerate);
    }
    let qj = qi.transform(&rotation);
    Ok((
        qj,
        TransformFrame {
            h,
            k,
            beta,
            gamma,
            rotation,
            residual,
        },
    ))
}

/// Line-only variant: maps `m` through the step from `n0` to `n1`, the two
/// oriented source normals intersecting in a point.
pub fn neighbour_step_lines(
    n0: &PlueckerLine,
    n1: &PlueckerLine,
    m: &PlueckerLine,
    tol: Tol,
) -> Result<PlueckerLine, BacklundError> {
    let h = line_meet_point(n0, n1, tol)?;
    let d0 = n0.dir / n0.dir.norm();
    let d1 = n1.dir / n1.dir.norm();
    let mirror_normal = d0 - d1;
    if mirror_normal.norm() <= tol.rel {
        return Err(BacklundError::DegenerateConfiguration(
            "source lines share a direction",
        ));
    }
    let hp = h
        .affine(tol)
        .ok_or(BacklundError::DegenerateConfiguration("ideal source meet"))?;
    let beta = HPlane::from_point_normal(hp, mirror_normal)?;
    let k = meet_plane_line(&beta, m, tol)?;
    let gamma = join_points(&HPoint::finite(hp), &HPoint::ideal(d1), &k, tol)
        .map_err(|_| BacklundError::GammaDegenerate)?;
    let rotation = rotation_from_two_reflections(&beta, &gamma, tol)?;
    Ok(rotation.act_line(m))
}

/// Unit direction in the tangent plane of `p0`, orthogonal to the seed
/// chord, pointing along `(q0 - p0) × ... `: the positive-twist side.
fn seed_frame(
    p0: &ContactElement,
    q0: Vector3<f64>,
    tol: Tol,
) -> Result<(Vector3<f64>, f64, Vector3<f64>), BacklundError> {
    let chord = q0 - p0.point();
    let d = chord.norm();
    if d <= tol.abs {
        return Err(BacklundError::DegenerateSeed("q0 coincides with p0"));
    }
    let e = chord / d;
    let res = e.dot(&p0.normal()).abs();
    if res > 1e-7 {
        return Err(BacklundError::Q0NotInTangentPlane(res));
    }
    Ok((e, d, e.cross(&p0.normal())))
}

/// The two admissible unit normals at `q0` for a transform of a net with
/// constant negative curvature `k_curv`: both are orthogonal to the chord
/// and make the angle `asin(d * sqrt(-k_curv))` with the source normal.
/// Index 0 carries positive twist, index 1 negative.
pub fn seed_normals(
    p0: &ContactElement,
    q0: Vector3<f64>,
    k_curv: f64,
    tol: Tol,
) -> Result<[Vector3<f64>; 2], BacklundError> {
    let (_, d, w) = seed_frame(p0, q0, tol)?;
    if k_curv >= 0.0 {
        return Err(BacklundError::CurvatureIncompatible(0.0));
    }
    let sin_phi = d * (-k_curv).sqrt();
    if sin_phi > 1.0 + tol.rel {
        return Err(BacklundError::CurvatureIncompatible(sin_phi));
    }
    let sin_phi = sin_phi.min(1.0);
    if sin_phi <= tol.rel {
        return Err(BacklundError::DegenerateSeed("normal parallel to source"));
    }
    let cos_phi = (1.0 - sin_phi * sin_phi).sqrt();
    let n = p0.normal();
    Ok([cos_phi * n + sin_phi * w, cos_phi * n - sin_phi * w])
}

/// Outcome of running the neighbour construction once around a quad.
#[derive(Clone, Debug)]
pub struct ClosureCheck {
    /// Max of the return point distance and the return normal difference.
    pub residual: f64,
    /// The seed normal is parallel to the source normal: the cycle closes
    /// but the configuration is not a transform.
    pub parallel_normals: bool,
    /// The seed normal line meets the circle axis: same false positive.
    pub meets_circle_axis: bool,
    /// The returned element.
    pub returned: ContactElement,
}

impl ClosureCheck {
    pub fn false_positive(&self) -> bool {
        self.parallel_normals || self.meets_circle_axis
    }
}

/// Runs the neighbour construction around the cycle 0→1→2→3→0 and
/// compares the returned element with the seed. The two documented
/// false-positive configurations are flagged even when the residual
/// vanishes.
pub fn quad_closure(
    quad: &ElementaryQuad,
    q0: &ContactElement,
    tol: Tol,
) -> Result<ClosureCheck, BacklundError> {
    let mut q = *q0;
    for k in 0..4 {
        let (next, _) = neighbour_step(quad.element(k), quad.element(k + 1), &q, tol)?;
        q = next;
    }
    let residual = (q.point() - q0.point())
        .norm()
        .max((q.normal() - q0.normal()).norm());
    let n0 = quad.element(0).normal();
    let parallel_normals = q0.normal().cross(&n0).norm() < 1e-9;
    let axis = quad.circle().axis_line();
    let scale = 1.0 + q0.point().norm();
    let meets_circle_axis = line_distance(&q0.normal_line(), &axis) / scale < 1e-9;
    Ok(ClosureCheck {
        residual,
        parallel_normals,
        meets_circle_axis,
        returned: q,
    })
}

/// Why a root of the sampled closure condition does not count as a
/// transform normal.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpuriousKind {
    /// The meet `k12` becomes ideal: the cross-product condition vanishes
    /// without genuine closure.
    IdealMeet,
    /// The candidate is parallel to the source normal (the `λ → ∞`
    /// member): the cycle closes but the configuration is no transform.
    SourceParallel,
    /// The candidate meets the circle axis (the `λ = 0` member): same
    /// false positive.
    AxisMeeting,
}

/// One root of the closure condition over the pencil of candidate lines
/// through `q0` orthogonal to the chord.
#[derive(Clone, Debug)]
pub struct ClosureRoot {
    /// Pencil parameter: `m(λ) ∝ λ·n0 + w0` with `w0` the member meeting
    /// the circle axis, so `λ = 0` is the spurious axis-meeting line and
    /// `λ = ∞` the invalid normal-parallel line.
    pub lambda: f64,
    /// Unit direction of the root line, oriented towards the source normal.
    pub direction: Vector3<f64>,
    /// Set when the root is one of the documented non-transform cases.
    pub spurious: Option<SpuriousKind>,
    /// Norm of the normalized cross-product condition at the root.
    pub cross_residual: f64,
    /// Element residual of the full cycle at the root.
    pub cycle_residual: f64,
}

impl ClosureRoot {
    pub fn is_genuine(&self) -> bool {
        self.spurious.is_none()
    }
}

struct PencilScan<'a> {
    quad: &'a ElementaryQuad,
    q0: Vector3<f64>,
    n0: Vector3<f64>,
    /// Axis-meeting member of the pencil (the `λ = 0` anchor).
    w0: Vector3<f64>,
    /// Orthonormal complement of `n0` in the pencil plane; the scan runs
    /// in the `(u, n0)` basis so the sampling resolution is uniform over
    /// the geometric circle of directions even when `w0` is almost
    /// parallel to `n0`.
    u: Vector3<f64>,
    tol: Tol,
}

struct PencilSample {
    cross: Vector3<f64>,
    rho: f64,
    k12_idealness: f64,
}

impl<'a> PencilScan<'a> {
    fn new(quad: &'a ElementaryQuad, q0: Vector3<f64>, tol: Tol) -> Result<Self, BacklundError> {
        let p0 = quad.element(0);
        let (e, _, _) = seed_frame(p0, q0, tol)?;
        let n0 = p0.normal();
        let circle = quad.circle();
        let a = circle.axis_dir;
        // Direction of the pencil member through q0 that meets the circle
        // axis, possibly at its ideal point.
        let denom = a.dot(&e);
        let w0 = if denom.abs() <= 1e-12 {
            a
        } else {
            let t = (q0 - circle.center).dot(&e) / denom;
            let w = circle.center + t * a - q0;
            if w.norm() <= tol.abs {
                return Err(BacklundError::DegenerateSeed("q0 lies on the circle axis"));
            }
            w / w.norm()
        };
        let mut u = w0 - w0.dot(&n0) * n0;
        if u.norm() <= 1e-12 {
            return Err(BacklundError::DegenerateSeed(
                "axis-meeting member coincides with the source normal",
            ));
        }
        u /= u.norm();
        Ok(PencilScan {
            quad,
            q0,
            n0,
            w0,
            u,
            tol,
        })
    }

    fn direction(&self, psi: f64) -> Vector3<f64> {
        psi.cos() * self.u + psi.sin() * self.n0
    }

    /// Parameter of a pencil direction in the anchored form
    /// `m(λ) ∝ λ·n0 + w0`, so `λ = 0` is the axis-meeting member and
    /// `λ = ∞` the member parallel to the source normal.
    fn lambda_of(&self, dir: &Vector3<f64>) -> f64 {
        let g11 = 1.0;
        let g12 = self.w0.dot(&self.n0);
        let det = g11 - g12 * g12;
        let b1 = self.w0.dot(dir);
        let b2 = self.n0.dot(dir);
        let c_w = (b1 - b2 * g12) / det;
        let c_n = (b2 - b1 * g12) / det;
        c_n / c_w
    }

    /// The half-path closure condition of the pencil member at `psi`:
    /// the cross product of the second transform normal (via 0→1→2) with
    /// the direction of `k12 ∨ k23` (with `k23` from the path 0→3).
    fn eval(&self, psi: f64) -> Option<PencilSample> {
        let tol = self.tol;
        let m = self.direction(psi);
        let q0e = ContactElement::new(self.q0, m).ok()?;
        let e0 = self.quad.element(0);
        let e1 = self.quad.element(1);
        let e2 = self.quad.element(2);
        let e3 = self.quad.element(3);
        let (q1e, _) = neighbour_step(e0, e1, &q0e, tol).ok()?;
        let beta12 = element_bisector(e1, e2, tol).ok()?;
        let k12 = meet_plane_line(&beta12, &q1e.normal_line(), tol).ok()?;
        let (q2e, _) = neighbour_step(e1, e2, &q1e, tol).ok()?;
        let (q3e, _) = neighbour_step(e0, e3, &q0e, tol).ok()?;
        let beta23 = element_bisector(e2, e3, tol).ok()?;
        let k23 = meet_plane_line(&beta23, &q3e.normal_line(), tol).ok()?;
        let k12n = k12.0 / k12.0.norm();
        let k23n = k23.0 / k23.0.norm();
        // Ideal direction of the join k12 ∨ k23.
        let dir2 = k12n[0] * Vector3::new(k23n[1], k23n[2], k23n[3])
            - k23n[0] * Vector3::new(k12n[1], k12n[2], k12n[3]);
        let nd = dir2.norm();
        if nd.is_nan() || nd <= 1e-14 {
            return None;
        }
        let cross = q2e.normal().cross(&(dir2 / nd));
        let rho = cross.norm();
        if !rho.is_finite() {
            return None;
        }
        Some(PencilSample {
            cross,
            rho,
            k12_idealness: k12n[0].abs(),
        })
    }
}

/// Finds the pencil members whose neighbour-construction cycle closes:
/// samples the cross-product closure condition over the full pencil,
/// brackets its dips and refines each by bisection on the dominant
/// cross component. Roots where the homogenizing coordinate of `k12`
/// vanishes are marked spurious; generically exactly two non-spurious
/// roots remain.
pub fn closure_roots(
    quad: &ElementaryQuad,
    q0: Vector3<f64>,
    tol: Tol,
) -> Result<Vec<ClosureRoot>, BacklundError> {
    let scan = PencilScan::new(quad, q0, tol)?;
    const N: usize = 720;
    let psi_at = |i: usize| std::f64::consts::PI * (i as f64 + 0.5) / N as f64;
    let samples: Vec<Option<PencilSample>> = (0..N).map(|i| scan.eval(psi_at(i))).collect();
    let rho = |i: usize| samples[i].as_ref().map_or(f64::INFINITY, |s| s.rho);

    let mut roots: Vec<ClosureRoot> = Vec::new();
    for i in 0..N {
        let prev = (i + N - 1) % N;
        let next = (i + 1) % N;
        // Refine every local minimum; the final residual decides.
        if !(rho(i).is_finite() && rho(i) <= rho(prev) && rho(i) < rho(next)) {
            continue;
        }
        // Wrap-aware bracket in ψ around the dip.
        let lo = psi_at(i) - std::f64::consts::PI / N as f64;
        let hi = psi_at(i) + std::f64::consts::PI / N as f64;
        let Some(psi_root) = refine_root(&scan, lo, hi) else {
            continue;
        };
        let Some(sample) = scan.eval(psi_root) else {
            continue;
        };
        if sample.rho > 1e-8 {
            continue;
        }
        let mut dir = scan.direction(psi_root);
        dir /= dir.norm();
        if dir.dot(&scan.n0) < 0.0 || (dir.dot(&scan.n0).abs() < 1e-12 && dir.dot(&scan.w0) < 0.0) {
            dir = -dir;
        }
        // Deduplicate dips that refined into the same line.
        if roots.iter().any(|r| r.direction.cross(&dir).norm() < 1e-6) {
            continue;
        }
        let spurious = if sample.k12_idealness < 1e-6 {
            Some(SpuriousKind::IdealMeet)
        } else if dir.cross(&scan.n0).norm() < 1e-6 {
            Some(SpuriousKind::SourceParallel)
        } else if dir.cross(&scan.w0).norm() < 1e-6 {
            Some(SpuriousKind::AxisMeeting)
        } else {
            None
        };
        let cycle_residual = ContactElement::new(q0, dir)
            .ok()
            .and_then(|q0e| quad_closure(quad, &q0e, tol).ok())
            .map_or(f64::INFINITY, |c| c.residual);
        roots.push(ClosureRoot {
            lambda: scan.lambda_of(&dir),
            direction: dir,
            spurious,
            cross_residual: sample.rho,
            cycle_residual,
        });
    }
    Ok(roots)
}

/// Bisection on the sign of the dominant cross component; falls back to
/// golden-section on the norm when no component changes sign.
fn refine_root(scan: &PencilScan, mut lo: f64, mut hi: f64) -> Option<f64> {
    let slo = scan.eval(lo)?;
    let shi = scan.eval(hi)?;
    // Pick the component that is largest at the bracket ends.
    let mut comp = 0;
    let mut best = 0.0;
    for c in 0..3 {
        let m = slo.cross[c].abs().max(shi.cross[c].abs());
        if m > best {
            best = m;
            comp = c;
        }
    }
    if slo.cross[comp].signum() != shi.cross[comp].signum() {
        let mut flo = slo.cross[comp];
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            let smid = scan.eval(mid)?;
            if smid.cross[comp].signum() == flo.signum() {
                lo = mid;
                flo = smid.cross[comp];
            } else {
                hi = mid;
            }
            if hi - lo < 1e-15 {
                break;
            }
        }
        return Some(0.5 * (lo + hi));
    }
    // Golden-section on the norm.
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut a = lo;
    let mut b = hi;
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let mut fc = scan.eval(c)?.rho;
    let mut fd = scan.eval(d)?.rho;
    for _ in 0..120 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = scan.eval(c)?.rho;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = scan.eval(d)?.rho;
        }
        if b - a < 1e-14 {
            break;
        }
    }
    Some(0.5 * (a + b))
}

/// Fills a full transform patch from a seed element at grid index (0, 0):
/// along row 0 first, then up each column, asserting path independence on
/// every interior face.
pub fn propagate(
    source: &NetPatch,
    seed: &ContactElement,
    tol: Tol,
) -> Result<NetPatch, BacklundError> {
    let report = check_principal_net(source, tol);
    if !report.pass() {
        let worst = report
            .failed_edges()
            .iter()
            .map(|e| e.residual)
            .fold(0.0, f64::max);
        return Err(BacklundError::NotPrincipalPair(worst));
    }
    let profile = curvature_profile(source, tol);
    let p0 = source.get(0, 0);
    let (e, d, _) = seed_frame(p0, seed.point(), tol)?;
    match profile {
        CurvatureProfile::Varying { .. } => return Err(BacklundError::InconsistentCurvature),
        CurvatureProfile::Constant { value, .. } => {
            if value >= 0.0 {
                return Err(BacklundError::CurvatureIncompatible(0.0));
            }
            let perp = seed.normal().dot(&e).abs();
            if perp > 1e-7 {
                return Err(BacklundError::DegenerateSeed(
                    "seed normal not orthogonal to the chord",
                ));
            }
            let sin_phi = seed.normal().cross(&p0.normal()).norm();
            let want = d * (-value).sqrt();
            if (sin_phi - want).abs() > 1e-6 * want.max(1.0) {
                return Err(BacklundError::CurvatureIncompatible(sin_phi));
            }
        }
        // Degenerate source (all faces without curvature): only the seed
        // position is constrained; the angle is free.
        CurvatureProfile::Undefined => {}
    }

    let mut out = source.clone();
    out.set(0, 0, *seed);
    for i in 1..source.cols() {
        let prev = *out.get(i - 1, 0);
        let (next, _) = neighbour_step(source.get(i - 1, 0), source.get(i, 0), &prev, tol)?;
        out.set(i, 0, next);
    }
    for i in 0..source.cols() {
        for j in 1..source.rows() {
            let prev = *out.get(i, j - 1);
            let (next, _) = neighbour_step(source.get(i, j - 1), source.get(i, j), &prev, tol)?;
            out.set(i, j, next);
        }
    }
    // Path independence over every face: stepping the left neighbour
    // sideways must agree with the column propagation.
    for j in 1..source.rows() {
        for i in 1..source.cols() {
            let alt = neighbour_step(
                source.get(i - 1, j),
                source.get(i, j),
                out.get(i - 1, j),
                tol,
            )?
            .0;
            let res = alt.residual_to(out.get(i, j));
            if res > tol.rel * (1.0 + alt.point().norm()) {
                return Err(BacklundError::ClosureViolation(i, j, res));
            }
        }
    }
    // Final principality audit. Iterated propagation legitimately
    // accumulates rounding noise that the reflection test amplifies on
    // short edges, so the audit gate is two orders looser than the
    // user-facing verifier; genuine seed or closure errors overshoot it
    // by many orders.
    let audit = check_principal_net(
        &out,
        Tol {
            rel: tol.rel * 100.0,
            ..tol
        },
    );
    if !audit.pass() {
        let worst = audit
            .failed_edges()
            .iter()
            .map(|e| e.residual)
            .fold(0.0, f64::max);
        return Err(BacklundError::ClosureViolation(0, 0, worst));
    }
    let out = out.verify_principal(Tol {
        rel: tol.rel * 100.0,
        ..tol
    });
    Ok(out)
}

/// Per-index data of a mate comparison.
#[derive(Clone, Debug)]
pub struct MateIndexCheck {
    pub index: (usize, usize),
    pub distance: f64,
    pub cos_angle: f64,
    pub sin_angle: f64,
    /// Max of |e·n| and |e·m|: the common-tangent-line condition.
    pub perp_residual: f64,
}

#[derive(Clone, Debug)]
pub struct MatesReport {
    pub per_index: Vec<MateIndexCheck>,
    pub distance: f64,
    /// Relative spread of the point distances.
    pub distance_spread: f64,
    /// Max deviation of the (cos, sin) angle pairs from their median.
    pub angle_spread: f64,
    pub perp_residual: f64,
    /// Signed twist `sin(angle)/distance` from the medians.
    pub twist: f64,
    /// Max relative deviation of any face curvature of either net from
    /// `-twist²`; infinite when a face curvature is undefined.
    pub curvature_residual: f64,
}

impl MatesReport {
    pub fn pass(&self, tol: Tol) -> bool {
        self.distance_spread < tol.rel
            && self.angle_spread < tol.rel * 10.0
            && self.perp_residual < tol.rel * 10.0
            && self.curvature_residual < tol.twist_rel * 10.0
    }

    /// Signed angle between corresponding normals, from the medians.
    pub fn angle(&self) -> f64 {
        let (c, s) = self.median_angle();
        s.atan2(c)
    }

    /// Indices whose angle pair deviates from the median beyond `eps`.
    pub fn angle_outliers(&self, eps: f64) -> Vec<(usize, usize)> {
        let (c, s) = self.median_angle();
        self.per_index
            .iter()
            .filter(|m| ((m.cos_angle - c).powi(2) + (m.sin_angle - s).powi(2)).sqrt() > eps)
            .map(|m| m.index)
            .collect()
    }

    fn median_angle(&self) -> (f64, f64) {
        (
            median(self.per_index.iter().map(|m| m.cos_angle)),
            median(self.per_index.iter().map(|m| m.sin_angle)),
        )
    }
}

fn median(values: impl Iterator<Item = f64>) -> f64 {
    let mut v: Vec<f64> = values.collect();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    if v.is_empty() {
        return f64::NAN;
    }
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Checks the three mate conditions per index — constant distance,
/// constant signed angle (measured around the ray from the first net to
/// the second) and tangent planes meeting along the connecting line —
/// plus the curvature identity of every face of both nets.
pub fn verify_mates(a: &NetPatch, b: &NetPatch, tol: Tol) -> Result<MatesReport, BacklundError> {
    if a.rows() != b.rows() || a.cols() != b.cols() {
        return Err(BacklundError::DimensionMismatch);
    }
    let mut per_index = Vec::new();
    for j in 0..a.rows() {
        for i in 0..a.cols() {
            let pa = a.get(i, j);
            let pb = b.get(i, j);
            let chord = pb.point() - pa.point();
            let d = chord.norm();
            if d <= tol.abs {
                return Err(BacklundError::DegenerateConfiguration(
                    "corresponding points coincide",
                ));
            }
            let e = chord / d;
            let cos_angle = pa.normal().dot(&pb.normal());
            let sin_angle = pa.normal().cross(&pb.normal()).dot(&e);
            let perp_residual = e.dot(&pa.normal()).abs().max(e.dot(&pb.normal()).abs());
            per_index.push(MateIndexCheck {
                index: (i, j),
                distance: d,
                cos_angle,
                sin_angle,
                perp_residual,
            });
        }
    }
    let dist = median(per_index.iter().map(|m| m.distance));
    let distance_spread = per_index
        .iter()
        .map(|m| (m.distance - dist).abs() / dist)
        .fold(0.0, f64::max);
    let c = median(per_index.iter().map(|m| m.cos_angle));
    let s = median(per_index.iter().map(|m| m.sin_angle));
    let angle_spread = per_index
        .iter()
        .map(|m| ((m.cos_angle - c).powi(2) + (m.sin_angle - s).powi(2)).sqrt())
        .fold(0.0, f64::max);
    let perp_residual = per_index
        .iter()
        .map(|m| m.perp_residual)
        .fold(0.0, f64::max);
    let twist = s / dist;
    let want = -twist * twist;
    let mut curvature_residual: f64 = 0.0;
    for net in [a, b] {
        for j in 0..net.rows().saturating_sub(1) {
            for i in 0..net.cols().saturating_sub(1) {
                let res = quad_at(net, i, j, tol)
                    .ok()
                    .and_then(|q| gaussian_curvature(&q, tol).ok())
                    .map_or(f64::INFINITY, |k| (k - want).abs() / want.abs());
                curvature_residual = curvature_residual.max(res);
            }
        }
    }
    Ok(MatesReport {
        per_index,
        distance: dist,
        distance_spread,
        angle_spread,
        perp_residual,
        twist,
        curvature_residual,
    })
}

#[derive(Clone, Debug)]
pub struct ProjectivityReport {
    pub cross_ratio_in: f64,
    pub cross_ratio_out: f64,
    pub residual: f64,
}

impl ProjectivityReport {
    pub fn pass(&self, eps: f64) -> bool {
        self.residual < eps
    }
}

/// Cross ratio of four points of a projective line given in homogeneous
/// 2-vector coordinates, via 2×2 determinants.
fn cross_ratio_p1(p: [[f64; 2]; 4]) -> f64 {
    let det = |a: usize, b: usize| p[a][0] * p[b][1] - p[b][0] * p[a][1];
    (det(0, 2) * det(1, 3)) / (det(0, 3) * det(1, 2))
}

/// Orthonormal coordinates of Plüccker 6-vectors in the span of the
/// given family, via an SVD of the stacked, normalized rows.
fn span_coordinates(lines: &[PlueckerLine], rank: usize) -> Option<Vec<Vec<f64>>> {
    let rows = lines.len();
    let mut m = nalgebra::DMatrix::<f64>::zeros(rows, 6);
    for (r, l) in lines.iter().enumerate() {
        let u = l.unit();
        let v = [
            u.dir.x, u.dir.y, u.dir.z, u.moment.x, u.moment.y, u.moment.z,
        ];
        for (c, x) in v.iter().enumerate() {
            m[(r, c)] = *x;
        }
    }
    let svd = m.clone().svd(false, true);
    let vt = svd.v_t?;
    let sv = &svd.singular_values;
    let effective = sv.iter().filter(|s| **s > 1e-9 * sv[0]).count();
    if effective != rank {
        return None;
    }
    let mut coords = Vec::with_capacity(rows);
    for r in 0..rows {
        let mut c = vec![0.0; rank];
        for (k, ck) in c.iter_mut().enumerate() {
            for j in 0..6 {
                *ck += m[(r, j)] * vt[(k, j)];
            }
        }
        coords.push(c);
    }
    Some(coords)
}

/// Cross ratio of the first four lines within their quadratically
/// parametrized family; the fifth line serves as the projection center
/// when the family spans a conic.
fn family_cross_ratio(lines: &[PlueckerLine; 5]) -> Option<f64> {
    if let Some(coords) = span_coordinates(lines.as_slice(), 2) {
        // Degenerate family: a pencil; the coordinates are already on P¹.
        let p = [
            [coords[0][0], coords[0][1]],
            [coords[1][0], coords[1][1]],
            [coords[2][0], coords[2][1]],
            [coords[3][0], coords[3][1]],
        ];
        return Some(cross_ratio_p1(p));
    }
    let coords = span_coordinates(lines.as_slice(), 3)?;
    let w5 = Vector3::new(coords[4][0], coords[4][1], coords[4][2]);
    // Rays from the fifth family point to the other four, as a pencil in
    // the plane of the conic.
    let mut dirs = [[0.0; 2]; 4];
    let mut basis: Option<(Vector3<f64>, Vector3<f64>)> = None;
    for k in 0..4 {
        let w = Vector3::new(coords[k][0], coords[k][1], coords[k][2]);
        let ray = w5.cross(&w);
        let (b1, b2) = match basis {
            Some(b) => b,
            None => {
                let b1 = ray / ray.norm();
                // Any direction in the pencil plane independent of b1.
                let probe = Vector3::new(coords[1][0], coords[1][1], coords[1][2]);
                let r2 = w5.cross(&probe);
                let mut b2 = r2 - r2.dot(&b1) * b1;
                if b2.norm() < 1e-9 {
                    let probe = Vector3::new(coords[2][0], coords[2][1], coords[2][2]);
                    let r3 = w5.cross(&probe);
                    b2 = r3 - r3.dot(&b1) * b1;
                }
                let b = (b1, b2 / b2.norm());
                basis = Some(b);
                b
            }
        };
        dirs[k] = [ray.dot(&b1), ray.dot(&b2)];
    }
    Some(cross_ratio_p1(dirs))
}

/// Certifies that one neighbour step acts projectively on the set of
/// lines obtained by rotating `m0` about `n0`: the cross ratio of four
/// rotation parameters `λ` (angle `2·atan λ`) must equal the cross ratio
/// of the four image lines within their family.
pub fn projectivity_check(
    n0: &PlueckerLine,
    n1: &PlueckerLine,
    m0: &PlueckerLine,
    lambdas: [f64; 4],
    tol: Tol,
) -> Result<ProjectivityReport, BacklundError> {
    let cp = common_perpendicular(n0, m0, tol)?;
    if cp.distance <= tol.rel {
        return Err(BacklundError::DegenerateConfiguration("m0 meets n0"));
    }
    // A fifth parameter distinct from the four inputs, for the conic
    // projection.
    let mut lam5 = 0.37;
    while lambdas.iter().any(|l| (l - lam5).abs() < 1e-3) {
        lam5 += 0.77;
    }
    let map = |lam: f64| -> Result<PlueckerLine, BacklundError> {
        let theta = 2.0 * lam.atan();
        let rot = Motion::rotation_about_line(n0, theta);
        neighbour_step_lines(n0, n1, &rot.act_line(m0), tol)
    };
    let outputs = [
        map(lambdas[0])?,
        map(lambdas[1])?,
        map(lambdas[2])?,
        map(lambdas[3])?,
        map(lam5)?,
    ];
    let cr_in = cross_ratio(lambdas[0], lambdas[1], lambdas[2], lambdas[3]);
    let cr_out = family_cross_ratio(&outputs)
        .ok_or(BacklundError::DegenerateConfiguration("image family rank"))?;
    let residual = (cr_in - cr_out).abs() / cr_in.abs().max(1.0);
    Ok(ProjectivityReport {
        cross_ratio_in: cr_in,
        cross_ratio_out: cr_out,
        residual,
    })
}

/// A fixed line of the composed once-around-the-quad line map.
#[derive(Clone, Debug)]
pub struct EtaFixedLine {
    /// Rotation angle of the fixed member within the input rotation set.
    pub theta: f64,
    pub line: PlueckerLine,
    /// Distance of the fixed line from the circle axis, relative to scale.
    pub axis_distance: f64,
    /// Residual of the fixed-line property.
    pub residual: f64,
}

/// Applies the line-only neighbour construction around the quad.
pub fn eta_map(
    quad: &ElementaryQuad,
    m: &PlueckerLine,
    tol: Tol,
) -> Result<PlueckerLine, BacklundError> {
    let mut line = *m;
    for k in 0..4 {
        let a = quad.element(k);
        let b = quad.element(k + 1);
        let beta = element_bisector(a, b, tol)?;
        let kpt = meet_plane_line(&beta, &line, tol)?;
        let gamma = join_points(
            &HPoint::finite(b.point()),
            &HPoint::ideal(b.normal()),
            &kpt,
            tol,
        )
        .map_err(|_| BacklundError::GammaDegenerate)?;
        let rot = rotation_from_two_reflections(&beta, &gamma, tol)?;
        line = rot.act_line(&line);
    }
    Ok(line)
}

/// Finds the fixed lines of the composed map over the rotation set of
/// `m0` about the first normal of the quad, by scanning the full turn and
/// refining the dips of the fixed-line residual.
pub fn eta_fixed_lines(
    quad: &ElementaryQuad,
    m0: &PlueckerLine,
    tol: Tol,
) -> Result<Vec<EtaFixedLine>, BacklundError> {
    let n0 = quad.element(0).normal_line();
    let member = |theta: f64| Motion::rotation_about_line(&n0, theta).act_line(m0);
    let residual_vec = |theta: f64| -> Option<[f64; 12]> {
        let m = member(theta);
        let img = eta_map(quad, &m, tol).ok()?;
        let a = m.unit();
        let b = img.unit();
        Some([
            b.dir.x - a.dir.x,
            b.dir.y - a.dir.y,
            b.dir.z - a.dir.z,
            b.moment.x - a.moment.x,
            b.moment.y - a.moment.y,
            b.moment.z - a.moment.z,
            a.dir.x,
            a.dir.y,
            a.dir.z,
            a.moment.x,
            a.moment.y,
            a.moment.z,
        ])
    };
    let rho = |theta: f64| -> f64 {
        residual_vec(theta).map_or(f64::INFINITY, |v| {
            v[..6].iter().map(|x| x * x).sum::<f64>().sqrt()
        })
    };
    const N: usize = 720;
    let theta_at = |i: usize| 2.0 * std::f64::consts::PI * (i as f64 + 0.5) / N as f64;
    let vals: Vec<f64> = (0..N).map(|i| rho(theta_at(i))).collect();
    let mut fixed = Vec::new();
    for i in 0..N {
        let prev = vals[(i + N - 1) % N];
        let next = vals[(i + 1) % N];
        // Refine every local minimum; keep those that reach a true zero.
        if !(vals[i].is_finite() && vals[i] <= prev && vals[i] < next) {
            continue;
        }
        let mut lo = theta_at(i) - 2.0 * std::f64::consts::PI / N as f64;
        let mut hi = theta_at(i) + 2.0 * std::f64::consts::PI / N as f64;
        // Bisect on the dominant component of the difference vector.
        let (vlo, vhi) = match (residual_vec(lo), residual_vec(hi)) {
            (Some(a), Some(b)) => (a, b),
            _ => continue,
        };
        let mut comp = 0;
        let mut best = 0.0;
        for c in 0..6 {
            let m = vlo[c].abs().max(vhi[c].abs());
            if m > best {
                best = m;
                comp = c;
            }
        }
        let theta_root = if vlo[comp].signum() != vhi[comp].signum() {
            let mut flo = vlo[comp];
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                let Some(vm) = residual_vec(mid) else { break };
                if vm[comp].signum() == flo.signum() {
                    lo = mid;
                    flo = vm[comp];
                } else {
                    hi = mid;
                }
            }
            0.5 * (lo + hi)
        } else {
            // Golden-section fallback.
            let phi = (5f64.sqrt() - 1.0) / 2.0;
            let (mut a, mut b) = (lo, hi);
            let mut c = b - phi * (b - a);
            let mut d = a + phi * (b - a);
            let (mut fc, mut fd) = (rho(c), rho(d));
            for _ in 0..100 {
                if fc < fd {
                    b = d;
                    d = c;
                    fd = fc;
                    c = b - phi * (b - a);
                    fc = rho(c);
                } else {
                    a = c;
                    c = d;
                    fc = fd;
                    d = a + phi * (b - a);
                    fd = rho(d);
                }
            }
            0.5 * (a + b)
        };
        let res = rho(theta_root);
        if res > 1e-8 {
            continue;
        }
        let line = member(theta_root);
        if fixed
            .iter()
            .any(|f: &EtaFixedLine| f.line.unit().oriented_residual(&line.unit()) < 1e-6)
        {
            continue;
        }
        let axis = quad.circle().axis_line();
        let scale = 1.0 + line.point_nearest_origin().norm();
        fixed.push(EtaFixedLine {
            theta: theta_root.rem_euclid(2.0 * std::f64::consts::PI),
            line,
            axis_distance: line_distance(&line, &axis) / scale,
            residual: res,
        });
    }
    Ok(fixed)
}

/// Signed chord/normal data of one corresponding pair (as used by mate
/// verification and the Bennett checks).
pub fn pair_twist(a: &ContactElement, b: &ContactElement) -> Option<f64> {
    let chord = b.point() - a.point();
    let d = chord.norm();
    if d == 0.0 {
        return None;
    }
    let e = chord / d;
    Some(a.normal().cross(&b.normal()).dot(&e) / d)
}
