//! Contact elements, net patches and elementary quadrilaterals.
//!
//! A contact element is a point with a unit normal. A net patch is a
//! rectangular grid of contact elements indexed by `(i, j)` with `i`
//! running over columns and `j` over rows. Neighbouring elements of a
//! principal net share an oriented tangent sphere, which makes the four
//! vertices of every grid face concyclic and puts the four unit normals
//! on a circle of the unit sphere.

use nalgebra::Vector3;
use thiserror::Error;

use crate::geom::{
    bisector_plane, meet_plane_line, reflection_matrix, GeomError, HPlane, HPoint, Motion,
    PlueckerLine,
};
use crate::Tol;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NetError {
    #[error("normal vector must be nonzero")]
    ZeroNormal,
    #[error("grid dimensions do not match the element count")]
    DimensionMismatch,
    #[error("the four points are not concyclic (residual {0:.3e})")]
    NotConcyclic(f64),
    #[error("degenerate circle through near-collinear points")]
    DegenerateCircle,
    #[error("degenerate quad: vanishing vertex area, curvature undefined")]
    DegenerateQuad,
    #[error("identical contact elements")]
    IdenticalElements,
    #[error("quad closure violated (residual {0:.3e})")]
    ClosureViolation(f64),
    #[error("geometry error: {0}")]
    Geom(#[from] GeomError),
}

/// A point of Euclidean 3-space with a unit normal vector.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ContactElement {
    point: Vector3<f64>,
    normal: Vector3<f64>,
}

impl ContactElement {
    /// Builds a contact element, normalizing the given normal vector.
    pub fn new(point: Vector3<f64>, normal: Vector3<f64>) -> Result<Self, NetError> {
        let n = normal.norm();
        if n == 0.0 {
            return Err(NetError::ZeroNormal);
        }
        Ok(ContactElement {
            point,
            normal: normal / n,
        })
    }

    pub fn point(&self) -> Vector3<f64> {
        self.point
    }

    pub fn normal(&self) -> Vector3<f64> {
        self.normal
    }

    /// The oriented normal line through the point.
    pub fn normal_line(&self) -> PlueckerLine {
        PlueckerLine::through_point(self.point, self.normal).expect("unit normal")
    }

    /// The oriented tangent plane.
    pub fn tangent_plane(&self) -> HPlane {
        HPlane::from_point_normal(self.point, self.normal).expect("unit normal")
    }

    pub fn transform(&self, m: &Motion) -> ContactElement {
        let p = m.act_point(self.point);
        let n = m.act_direction(self.normal);
        ContactElement::new(p, n).expect("isometries preserve nonzero normals")
    }

    /// Max of point distance and normal difference to another element.
    pub fn residual_to(&self, other: &ContactElement) -> f64 {
        (self.point - other.point)
            .norm()
            .max((self.normal - other.normal).norm())
    }
}

/// Rectangular grid of contact elements; `i` indexes columns (`0..cols`),
/// `j` indexes rows (`0..rows`), stored row-major.
#[derive(Clone, Debug)]
pub struct NetPatch {
    rows: usize,
    cols: usize,
    elements: Vec<ContactElement>,
    principal: bool,
}

impl NetPatch {
    pub fn from_elements(
        rows: usize,
        cols: usize,
        elements: Vec<ContactElement>,
    ) -> Result<Self, NetError> {
        if rows == 0 || cols == 0 || elements.len() != rows * cols {
            return Err(NetError::DimensionMismatch);
        }
        Ok(NetPatch {
            rows,
            cols,
            elements,
            principal: false,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &ContactElement {
        &self.elements[j * self.cols + i]
    }

    pub fn elements(&self) -> &[ContactElement] {
        &self.elements
    }

    /// Whether the patch was verified principal on construction.
    pub fn is_principal(&self) -> bool {
        self.principal
    }

    /// Re-checks all edges and records the outcome in the principal flag.
    pub fn verify_principal(mut self, tol: Tol) -> Self {
        self.principal = check_principal_net(&self, tol).pass();
        self
    }

    pub(crate) fn set(&mut self, i: usize, j: usize, e: ContactElement) {
        self.elements[j * self.cols + i] = e;
    }
}

/// Plane mirror exchanging two contact elements of a principal pair: the
/// bisector plane of the two points, or, for coincident points, the plane
/// through the point orthogonal to the difference of the normals.
pub fn element_bisector(
    a: &ContactElement,
    b: &ContactElement,
    tol: Tol,
) -> Result<HPlane, NetError> {
    let scale = 1.0 + a.point.norm().max(b.point.norm());
    if (a.point - b.point).norm() > tol.rel * scale {
        Ok(bisector_plane(
            &HPoint::finite(a.point),
            &HPoint::finite(b.point),
            tol,
        )?)
    } else {
        let dn = a.normal - b.normal;
        if dn.norm() <= tol.rel {
            return Err(NetError::IdenticalElements);
        }
        Ok(HPlane::from_point_normal(a.point, dn).expect("nonzero normal difference"))
    }
}

/// Residual of the principal-pair property: how far the reflection in the
/// element bisector is from mapping `a` onto `b`. The point part is
/// normalized by the configuration scale.
pub fn principal_residual(
    a: &ContactElement,
    b: &ContactElement,
    tol: Tol,
) -> Result<f64, NetError> {
    let beta = element_bisector(a, b, tol)?;
    let r = reflection_matrix(&beta, tol)?;
    let scale = 1.0 + a.point.norm().max(b.point.norm());
    let point_res = (r.act_point(a.point) - b.point).norm() / scale;
    let img_n = r.act_direction(a.normal);
    let normal_res = (img_n / img_n.norm() - b.normal).norm();
    Ok(point_res.max(normal_res))
}

/// Whether two contact elements share an oriented tangent sphere.
pub fn is_principal_pair(a: &ContactElement, b: &ContactElement, tol: Tol) -> bool {
    match principal_residual(a, b, tol) {
        Ok(r) => r < tol.rel,
        Err(_) => false,
    }
}

/// Circle in space: center, unit axis direction and radius.
#[derive(Clone, Copy, Debug)]
pub struct Circle {
    pub center: Vector3<f64>,
    pub axis_dir: Vector3<f64>,
    pub radius: f64,
}

impl Circle {
    /// The circle's axis as an oriented line.
    pub fn axis_line(&self) -> PlueckerLine {
        PlueckerLine::through_point(self.center, self.axis_dir).expect("unit axis")
    }

    /// Distance from a point to the circle (not to its plane).
    pub fn distance_to_point(&self, p: Vector3<f64>) -> f64 {
        let d = p - self.center;
        let axial = d.dot(&self.axis_dir);
        let radial = (d - axial * self.axis_dir).norm();
        (axial * axial + (radial - self.radius) * (radial - self.radius)).sqrt()
    }
}

/// Circle through three points; near-collinear triples are refused.
pub fn circle_through(
    p0: Vector3<f64>,
    p1: Vector3<f64>,
    p2: Vector3<f64>,
    tol: Tol,
) -> Result<Circle, NetError> {
    let d1 = p1 - p0;
    let d2 = p2 - p0;
    let n = d1.cross(&d2);
    let scale = d1.norm().max(d2.norm());
    if scale == 0.0 || n.norm() <= tol.rel * scale * scale {
        return Err(NetError::DegenerateCircle);
    }
    // Equidistance from p0/p1 and p0/p2 within the plane of the triple.
    let m = nalgebra::Matrix3::from_rows(&[
        (2.0 * d1).transpose(),
        (2.0 * d2).transpose(),
        n.transpose(),
    ]);
    let rhs = Vector3::new(
        p1.norm_squared() - p0.norm_squared(),
        p2.norm_squared() - p0.norm_squared(),
        n.dot(&p0),
    );
    let center = m.lu().solve(&rhs).ok_or(NetError::DegenerateCircle)?;
    let radius = ((center - p0).norm() + (center - p1).norm() + (center - p2).norm()) / 3.0;
    Ok(Circle {
        center,
        axis_dir: n / n.norm(),
        radius,
    })
}

/// Four cyclically ordered contact elements of one grid face, with the
/// circle through their vertices and the meets of neighbouring normals.
#[derive(Clone, Debug)]
pub struct ElementaryQuad {
    elements: [ContactElement; 4],
    circle: Circle,
    normal_meets: [HPoint; 4],
}

impl ElementaryQuad {
    pub fn new(elements: [ContactElement; 4], tol: Tol) -> Result<Self, NetError> {
        let pts = [
            elements[0].point(),
            elements[1].point(),
            elements[2].point(),
            elements[3].point(),
        ];
        let circle = circle_through(pts[0], pts[1], pts[2], tol)?;
        let res = circle.distance_to_point(pts[3]) / circle.radius;
        if res > tol.rel * 10.0 {
            return Err(NetError::NotConcyclic(res));
        }
        let mut normal_meets = [HPoint::finite(Vector3::zeros()); 4];
        for k in 0..4 {
            let a = &elements[k];
            let b = &elements[(k + 1) % 4];
            let beta = element_bisector(a, b, tol)?;
            normal_meets[k] = meet_plane_line(&beta, &a.normal_line(), tol)?;
        }
        Ok(ElementaryQuad {
            elements,
            circle,
            normal_meets,
        })
    }

    pub fn elements(&self) -> &[ContactElement; 4] {
        &self.elements
    }

    pub fn element(&self, k: usize) -> &ContactElement {
        &self.elements[k % 4]
    }

    pub fn circle(&self) -> &Circle {
        &self.circle
    }

    /// Meet of the normal lines of elements `k` and `k+1`; ideal for the
    /// mirror-symmetric parallel case.
    pub fn normal_meet(&self, k: usize) -> &HPoint {
        &self.normal_meets[k % 4]
    }

    pub fn points(&self) -> [Vector3<f64>; 4] {
        [
            self.elements[0].point(),
            self.elements[1].point(),
            self.elements[2].point(),
            self.elements[3].point(),
        ]
    }

    pub fn normals(&self) -> [Vector3<f64>; 4] {
        [
            self.elements[0].normal(),
            self.elements[1].normal(),
            self.elements[2].normal(),
            self.elements[3].normal(),
        ]
    }

    /// Concyclicity residual of the fourth vertex, relative to the radius.
    pub fn concyclicity_residual(&self) -> f64 {
        self.circle.distance_to_point(self.elements[3].point()) / self.circle.radius
    }

    /// Volume-based coplanarity residual of the four unit normals viewed
    /// as points of the unit sphere, normalized by their spread.
    pub fn normals_coplanarity_residual(&self) -> f64 {
        let n = self.normals();
        let d1 = n[1] - n[0];
        let d2 = n[2] - n[0];
        let d3 = n[3] - n[0];
        let spread = d1.norm().max(d2.norm()).max(d3.norm());
        if spread == 0.0 {
            return 0.0;
        }
        d1.cross(&d2).dot(&d3).abs() / (spread * spread * spread)
    }

    /// Largest skewness of neighbouring normal lines, relative to scale.
    pub fn normal_skewness_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for k in 0..4 {
            let a = self.elements[k].normal_line();
            let b = self.elements[(k + 1) % 4].normal_line();
            let d = crate::geom::line_distance(&a, &b);
            let scale = 1.0 + self.elements[k].point().norm();
            worst = worst.max(d / scale);
        }
        worst
    }

    pub fn transform(&self, m: &Motion, tol: Tol) -> Result<ElementaryQuad, NetError> {
        ElementaryQuad::new(
            [
                self.elements[0].transform(m),
                self.elements[1].transform(m),
                self.elements[2].transform(m),
                self.elements[3].transform(m),
            ],
            tol,
        )
    }
}

/// Vector area `½ Σ v_i × v_{i+1}` of a closed quadrilateral; invariant
/// under translation of all vertices.
pub fn vector_area(vs: &[Vector3<f64>; 4]) -> Vector3<f64> {
    let mut a = Vector3::zeros();
    for k in 0..4 {
        a += vs[k].cross(&vs[(k + 1) % 4]);
    }
    0.5 * a
}

/// Gaussian curvature of an elementary quadrilateral: the ratio of the
/// normal-polygon vector area to the vertex-polygon vector area, signed
/// by their mutual orientation.
pub fn gaussian_curvature(quad: &ElementaryQuad, tol: Tol) -> Result<f64, NetError> {
    let ap = vector_area(&quad.points());
    let an = vector_area(&quad.normals());
    let pts = quad.points();
    let mut diam: f64 = 0.0;
    for a in 0..4 {
        for b in (a + 1)..4 {
            diam = diam.max((pts[a] - pts[b]).norm());
        }
    }
    if ap.norm() <= tol.rel * diam * diam {
        return Err(NetError::DegenerateQuad);
    }
    let sign = if an.dot(&ap) >= 0.0 { 1.0 } else { -1.0 };
    Ok(sign * an.norm() / ap.norm())
}

/// Builds the elementary quadrilateral over four concyclic, cyclically
/// ordered points from the first normal: the remaining normals follow by
/// reflection in the successive bisector planes, and the chain closes.
pub fn build_quad(
    points: [Vector3<f64>; 4],
    n0: Vector3<f64>,
    tol: Tol,
) -> Result<ElementaryQuad, NetError> {
    let circle = circle_through(points[0], points[1], points[2], tol)?;
    let res = circle.distance_to_point(points[3]) / circle.radius;
    if res > tol.rel * 10.0 {
        return Err(NetError::NotConcyclic(res));
    }
    let n0 = n0 / n0.norm();
    let mut normals = [n0; 4];
    for k in 0..3 {
        let beta = bisector_plane(
            &HPoint::finite(points[k]),
            &HPoint::finite(points[k + 1]),
            tol,
        )?;
        let r = reflection_matrix(&beta, tol)?;
        let img = r.act_direction(normals[k]);
        normals[k + 1] = img / img.norm();
    }
    // The final reflection must return the first normal.
    let beta30 = bisector_plane(&HPoint::finite(points[3]), &HPoint::finite(points[0]), tol)?;
    let back = reflection_matrix(&beta30, tol)?.act_direction(normals[3]);
    let closure = (back / back.norm() - n0).norm();
    if closure > 1e-10 {
        return Err(NetError::ClosureViolation(closure));
    }
    let elements = [
        ContactElement::new(points[0], normals[0])?,
        ContactElement::new(points[1], normals[1])?,
        ContactElement::new(points[2], normals[2])?,
        ContactElement::new(points[3], normals[3])?,
    ];
    ElementaryQuad::new(elements, tol)
}

/// Elementary quadrilateral over the grid face with lower-left corner
/// `(i, j)`, in cyclic order.
pub fn quad_at(net: &NetPatch, i: usize, j: usize, tol: Tol) -> Result<ElementaryQuad, NetError> {
    ElementaryQuad::new(
        [
            *net.get(i, j),
            *net.get(i + 1, j),
            *net.get(i + 1, j + 1),
            *net.get(i, j + 1),
        ],
        tol,
    )
}

/// Per-edge outcome of the principal-pair test.
#[derive(Clone, Debug)]
pub struct EdgeCheck {
    pub from: (usize, usize),
    pub to: (usize, usize),
    pub residual: f64,
    pub pass: bool,
}

/// Per-face outcome: concyclicity, normal coplanarity, curvature.
#[derive(Clone, Debug)]
pub struct QuadCheck {
    pub cell: (usize, usize),
    pub concyclicity: Option<f64>,
    pub normal_coplanarity: Option<f64>,
    pub curvature: Option<f64>,
    pub degenerate: bool,
}

#[derive(Clone, Debug)]
pub struct PrincipalReport {
    pub edges: Vec<EdgeCheck>,
    pub quads: Vec<QuadCheck>,
}

impl PrincipalReport {
    /// All edges pass; degenerate faces are tolerated, failed ones are not.
    pub fn pass(&self) -> bool {
        self.edges.iter().all(|e| e.pass)
    }

    pub fn failed_edges(&self) -> Vec<&EdgeCheck> {
        self.edges.iter().filter(|e| !e.pass).collect()
    }
}

/// Checks every horizontal and vertical edge for the principal-pair
/// property and reports per-face circle, normal and curvature data.
pub fn check_principal_net(net: &NetPatch, tol: Tol) -> PrincipalReport {
    let mut edges = Vec::new();
    for j in 0..net.rows() {
        for i in 0..net.cols() {
            let mut push = |to: (usize, usize)| {
                let a = net.get(i, j);
                let b = net.get(to.0, to.1);
                let residual = principal_residual(a, b, tol).unwrap_or(f64::INFINITY);
                edges.push(EdgeCheck {
                    from: (i, j),
                    to,
                    residual,
                    pass: residual < tol.rel,
                });
            };
            if i + 1 < net.cols() {
                push((i + 1, j));
            }
            if j + 1 < net.rows() {
                push((i, j + 1));
            }
        }
    }
    let mut quads = Vec::new();
    for j in 0..net.rows().saturating_sub(1) {
        for i in 0..net.cols().saturating_sub(1) {
            match quad_at(net, i, j, tol) {
                Ok(q) => {
                    let curvature = gaussian_curvature(&q, tol).ok();
                    quads.push(QuadCheck {
                        cell: (i, j),
                        concyclicity: Some(q.concyclicity_residual()),
                        normal_coplanarity: Some(q.normals_coplanarity_residual()),
                        curvature,
                        degenerate: false,
                    });
                }
                Err(_) => quads.push(QuadCheck {
                    cell: (i, j),
                    concyclicity: None,
                    normal_coplanarity: None,
                    curvature: None,
                    degenerate: true,
                }),
            }
        }
    }
    PrincipalReport { edges, quads }
}

/// Curvature structure of a patch across all grid faces.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CurvatureProfile {
    /// No face carries a well-defined curvature.
    Undefined,
    /// All faces carry the same curvature within the relative spread.
    Constant { value: f64, spread: f64 },
    /// Defined but varying beyond tolerance.
    Varying { min: f64, max: f64 },
}

pub fn curvature_profile(net: &NetPatch, tol: Tol) -> CurvatureProfile {
    let mut values = Vec::new();
    for j in 0..net.rows().saturating_sub(1) {
        for i in 0..net.cols().saturating_sub(1) {
            if let Ok(q) = quad_at(net, i, j, tol) {
                if let Ok(k) = gaussian_curvature(&q, tol) {
                    values.push(k);
                }
            }
        }
    }
    if values.is_empty() {
        return CurvatureProfile::Undefined;
    }
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let spread = (max - min) / mean.abs().max(f64::MIN_POSITIVE);
    if spread < tol.rel * 100.0 {
        CurvatureProfile::Constant {
            value: mean,
            spread,
        }
    } else {
        CurvatureProfile::Varying { min, max }
    }
}
