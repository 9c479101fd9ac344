//! Principal contact element nets: construction, Gaussian curvature,
//! Bäcklund transforms and the Bianchi permutation property, backed by a
//! small projective-geometry and dual-quaternion kernel.
//!
//! A contact element is a point together with a unit normal. Nets of such
//! elements where neighbours share an oriented tangent sphere ("principal"
//! nets) carry a curvature theory in which only nets of constant negative
//! curvature admit Bäcklund mates. This crate builds those nets, computes
//! their invariants and verifies the relevant closure, projectivity and
//! permutation properties numerically at desk scale.
//!
//! Modules:
//!
//! * [`geom`] — homogeneous points/planes, Plücker lines, reflections,
//!   rotations, twists.
//! * [`dualquat`] — dual quaternions as Study-quadric points, their action
//!   on points and lines.
//! * [`net`] — contact elements, net patches, elementary quadrilaterals and
//!   their Gaussian curvature.
//! * [`backlund`] — the neighbour construction, seed normals, closure roots,
//!   patch propagation and mate verification.
//! * [`rotquad`] — rotation quadrilaterals fitted to two fixed transversal
//!   lines; Monte-Carlo verification of the area-ratio identity.
//! * [`bianchi`] — half-turn completion of a fourth net from two equal-twist
//!   mates; Bennett linkage checks.
//! * [`generators`] — the degenerate axis net and the discrete tractrix
//!   pseudosphere of revolution.

pub mod backlund;
pub mod bianchi;
pub mod dualquat;
pub mod generators;
pub mod geom;
pub mod net;
pub mod rotquad;
mod tol;

pub use tol::Tol;
