//! Second-order dynamics of a singular Lagrangian on `J¹E`.
//!
//! Two routes lead to the Euler–Lagrange field. The first starts from the
//! final solution `X_f` of the dynamical tower on `M_f` and cuts out the
//! submanifold `S` where `𝒥(X_f) = 0`; the correction along the frame
//! `W_j` of `ker FL_*` makes the field tangent to `S`. The second runs the
//! tower directly on the family of second-order fields `D + f^ρ ∂/∂v^ρ`,
//! so that every level already carries a SODE; its constraints are tagged
//! as dynamical or SODE constraints by a projectability test.

pub mod affine;
pub mod connection;
pub mod el;
pub mod integrate;
pub mod sode;

pub use connection::{tower_cross_check, CrossCheck};
pub use el::{euler_lagrange_algorithm, ConstraintKind, EulerLagrangeTower, TaggedConstraint};
pub use integrate::{constraint_drift, el_residual, rk4, Trajectory};
pub use sode::{jvdd_residual, m_basis_at, projectability_test, sode_submanifold, Projectability, SodeSubmanifold};

use thiserror::Error;

/// Tolerance for `W_j(f) = 0` on a zero set.
pub const PROJECTABILITY_TOL: f64 = 1e-8;

#[derive(Debug, Error)]
pub enum SodeError {
    #[error(transparent)]
    Engine(#[from] constraint_engine::EngineError),
    #[error(transparent)]
    Geometry(#[from] jet_geometry::GeometryError),
    #[error("final solution is not FL-projectable: |W(A)| = {worst:e} at {point:?}")]
    NotProjectable { worst: f64, point: Vec<f64> },
    #[error("could not sample {what}")]
    SamplingFailed { what: String },
    #[error("tower did not reach a final level: {0}")]
    NotFinal(String),
}
