//! Lagrangian geometry on the chart `(t, q^ρ, v^ρ)` of the first jet bundle.
//!
//! A [`LagrangianSystem`] keeps the Lagrangian together with its symbolic
//! Hessian and mixed partials, classified as regular or singular with a
//! constant-rank check over random chart points. From it one builds the
//! Poincaré–Cartan forms ([`build_forms`]), the Legendre maps, the kernel of
//! the fiber derivative and the second-order-equation tests.
//!
//! Slot layout: `t = 0`, `q^ρ = 1 + ρ`, `v^ρ = 1 + n + ρ` (zero-based `ρ`).

pub mod forms;
pub mod kernel;
pub mod legendre;
pub mod sode;
pub mod system;

pub use forms::{build_forms, LagrangianForms};
pub use kernel::{ker_fl_basis, KerFl};
pub use legendre::{legendre_map, legendre_tangent, LegendreMaps};
pub use sode::{canonical_endomorphism, is_sode, sode_residual, total_time_derivative};
pub use system::{LagrangianSystem, Regularity};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error(transparent)]
    Parse(#[from] expr_core::ParseError),
    #[error("Lagrangian not defined at the seed: {0}")]
    Domain(#[from] expr_core::DomainError),
    #[error("seed has {got} coordinates, expected {expected}")]
    SeedDimension { got: usize, expected: usize },
    #[error("Hessian rank {rank} at {point:?} differs from rank {seed_rank} at the seed")]
    MixedRank {
        seed_rank: usize,
        rank: usize,
        point: Vec<f64>,
    },
    #[error("frozen Hessian pivots degenerate (reciprocal condition {rcond:e})")]
    PivotDegeneracy { rcond: f64 },
}
