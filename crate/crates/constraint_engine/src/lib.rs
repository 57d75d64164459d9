//! The precosymplectic constraint algorithm on a single chart.
//!
//! Given closed forms `(Ω, η)` and a connection field `𝒴` with
//! `⟨η, 𝒴⟩ = 1`, the problem splits as `Ω = η ∧ γ + ω`. The dynamical
//! equations `i(X)ω = −γ`, `i(X)η = 1` are solvable exactly where the
//! first-generation constraints `⟨Z, η − γ⟩`, `Z ∈ ker ω ∩ ker η`, vanish.
//! Each later generation imposes tangency of the newest constraints on the
//! family `X_part + Σ f_j G_j`; gauge coefficients that the tangency rows
//! fix are absorbed into `X_part`, and row combinations that no gauge
//! coefficient can satisfy become the next constraints.
//!
//! Every frame (kernel bases, particular solutions, left-null combinations)
//! uses pivots chosen at the seed and kept fixed, so the resulting functions
//! are smooth on a neighbourhood of the seed and can be differentiated
//! exactly by hyper-dual evaluation.

pub mod checks;
pub mod dynamics;
pub mod problem;
pub mod project;
pub mod tower;

pub use dynamics::{impose_rows, DynamicsSolution, Imposed, Row};
pub use problem::{solve_pointwise, split_forms, time_connection, GeometricProblem, PointSolution};
pub use tower::{
    extend_level, first_generation, initial_dynamics, run, stability_solve, AlgorithmReport, Constraint,
    ConstraintLevel, Extension, Termination,
};

use thiserror::Error;

/// Numerical knobs shared by every stage.
#[derive(Clone, Debug, PartialEq)]
pub struct Settings {
    pub samples: usize,
    pub sigma: f64,
    pub gn_iterations: usize,
    pub projection_tol: f64,
    pub residual_tol: f64,
    pub zero_drop_tol: f64,
    pub zero_drop_points: usize,
    pub characterization_tol: f64,
    pub rng_seed: u64,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            samples: 20,
            sigma: 0.1,
            gn_iterations: 50,
            projection_tol: 1e-10,
            residual_tol: 1e-8,
            zero_drop_tol: 1e-10,
            zero_drop_points: 100,
            characterization_tol: 1e-6,
            rng_seed: 20_240_917,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RankCheck {
    Kernel,
    Stability,
    Independence,
}

impl std::fmt::Display for RankCheck {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            RankCheck::Kernel => "kernel of the flat map",
            RankCheck::Stability => "stability matrix",
            RankCheck::Independence => "constraint Jacobian",
        })
    }
}

#[derive(Clone, Debug, Error)]
pub enum EngineError {
    #[error("connection not normalized: |<eta, Y> - 1| = {residual:e}")]
    ConnectionNotNormalized { residual: f64 },
    #[error("forms not closed: residual {residual:e}")]
    NotClosed { residual: f64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("rank of the {check} drifts: {expected} at the seed, {found} at {point:?}")]
    RankDrift {
        check: RankCheck,
        expected: usize,
        found: usize,
        point: Vec<f64>,
    },
    #[error("constraint characterizations disagree: residual {residual:e} at {point:?}")]
    InconsistentCharacterizations { residual: f64, point: Vec<f64> },
}
