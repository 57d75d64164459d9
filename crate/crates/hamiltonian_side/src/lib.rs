//! Hamiltonian counterpart of a Lagrangian system on `J¹*E` with
//! coordinates `(t, q, p)`.
//!
//! The image `𝒫 = FL(J¹E)` is parametrized by `(t, q, p_P)` where `P` are the
//! principal Hessian pivots; the remaining momenta are functions of these
//! and cut out `𝒫` through the primary constraints. The constraint engine
//! runs on the parametrization, and its constraints are lifted back to
//! `J¹*E` for the bracket computations.

pub mod algorithm;
pub mod chart;
pub mod checks;
pub mod cosym;
pub mod dirac;
pub mod forms;

pub use algorithm::{hamiltonian_algorithm, verify_fl_related, FinalConstraint, HamiltonianTower, RelationReport};
pub use chart::{build_primary_chart, MomentumChart, PrimaryMode};
pub use cosym::{build_cosymplectic, BaseConnection, CosymplecticStructure, FormulaCheck};
pub use dirac::{classify_constraints, DiracContext, FirstClass};
pub use forms::{hamilton_cartan_forms, HamiltonCartanForms};

use thiserror::Error;

#[derive(Clone, Debug, Error)]
pub enum HamiltonianError {
    #[error("momentum relations cannot be eliminated automatically: {0}")]
    AutoEliminateUnsupported(String),
    #[error("primary constraints do not vanish on the Legendre image: {residual:e} at {point:?}")]
    ImageMismatch { residual: f64, point: Vec<f64> },
    #[error("pivot momenta do not coordinatize the image near the seed: {0}")]
    ParametrizationFailure(String),
    #[error("rank of the {what} drifts: {expected} at the seed, {found} at {point:?}")]
    RankDrift {
        what: &'static str,
        expected: usize,
        found: usize,
        point: Vec<f64>,
    },
    #[error("second-class bracket matrix is singular (reciprocal condition {rcond:e})")]
    CbarSingular { rcond: f64 },
    #[error("Hamiltonian tower did not reach a final level: {0}")]
    NotFinal(String),
    #[error(transparent)]
    Parse(#[from] expr_core::ParseError),
    #[error(transparent)]
    Engine(#[from] constraint_engine::EngineError),
}

/// Chart, forms, tower, cosymplectic structure and Dirac data of one system.
#[derive(Clone, Debug)]
pub struct HamiltonianAnalysis {
    pub chart: MomentumChart,
    pub forms: HamiltonCartanForms,
    pub tower: HamiltonianTower,
    pub structure: CosymplecticStructure,
    /// Present when the tower reached a final level.
    pub dirac: Option<DiracContext>,
}

pub fn analyze(
    sys: &jet_geometry::LagrangianSystem,
    mode: PrimaryMode,
    connection: BaseConnection,
    settings: constraint_engine::Settings,
    max_iter: usize,
) -> Result<HamiltonianAnalysis, HamiltonianError> {
    let chart = build_primary_chart(sys, mode)?;
    let forms = hamilton_cartan_forms(&chart);
    let tower = hamiltonian_algorithm(&chart, &forms, settings, max_iter)?;
    let structure = build_cosymplectic(connection.clone(), chart.hamiltonian_on_dual(&connection));
    let dirac = if tower.report.is_final() {
        Some(classify_constraints(
            &structure,
            &tower.constraints,
            &tower.seed,
            &tower.samples,
        )?)
    } else {
        None
    };
    Ok(HamiltonianAnalysis {
        chart,
        forms,
        tower,
        structure,
        dirac,
    })
}
