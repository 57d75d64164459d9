use crate::chart::MomentumChart;
use crate::forms::{map_jacobian, HamiltonCartanForms};
use crate::HamiltonianError;
use constraint_engine::tower::max_abs_on;
use constraint_engine::{run, time_connection, AlgorithmReport, GeometricProblem, Settings, Termination};
use expr_core::{ScalarField, VectorField};

/// A constraint of the final Hamiltonian level, expressed on `J¹*E`.
#[derive(Clone, Debug)]
pub struct FinalConstraint {
    pub field: ScalarField,
    pub label: String,
    pub generation: usize,
    pub primary: bool,
}

/// Hamiltonian constraint tower on the chart of `𝒫` with `𝒴̃ = ∂/∂t`.
#[derive(Clone, Debug)]
pub struct HamiltonianTower {
    pub problem: GeometricProblem,
    pub report: AlgorithmReport,
    /// Primaries followed by the lifted secondaries.
    pub constraints: Vec<FinalConstraint>,
    /// `ι(y)` for the final-level samples `y`.
    pub samples: Vec<Vec<f64>>,
    pub seed: Vec<f64>,
}

impl HamiltonianTower {
    pub fn primary_count(&self) -> usize {
        self.constraints.iter().filter(|c| c.primary).count()
    }

    pub fn secondary_count(&self) -> usize {
        self.constraints.len() - self.primary_count()
    }

    /// Number of levels after `P₀`.
    pub fn generations(&self) -> usize {
        self.report.levels.len() - 1
    }

    /// The final dynamics pushed forward to `J¹*E` at `ι(y)`.
    pub fn pushed_field_at(&self, chart: &MomentumChart, y: &[f64]) -> Vec<f64> {
        let j = map_jacobian(&chart.embedding, y);
        let v = nalgebra::DVector::from_vec(self.report.final_field().eval(y));
        (j * v).iter().copied().collect()
    }

    pub fn final_field(&self) -> VectorField {
        self.report.final_field()
    }
}

pub fn hamiltonian_algorithm(
    chart: &MomentumChart,
    forms: &HamiltonCartanForms,
    settings: Settings,
    max_iter: usize,
) -> Result<HamiltonianTower, HamiltonianError> {
    let problem = GeometricProblem::new(
        forms.omega.clone(),
        forms.eta.clone(),
        time_connection(forms.dim),
        chart.seed_p.clone(),
        chart.names_p.clone(),
        settings,
    )?;
    let report = run(&problem, max_iter)?;
    let mut constraints: Vec<FinalConstraint> = chart
        .primaries
        .iter()
        .zip(&chart.primary_labels)
        .map(|(f, l)| FinalConstraint {
            field: f.clone(),
            label: l.clone(),
            generation: 0,
            primary: true,
        })
        .collect();
    for c in &report.final_level().constraints {
        constraints.push(FinalConstraint {
            field: chart.lift_to_dual(&c.field),
            label: c.label.clone(),
            generation: c.generation,
            primary: false,
        });
    }
    let samples = report
        .final_level()
        .samples
        .iter()
        .map(|y| chart.embedding.eval(y))
        .collect();
    Ok(HamiltonianTower {
        problem,
        report,
        constraints,
        samples,
        seed: chart.seed.clone(),
    })
}

/// Per-level comparison of the Lagrangian and Hamiltonian towers.
#[derive(Clone, Debug, PartialEq)]
pub struct LevelRelation {
    pub index: usize,
    pub lagrangian_codim: usize,
    pub hamiltonian_codim: usize,
    /// Largest `|FL₀*φ|` over the Lagrangian level samples.
    pub pullback_residual: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RelationReport {
    pub levels: Vec<LevelRelation>,
    pub lagrangian_levels: usize,
    pub hamiltonian_levels: usize,
    pub same_termination: bool,
    pub ok: bool,
}

/// Checks that each Hamiltonian level pulls back through `FL₀` to functions
/// vanishing on the matching Lagrangian level, with equal codimensions.
pub fn verify_fl_related(
    chart: &MomentumChart,
    lagrangian: &AlgorithmReport,
    ham: &HamiltonianTower,
    tol: f64,
) -> RelationReport {
    let nl = lagrangian.levels.len();
    let nh = ham.report.levels.len();
    let mut levels = Vec::new();
    for i in 0..nl.max(nh) {
        let l = lagrangian.levels.get(i.min(nl - 1)).expect("nonempty");
        let h = ham.report.levels.get(i.min(nh - 1)).expect("nonempty");
        let pulled: Vec<ScalarField> = h.fields().iter().map(|f| chart.pull_to_lagrangian(f)).collect();
        levels.push(LevelRelation {
            index: i,
            lagrangian_codim: l.constraints.len(),
            hamiltonian_codim: h.constraints.len(),
            pullback_residual: max_abs_on(&pulled, &l.samples),
        });
    }
    let same_termination = matches!(
        (&lagrangian.termination, &ham.report.termination),
        (Termination::Final { level: a }, Termination::Final { level: b }) if a == b
    ) || lagrangian.termination == ham.report.termination;
    let ok = nl == nh
        && same_termination
        && levels
            .iter()
            .all(|r| r.lagrangian_codim == r.hamiltonian_codim && r.pullback_residual <= tol);
    RelationReport {
        levels,
        lagrangian_levels: nl,
        hamiltonian_levels: nh,
        same_termination,
        ok,
    }
}
