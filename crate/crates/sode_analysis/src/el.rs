use crate::sode::{projectability_test, Projectability};
use crate::SodeError;
use constraint_engine::tower::{chart_level, tangency_residual};
use constraint_engine::{
    extend_level, impose_rows, stability_solve, AlgorithmReport, Constraint, DynamicsSolution, Extension,
    GeometricProblem, Row, Settings, Termination,
};
use expr_core::{Jet, VectorField};
use jet_geometry::{total_time_derivative, KerFl, LagrangianForms, LagrangianSystem};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ConstraintKind {
    Dynamical,
    Sode,
}

impl ConstraintKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ConstraintKind::Dynamical => "dynamical",
            ConstraintKind::Sode => "sode",
        }
    }
}

#[derive(Clone, Debug)]
pub struct TaggedConstraint {
    pub constraint: Constraint,
    pub kind: ConstraintKind,
    pub projectability: Projectability,
}

/// Levels `S_i` of the Euler–Lagrange tower and the SODE that survives.
#[derive(Clone, Debug)]
pub struct EulerLagrangeTower {
    pub problem: GeometricProblem,
    pub report: AlgorithmReport,
    /// Tags in the order of the final level's constraints.
    pub tags: Vec<TaggedConstraint>,
    pub kernel: Vec<VectorField>,
}

impl EulerLagrangeTower {
    pub fn generations(&self) -> usize {
        self.report.levels.len() - 1
    }

    pub fn final_field(&self) -> VectorField {
        self.report.final_field()
    }

    pub fn gauge_dim(&self) -> usize {
        self.report.dynamics.n_gauge
    }

    pub fn is_unique(&self) -> bool {
        self.report.is_final() && self.gauge_dim() == 0
    }

    pub fn count(&self, kind: ConstraintKind) -> usize {
        self.tags.iter().filter(|t| t.kind == kind).count()
    }

    /// `(generation, kind)` of every constraint.
    pub fn kinds(&self) -> Vec<(usize, ConstraintKind)> {
        self.tags.iter().map(|t| (t.constraint.generation, t.kind)).collect()
    }
}

/// `D + f^ρ ∂/∂v^ρ` with the `f^ρ` free.
pub fn sode_family(n: usize) -> DynamicsSolution {
    let dim = 2 * n + 1;
    let d = total_time_derivative(n);
    DynamicsSolution::new(dim, n, move |p| {
        let gauge = (0..n)
            .map(|r| {
                let mut e = vec![Jet::constant(0.0); dim];
                e[1 + n + r] = Jet::constant(1.0);
                e
            })
            .collect();
        (d.eval_jet(p), gauge)
    })
}

/// One row per `q` and `v` component of `i(X)Ω_L`. The `dt` component is
/// `−Σ X^j (i(X)Ω_L)_j` over the others, since `⟨i(X)Ω_L, X⟩ = 0` and `X^t = 1`.
pub fn euler_lagrange_rows(forms: &LagrangianForms, names: &[String]) -> Vec<Row> {
    let dim = forms.dim;
    (1..dim)
        .map(|j| {
            let om = forms.omega.clone();
            Row::new(format!("i(X)Omega_L[{}]", names[j]), move |x, v| {
                let w = om.eval_jet(x);
                let mut acc = Jet::constant(0.0);
                for (i, vi) in v.iter().enumerate() {
                    acc += &(vi * &w[i * dim + j]);
                }
                acc
            })
        })
        .collect()
}

fn tag(c: &Constraint, kernel: &[VectorField], samples: &[Vec<f64>]) -> TaggedConstraint {
    let projectability = projectability_test(&c.field, kernel, samples);
    let kind = if projectability.is_projectable() {
        ConstraintKind::Dynamical
    } else {
        ConstraintKind::Sode
    };
    TaggedConstraint {
        constraint: c.clone(),
        kind,
        projectability,
    }
}

pub fn euler_lagrange_algorithm(
    sys: &LagrangianSystem,
    forms: &LagrangianForms,
    settings: Settings,
    max_iter: usize,
) -> Result<EulerLagrangeTower, SodeError> {
    let n = sys.n;
    let problem = GeometricProblem::from_lagrangian(sys, forms, total_time_derivative(n), settings)?;
    let kernel = KerFl::at_seed(sys).fields(sys);
    let level0 = chart_level(&problem);
    let first = impose_rows(
        &sode_family(n),
        euler_lagrange_rows(forms, &problem.names),
        &problem.seed,
        &level0.samples,
    )?;
    let mut dynamics = first.dynamics;
    let mut candidates: Vec<Constraint> = first
        .candidates
        .into_iter()
        .enumerate()
        .map(|(k, field)| Constraint {
            field,
            generation: 1,
            label: format!("Euler-Lagrange combination {k}"),
        })
        .collect();
    let mut levels = vec![level0];
    let mut tags: Vec<TaggedConstraint> = Vec::new();
    let mut notes = Vec::new();

    let termination = loop {
        let current = levels.last().expect("nonempty");
        if current.index >= max_iter {
            break Termination::MaxIterExceeded;
        }
        if current.index > 0 {
            let imposed = stability_solve(current, &dynamics)?;
            dynamics = imposed.dynamics;
            candidates = imposed
                .candidates
                .into_iter()
                .enumerate()
                .map(|(k, field)| Constraint {
                    field,
                    generation: current.index + 1,
                    label: format!("stability combination {k} at generation {}", current.index + 1),
                })
                .collect();
        }
        let index = current.index;
        match extend_level(&problem, current, std::mem::take(&mut candidates))? {
            Extension::Same { notes: more } => {
                notes.extend(more);
                break Termination::Final { level: index };
            }
            Extension::Empty { notes: more } => {
                notes.extend(more);
                break Termination::Empty { level: index + 1 };
            }
            Extension::ZeroDimensional(l) => {
                tags.extend(
                    l.new_constraints
                        .iter()
                        .map(|&i| tag(&l.constraints[i], &kernel, &l.samples)),
                );
                levels.push(l);
                break Termination::ZeroDimensional { level: index + 1 };
            }
            Extension::New(l) => {
                tags.extend(
                    l.new_constraints
                        .iter()
                        .map(|&i| tag(&l.constraints[i], &kernel, &l.samples)),
                );
                levels.push(l);
            }
        }
    };
    let last = levels.last().expect("nonempty");
    let tangency = if matches!(termination, Termination::Final { .. }) {
        tangency_residual(&last.fields(), &dynamics.x_part(), &last.samples)
    } else {
        f64::NAN
    };
    let report = AlgorithmReport {
        levels,
        dynamics,
        termination,
        notes,
        tangency_residual: tangency,
    };
    Ok(EulerLagrangeTower {
        problem,
        report,
        tags,
        kernel,
    })
}
