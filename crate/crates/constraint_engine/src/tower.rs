use crate::dynamics::{impose_rows, DynamicsSolution, Imposed, Row};
use crate::problem::GeometricProblem;
use crate::project::{jacobian, sample_level};
use crate::{EngineError, RankCheck};
use expr_core::jet::lift;
use expr_core::{Jet, ScalarField, VectorField};
use nalgebra::{DMatrix, DVector};
use precosym::frame::FrozenPivots;
use precosym::{linalg, sampling};

/// One constraint function together with its provenance in the tower.
#[derive(Clone, Debug)]
pub struct Constraint {
    pub field: ScalarField,
    pub generation: usize,
    pub label: String,
}

/// `C_i`: cumulative constraints with on-manifold samples.
#[derive(Clone, Debug)]
pub struct ConstraintLevel {
    pub index: usize,
    pub constraints: Vec<Constraint>,
    pub new_constraints: Vec<usize>,
    pub samples: Vec<Vec<f64>>,
    pub prev_rank: usize,
    pub rank: usize,
    pub residual: f64,
    pub notes: Vec<String>,
}

impl ConstraintLevel {
    pub fn fields(&self) -> Vec<ScalarField> {
        self.constraints.iter().map(|c| c.field.clone()).collect()
    }

    pub fn new_fields(&self) -> Vec<ScalarField> {
        self.new_constraints
            .iter()
            .map(|&i| self.constraints[i].field.clone())
            .collect()
    }

    pub fn seed(&self) -> &[f64] {
        &self.samples[0]
    }

    /// Largest constraint value over samples.
    pub fn max_residual(&self) -> f64 {
        max_abs_on(&self.fields(), &self.samples)
    }
}

pub fn max_abs_on(fields: &[ScalarField], points: &[Vec<f64>]) -> f64 {
    let mut worst: f64 = 0.0;
    for p in points {
        for f in fields {
            let v = f.eval(p);
            worst = if v.is_nan() { f64::INFINITY } else { worst.max(v.abs()) };
        }
    }
    worst
}

/// Level-0 data: the whole chart sampled around the seed.
pub fn chart_level(p: &GeometricProblem) -> ConstraintLevel {
    let samples = sample_level(&[], &p.seed, &p.settings, 0).expect("no constraints to project onto");
    ConstraintLevel {
        index: 0,
        constraints: Vec::new(),
        new_constraints: Vec::new(),
        samples,
        prev_rank: 0,
        rank: 0,
        residual: 0.0,
        notes: Vec::new(),
    }
}

fn check_rank_constant(
    check: RankCheck,
    expected: usize,
    points: &[Vec<f64>],
    f: impl Fn(&[f64]) -> DMatrix<f64>,
) -> Result<(), EngineError> {
    for x in points {
        let r = linalg::rank(&f(x));
        if r != expected {
            return Err(EngineError::RankDrift {
                check,
                expected,
                found: r,
                point: x.clone(),
            });
        }
    }
    Ok(())
}

/// Particular solution of `B X = η − γ` on frozen pivots, normalized to
/// `⟨η, X⟩ = 1`, and the gauge frame `ker B = ker ω ∩ ker η`.
pub fn initial_dynamics(
    p: &GeometricProblem,
    samples: &[Vec<f64>],
) -> Result<(DynamicsSolution, FrozenPivots), EngineError> {
    let b0 = p.flat_at(&p.seed);
    let piv = FrozenPivots::select(&b0);
    check_rank_constant(RankCheck::Kernel, piv.rank(), samples, |x| p.flat_at(x))?;
    let prob = p.clone();
    let fp = piv.clone();
    let dim = p.dim;
    let n_gauge = dim - piv.rank();
    let dynamics = DynamicsSolution::new(dim, n_gauge, move |x| {
        let b = prob.flat_jet(x);
        let rhs = prob.rhs_jet(x);
        let nan = || vec![Jet::constant(f64::NAN); dim];
        let (Ok(mut xp), Ok(gauge)) = (fp.particular(&b, &rhs), fp.null_basis(&b)) else {
            return (nan(), vec![nan(); n_gauge]);
        };
        let eta = prob.eta.eval_jet(x);
        let y = prob.y.eval_jet(x);
        let defect = Jet::constant(1.0) - expr_core::field::dot(&eta, &xp);
        for (xi, yi) in xp.iter_mut().zip(&y) {
            *xi += &(&defect * yi);
        }
        (xp, gauge)
    });
    Ok((dynamics, piv))
}

/// `χ_j = ⟨Z_j, η − γ⟩` over a frozen frame of `ker ω ∩ ker η`, dropping
/// those that vanish at every test point of the chart.
pub fn first_generation(p: &GeometricProblem, pivots: &FrozenPivots) -> (Vec<Constraint>, Vec<String>) {
    let mut out = Vec::new();
    let mut notes = Vec::new();
    let free = pivots.free_rows();
    let tests = sampling::gaussian_cloud(
        &p.seed,
        p.settings.zero_drop_points,
        1.0,
        p.settings.rng_seed ^ 0x7a65_726f,
    );
    for (j, &row) in free.iter().enumerate() {
        let prob = p.clone();
        let fp = pivots.clone();
        let field = ScalarField::composed(p.dim, move |x| {
            let b = prob.flat_jet(x);
            match fp.left_null_basis(&b) {
                Ok(z) => expr_core::field::dot(&z[j], &prob.rhs_jet(x)),
                Err(_) => Jet::constant(f64::NAN),
            }
        });
        let label = format!("<Z[{}], eta - gamma>", p.names[row]);
        let worst = max_abs_on(std::slice::from_ref(&field), &tests);
        if worst <= p.settings.zero_drop_tol {
            notes.push(format!(
                "generation 1: {label} vanishes identically (max {worst:.1e}), dropped"
            ));
        } else {
            out.push(Constraint {
                field,
                generation: 1,
                label,
            });
        }
    }
    (out, notes)
}

/// How a candidate set changes the current level.
#[derive(Clone, Debug)]
pub enum Extension {
    Same { notes: Vec<String> },
    New(ConstraintLevel),
    ZeroDimensional(ConstraintLevel),
    Empty { notes: Vec<String> },
}

/// Adds the candidates that actually cut the current level, choosing an
/// independent subset by Jacobian rank increments at the projected seed.
pub fn extend_level(
    p: &GeometricProblem,
    level: &ConstraintLevel,
    candidates: Vec<Constraint>,
) -> Result<Extension, EngineError> {
    let s = &p.settings;
    let mut notes = Vec::new();
    let mut live = Vec::new();
    for c in candidates {
        let worst = max_abs_on(std::slice::from_ref(&c.field), &level.samples);
        if worst <= s.residual_tol {
            notes.push(format!(
                "generation {}: {} already vanishes on C{} (max {worst:.1e})",
                c.generation, c.label, level.index
            ));
        } else {
            live.push(c);
        }
    }
    if live.is_empty() {
        return Ok(Extension::Same { notes });
    }
    let cum = level.fields();
    let mut all = cum.clone();
    all.extend(live.iter().map(|c| c.field.clone()));
    let stream = 2 * level.index as u64 + 1;
    let Some(trial) = sample_level(&all, level.seed(), s, stream) else {
        notes.push(format!(
            "projection onto C{} failed from the seed and all restarts",
            level.index + 1
        ));
        return Ok(Extension::Empty { notes });
    };
    let x0 = &trial[0];
    let mut chosen: Vec<usize> = Vec::new();
    let mut stack = jacobian(&cum, x0);
    let mut rank = linalg::rank(&stack);
    for (k, c) in live.iter().enumerate() {
        let g = c.field.gradient(x0);
        let mut grown = stack.clone().insert_row(stack.nrows(), 0.0);
        for (j, v) in g.iter().enumerate() {
            grown[(stack.nrows(), j)] = *v;
        }
        let r = linalg::rank(&grown);
        if r > rank {
            stack = grown;
            rank = r;
            chosen.push(k);
        }
    }
    if chosen.is_empty() {
        notes.push("new candidates have differentials dependent on the current stack; treated as no change".into());
        return Ok(Extension::Same { notes });
    }
    let mut constraints = level.constraints.clone();
    let mut new_constraints = Vec::new();
    let mut dropped = Vec::new();
    for (k, c) in live.into_iter().enumerate() {
        if chosen.contains(&k) {
            new_constraints.push(constraints.len());
            constraints.push(c);
        } else {
            dropped.push(c);
        }
    }
    let fields: Vec<ScalarField> = constraints.iter().map(|c| c.field.clone()).collect();
    let samples = if dropped.is_empty() {
        trial
    } else {
        sample_level(&fields, x0, s, stream + 1).unwrap_or(trial)
    };
    for d in &dropped {
        let worst = max_abs_on(std::slice::from_ref(&d.field), &samples);
        if worst > s.residual_tol {
            notes.push(format!(
                "dependent candidate {} does not vanish on the new level (max {worst:.1e})",
                d.label
            ));
        } else {
            notes.push(format!("dependent candidate {} dropped", d.label));
        }
    }
    let rank = constraints.len();
    check_rank_constant(RankCheck::Independence, rank, &samples, |x| jacobian(&fields, x))?;
    let next = ConstraintLevel {
        index: level.index + 1,
        residual: max_abs_on(&fields, &samples),
        constraints,
        new_constraints,
        samples,
        prev_rank: level.rank,
        rank,
        notes: notes.clone(),
    };
    if rank >= p.dim {
        return Ok(Extension::ZeroDimensional(next));
    }
    Ok(Extension::New(next))
}

/// Tangency of the newest constraints imposed on the dynamics family.
pub fn stability_solve(level: &ConstraintLevel, dynamics: &DynamicsSolution) -> Result<Imposed, EngineError> {
    let rows = level
        .new_constraints
        .iter()
        .map(|&i| {
            let c = &level.constraints[i];
            Row::tangency(format!("L(X)[{}]", c.label), &c.field)
        })
        .collect();
    impose_rows(dynamics, rows, level.seed(), &level.samples)
}

/// Basis of `T⊥C` at `x`: vectors `Z` with `(ω + ηηᵀ) Z ∈ span(dχ)`.
pub fn perp_basis_at(p: &GeometricProblem, fields: &[ScalarField], x: &[f64]) -> Vec<DVector<f64>> {
    let k = p.flat_at(x).transpose();
    let j = jacobian(fields, x);
    let n = p.dim;
    let m = fields.len();
    let mut big = DMatrix::zeros(n, n + m);
    big.view_mut((0, 0), (n, n)).copy_from(&k);
    if m > 0 {
        big.view_mut((0, n), (n, m)).copy_from(&(-j.transpose()));
    }
    let null = linalg::null_space(&big);
    null.column_iter().map(|c| c.rows(0, n).into_owned()).collect()
}

/// Largest `|⟨Z, η − γ⟩|` over `T⊥C_prev` frames at the given points.
pub fn characterization_a_residual(p: &GeometricProblem, prev: &[ScalarField], points: &[Vec<f64>]) -> (f64, Vec<f64>) {
    let mut worst = (0.0, Vec::new());
    for x in points {
        let rhs: Vec<f64> = p.rhs_jet(&lift(x)).iter().map(Jet::re).collect();
        for z in perp_basis_at(p, prev, x) {
            let v = z.iter().zip(&rhs).map(|(a, b)| a * b).sum::<f64>().abs();
            if v > worst.0 {
                worst = (v, x.clone());
            }
        }
    }
    worst
}

#[derive(Clone, Debug, PartialEq)]
pub enum Termination {
    Final { level: usize },
    Empty { level: usize },
    ZeroDimensional { level: usize },
    MaxIterExceeded,
}

#[derive(Clone, Debug)]
pub struct AlgorithmReport {
    pub levels: Vec<ConstraintLevel>,
    pub dynamics: DynamicsSolution,
    pub termination: Termination,
    pub notes: Vec<String>,
    /// Largest `|L(X)χ|` over final samples and cumulative constraints.
    pub tangency_residual: f64,
}

impl AlgorithmReport {
    pub fn final_level(&self) -> &ConstraintLevel {
        self.levels.last().expect("level 0 always present")
    }

    pub fn constraint_count(&self) -> usize {
        self.final_level().constraints.len()
    }

    pub fn is_final(&self) -> bool {
        matches!(self.termination, Termination::Final { .. })
    }

    pub fn final_field(&self) -> VectorField {
        self.dynamics.x_part()
    }
}

pub fn tangency_residual(fields: &[ScalarField], x: &VectorField, points: &[Vec<f64>]) -> f64 {
    let mut worst: f64 = 0.0;
    for pt in points {
        let v = x.eval(pt);
        for f in fields {
            let d: f64 = f.gradient(pt).iter().zip(&v).map(|(a, b)| a * b).sum();
            worst = if d.is_nan() { f64::INFINITY } else { worst.max(d.abs()) };
        }
    }
    worst
}

/// Runs the constraint algorithm until a fixed point, an empty or
/// zero-dimensional level, or `max_iter` generations.
pub fn run(p: &GeometricProblem, max_iter: usize) -> Result<AlgorithmReport, EngineError> {
    let level0 = chart_level(p);
    let (mut dynamics, pivots) = initial_dynamics(p, &level0.samples)?;
    let (gen1, mut notes) = first_generation(p, &pivots);
    let mut levels = vec![level0];
    let mut candidates = gen1;
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
        match extend_level(p, current, std::mem::take(&mut candidates))? {
            Extension::Same { notes: n } => {
                notes.extend(n);
                break Termination::Final { level: index };
            }
            Extension::Empty { notes: n } => {
                notes.extend(n);
                break Termination::Empty { level: index + 1 };
            }
            Extension::ZeroDimensional(l) => {
                levels.push(l);
                break Termination::ZeroDimensional { level: index + 1 };
            }
            Extension::New(l) => {
                if index >= 1 {
                    let prev = current.fields();
                    let (res, at) = characterization_a_residual(p, &prev, &l.samples);
                    if res > p.settings.characterization_tol {
                        return Err(EngineError::InconsistentCharacterizations {
                            residual: res,
                            point: at,
                        });
                    }
                }
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
    Ok(AlgorithmReport {
        levels,
        dynamics,
        termination,
        notes,
        tangency_residual: tangency,
    })
}
