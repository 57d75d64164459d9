use crate::{SodeError, PROJECTABILITY_TOL};
use constraint_engine::project::sample_level;
use constraint_engine::tower::tangency_residual;
use constraint_engine::{AlgorithmReport, Settings};
use expr_core::field::bracket;
use expr_core::{Jet, ScalarField, VectorField};
use jet_geometry::{canonical_endomorphism, sode_residual, total_time_derivative, KerFl, LagrangianSystem};

/// Outcome of the fiberwise-constancy test `W_j(f) = 0` on a zero set.
#[derive(Clone, Debug, PartialEq)]
pub enum Projectability {
    Projectable { worst: f64 },
    NotProjectable { worst: f64, point: Vec<f64> },
}

impl Projectability {
    pub fn is_projectable(&self) -> bool {
        matches!(self, Projectability::Projectable { .. })
    }

    pub fn worst(&self) -> f64 {
        match self {
            Projectability::Projectable { worst } | Projectability::NotProjectable { worst, .. } => *worst,
        }
    }
}

/// Largest `|W_j(f)|` over `samples`, each sample lying on the zero set of interest.
pub fn projectability_test(f: &ScalarField, kernel: &[VectorField], samples: &[Vec<f64>]) -> Projectability {
    let mut worst: f64 = 0.0;
    let mut at = Vec::new();
    for w in kernel {
        let lw = f.lie(w);
        for x in samples {
            let v = lw.eval(x);
            let v = if v.is_nan() { f64::INFINITY } else { v.abs() };
            if v > worst {
                worst = v;
                at = x.clone();
            }
        }
    }
    if worst <= PROJECTABILITY_TOL {
        Projectability::Projectable { worst }
    } else {
        Projectability::NotProjectable { worst, point: at }
    }
}

/// `S ⊂ M_f` together with the Euler–Lagrange field tangent to it.
#[derive(Clone, Debug)]
pub struct SodeSubmanifold {
    pub n: usize,
    /// Constraints of `M_f`.
    pub dynamical: Vec<ScalarField>,
    /// `ξ_j^S = A^{f_j} − v^{f_j}` over the free velocities `f_j`.
    pub constraints: Vec<ScalarField>,
    pub labels: Vec<String>,
    pub free_velocities: Vec<usize>,
    /// Frame `W_j` of `ker FL_*`, one per free velocity.
    pub kernel: Vec<VectorField>,
    pub x_f: VectorField,
    /// `X_f + X_f(ξ_j^S) W_j`.
    pub x_ls: VectorField,
    /// `X_f − X_f(ξ_j^S) W_j`.
    pub x_ls_minus: VectorField,
    /// Samples of `S`, the first one projected from the seed of `M_f`.
    pub samples: Vec<Vec<f64>>,
    /// Largest `|W_j(A^i)|` on `M_f`.
    pub projectability_residual: f64,
}

pub fn sode_submanifold(
    sys: &LagrangianSystem,
    lag: &AlgorithmReport,
    settings: &Settings,
) -> Result<SodeSubmanifold, SodeError> {
    let n = sys.n;
    let dim = sys.dim();
    let kerfl = KerFl::at_seed(sys);
    let kernel = kerfl.fields(sys);
    let free = kerfl.free_velocities();
    let x_f = lag.final_field();
    let mf = lag.final_level();

    let mut worst: f64 = 0.0;
    for i in 0..=n {
        match projectability_test(&x_f.component(i), &kernel, &mf.samples) {
            Projectability::NotProjectable { worst: w, point } => {
                return Err(SodeError::NotProjectable { worst: w, point })
            }
            Projectability::Projectable { worst: w } => worst = worst.max(w),
        }
    }

    let constraints: Vec<ScalarField> = free
        .iter()
        .map(|&f| {
            let xf = x_f.clone();
            ScalarField::composed(dim, move |p| &xf.eval_jet(p)[1 + f] - &p[1 + n + f])
        })
        .collect();
    let labels = free.iter().map(|&f| format!("A{k} - v{k}", k = f + 1)).collect();

    let correction = |sign: f64| {
        let terms = constraints
            .iter()
            .zip(&kernel)
            .map(|(c, w)| (ScalarField::combination(dim, vec![(sign, c.lie(&x_f))]), w.clone()))
            .collect();
        VectorField::affine(Some(x_f.clone()), terms, dim, dim)
    };
    let x_ls = correction(1.0);
    let x_ls_minus = correction(-1.0);

    let mut all = mf.fields();
    all.extend(constraints.iter().cloned());
    let samples = sample_level(&all, mf.seed(), settings, 0x53_4f_44_45).ok_or_else(|| SodeError::SamplingFailed {
        what: "the SODE submanifold S".into(),
    })?;

    Ok(SodeSubmanifold {
        n,
        dynamical: mf.fields(),
        constraints,
        labels,
        free_velocities: free,
        kernel,
        x_f,
        x_ls,
        x_ls_minus,
        samples,
        projectability_residual: worst,
    })
}

impl SodeSubmanifold {
    /// Constraints of `M_f` followed by the `ξ_j^S`.
    pub fn all_constraints(&self) -> Vec<ScalarField> {
        let mut all = self.dynamical.clone();
        all.extend(self.constraints.iter().cloned());
        all
    }

    /// `(max |𝒥X_LS|, max |⟨dt, X_LS⟩ − 1|)` over the samples.
    pub fn sode_defect(&self) -> (f64, f64) {
        self.samples.iter().fold((0.0, 0.0), |(a, b), x| {
            let (j, e) = sode_residual(self.n, &self.x_ls, x);
            (a.max(j), b.max(e))
        })
    }

    /// Largest `|L(X)χ|` over the samples for every constraint of `S`.
    pub fn tangency(&self, x: &VectorField) -> f64 {
        tangency_residual(&self.all_constraints(), x, &self.samples)
    }

    /// Largest entry of `dξ_j^S(W_i) + δ_ij` over the samples.
    pub fn kernel_pairing_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (j, c) in self.constraints.iter().enumerate() {
            for (i, w) in self.kernel.iter().enumerate() {
                let lw = c.lie(w);
                let target = if i == j { -1.0 } else { 0.0 };
                for x in &self.samples {
                    worst = worst.max((lw.eval(x) - target).abs());
                }
            }
        }
        worst
    }
}

/// Spanning set of `𝓜 = {Z : 𝒥(Z) ∈ ker FL_*}` at `x`: the vertical
/// coordinate fields and `[W_j, D]`.
pub fn m_basis_at(n: usize, kernel: &[VectorField], x: &[f64]) -> Vec<Vec<f64>> {
    let dim = 2 * n + 1;
    let d = total_time_derivative(n);
    let mut out: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let mut e = vec![0.0; dim];
            e[1 + n + i] = 1.0;
            e
        })
        .collect();
    out.extend(kernel.iter().map(|w| bracket(w, &d).eval(x)));
    out
}

/// Largest component of `𝒥([V, D]) − V` at `x`.
pub fn jvdd_residual(n: usize, v: &VectorField, d: &VectorField, x: &[f64]) -> f64 {
    let j = canonical_endomorphism(n, &bracket(v, d)).eval(x);
    j.iter().zip(v.eval(x)).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
}

/// Unit vertical field `∂/∂v^i` on a chart with `n` degrees of freedom.
pub fn vertical_unit(n: usize, i: usize) -> VectorField {
    let dim = 2 * n + 1;
    VectorField::new(dim, dim, move |_| {
        let mut e = vec![Jet::constant(0.0); dim];
        e[1 + n + i] = Jet::constant(1.0);
        e
    })
}
