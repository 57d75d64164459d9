//! First/second class splitting of the final constraints and the Dirac
//! bracket `{F, G}_D = {F, G} + C̄^{αβ}{F, X̄_β}{X̄_α, G}`.

use crate::algorithm::FinalConstraint;
use crate::cosym::CosymplecticStructure;
use crate::HamiltonianError;
use expr_core::field::dot;
use expr_core::jet::lift;
use expr_core::{Jet, ScalarField, VectorField};
use nalgebra::DMatrix;
use precosym::frame::{self, JetMat};
use precosym::linalg;

const CBAR_RCOND: f64 = 1e-8;

/// A first-class combination `ξ̃_c = c − {c, X̄_α} C̄^{αβ} X̄_β`.
#[derive(Clone, Debug)]
pub struct FirstClass {
    pub field: ScalarField,
    pub label: String,
    pub primary: bool,
    pub source: usize,
}

#[derive(Clone, Debug)]
pub struct DiracContext {
    pub structure: CosymplecticStructure,
    pub constraints: Vec<FinalConstraint>,
    /// Indices into `constraints` of the second-class set `X̄_α`.
    pub second_class: Vec<usize>,
    pub first_class: Vec<FirstClass>,
    pub seed: Vec<f64>,
    pub samples: Vec<Vec<f64>>,
    pub bracket_rank: usize,
    pub min_rcond: f64,
}

/// Matrix of `{c_a, c_b}` at a real point.
pub fn bracket_matrix(s: &CosymplecticStructure, fields: &[ScalarField], x: &[f64]) -> DMatrix<f64> {
    let l = s.poisson_at(x);
    let grads: Vec<nalgebra::DVector<f64>> = fields
        .iter()
        .map(|f| nalgebra::DVector::from_vec(f.gradient(x)))
        .collect();
    let k = fields.len();
    DMatrix::from_fn(k, k, |a, b| grads[a].dot(&(&l * &grads[b])))
}

pub fn classify_constraints(
    structure: &CosymplecticStructure,
    constraints: &[FinalConstraint],
    seed: &[f64],
    samples: &[Vec<f64>],
) -> Result<DiracContext, HamiltonianError> {
    let fields: Vec<ScalarField> = constraints.iter().map(|c| c.field.clone()).collect();
    let m0 = bracket_matrix(structure, &fields, seed);
    let rank = linalg::rank(&m0);
    for x in samples {
        let r = linalg::rank(&bracket_matrix(structure, &fields, x));
        if r != rank {
            return Err(HamiltonianError::RankDrift {
                what: "constraint bracket matrix",
                expected: rank,
                found: r,
                point: x.clone(),
            });
        }
    }
    let primaries: Vec<usize> = (0..constraints.len()).filter(|&i| constraints[i].primary).collect();
    let all: Vec<usize> = (0..constraints.len()).collect();
    let s0 = linalg::antisymmetric_pivots(&m0, &primaries, &[]);
    let mut second = linalg::antisymmetric_pivots(&m0, &all, &s0);
    second.sort_unstable();

    let mut ctx = DiracContext {
        structure: structure.clone(),
        constraints: constraints.to_vec(),
        second_class: second.clone(),
        first_class: Vec::new(),
        seed: seed.to_vec(),
        samples: samples.to_vec(),
        bracket_rank: rank,
        min_rcond: 1.0,
    };
    let mut worst = 1.0f64;
    for x in std::iter::once(seed).chain(samples.iter().map(|v| v.as_slice())) {
        worst = worst.min(linalg::rcond(&ctx.cbar_at(x)));
    }
    if !second.is_empty() && worst < CBAR_RCOND {
        return Err(HamiltonianError::CbarSingular { rcond: worst });
    }
    ctx.min_rcond = worst;
    for c in (0..constraints.len()).filter(|i| !second.contains(i)) {
        let inner = ctx.clone();
        let field = constraints[c].field.clone();
        let combined = ScalarField::composed(structure.dim, move |x| {
            let j = inner.second_jets(x);
            let l = inner.structure.poisson_jet(x);
            let dc = field.gradient_jet(x);
            let xdc = l.mul_vec(&dc);
            let row: Vec<Jet> = j.grads.iter().map(|g| -dot(g, &xdc)).collect();
            let coef = match frame::solve_vec(&j.cbar.transpose(), &row) {
                Ok(v) => v,
                Err(_) => return Jet::constant(f64::NAN),
            };
            let mut acc = field.eval_jet(x);
            for (cb, v) in coef.iter().zip(&j.values) {
                acc -= &(cb * v);
            }
            acc
        });
        let kind = if constraints[c].primary {
            "primary first class"
        } else {
            "secondary first class"
        };
        ctx.first_class.push(FirstClass {
            field: combined,
            label: format!("{kind}: {}", constraints[c].label),
            primary: constraints[c].primary,
            source: c,
        });
    }
    Ok(ctx)
}

struct SecondJets {
    values: Vec<Jet>,
    grads: Vec<Vec<Jet>>,
    cbar: JetMat,
}

impl DiracContext {
    pub fn second_class_fields(&self) -> Vec<ScalarField> {
        self.second_class
            .iter()
            .map(|&i| self.constraints[i].field.clone())
            .collect()
    }

    pub fn second_class_labels(&self) -> Vec<String> {
        self.second_class
            .iter()
            .map(|&i| self.constraints[i].label.clone())
            .collect()
    }

    fn second_jets(&self, x: &[Jet]) -> SecondJets {
        let l = self.structure.poisson_jet(x);
        let fields = self.second_class_fields();
        let values: Vec<Jet> = fields.iter().map(|f| f.eval_jet(x)).collect();
        let grads: Vec<Vec<Jet>> = fields.iter().map(|f| f.gradient_jet(x)).collect();
        let xs: Vec<Vec<Jet>> = grads.iter().map(|g| l.mul_vec(g)).collect();
        let k = fields.len();
        let mut cbar = JetMat::zeros(k, k);
        for a in 0..k {
            for b in 0..k {
                cbar.set(a, b, dot(&grads[a], &xs[b]));
            }
        }
        SecondJets { values, grads, cbar }
    }

    /// `C̄_{αβ} = {X̄_α, X̄_β}`.
    pub fn cbar_jet(&self, x: &[Jet]) -> JetMat {
        self.second_jets(x).cbar
    }

    pub fn cbar_at(&self, x: &[f64]) -> DMatrix<f64> {
        self.cbar_jet(&lift(x)).real()
    }

    /// Rebuilds the splitting for another structure with the same constraint sets.
    pub fn with_structure(&self, structure: &CosymplecticStructure) -> Result<DiracContext, HamiltonianError> {
        classify_constraints(structure, &self.constraints, &self.seed, &self.samples)
    }

    pub fn bracket(&self, f: &ScalarField, g: &ScalarField) -> ScalarField {
        self.structure.bracket(f, g)
    }

    fn dirac_jet(&self, x: &[Jet], df: &[Jet], dg: &[Jet]) -> Jet {
        let l = self.structure.poisson_jet(x);
        let j = self.second_jets(x);
        let mut out = dot(df, &l.mul_vec(dg));
        if j.grads.is_empty() {
            return out;
        }
        let inv = match frame::inverse(&j.cbar) {
            Ok(m) => m,
            Err(_) => return Jet::constant(f64::NAN),
        };
        let f_x: Vec<Jet> = j.grads.iter().map(|g| dot(df, &l.mul_vec(g))).collect();
        let x_g: Vec<Jet> = j.grads.iter().map(|g| dot(g, &l.mul_vec(dg))).collect();
        for a in 0..f_x.len() {
            for b in 0..f_x.len() {
                out += &(&(inv.get(a, b) * &f_x[b]) * &x_g[a]);
            }
        }
        out
    }

    /// `{F, G}_D`.
    pub fn dirac_bracket(&self, f: &ScalarField, g: &ScalarField) -> ScalarField {
        let (ctx, f, g) = (self.clone(), f.clone(), g.clone());
        ScalarField::composed(self.structure.dim, move |x| {
            ctx.dirac_jet(x, &f.gradient_jet(x), &g.gradient_jet(x))
        })
    }

    /// `Q = C̄^{αβ} X_{X̄_α} ⊗ dX̄_β` and `ℙ = Id − Q` at a point.
    pub fn projectors_at(&self, x: &[f64]) -> (DMatrix<f64>, DMatrix<f64>) {
        let dim = self.structure.dim;
        let l = self.structure.poisson_at(x);
        let grads: Vec<nalgebra::DVector<f64>> = self
            .second_class_fields()
            .iter()
            .map(|f| nalgebra::DVector::from_vec(f.gradient(x)))
            .collect();
        let mut q = DMatrix::zeros(dim, dim);
        if !grads.is_empty() {
            let cbar = self.cbar_at(x);
            let inv = cbar
                .try_inverse()
                .unwrap_or_else(|| DMatrix::from_element(grads.len(), grads.len(), f64::NAN));
            for a in 0..grads.len() {
                let xa = &l * &grads[a];
                for b in 0..grads.len() {
                    q += &xa * grads[b].transpose() * inv[(a, b)];
                }
            }
        }
        (DMatrix::identity(dim, dim) - &q, q)
    }

    /// `ℙ(V)` for a vector field `V`.
    pub fn project_field(&self, v: &VectorField) -> VectorField {
        let (ctx, v) = (self.clone(), v.clone());
        VectorField::new(self.structure.dim, self.structure.dim, move |x| {
            let l = ctx.structure.poisson_jet(x);
            let j = ctx.second_jets(x);
            let mut out = v.eval_jet(x);
            if j.grads.is_empty() {
                return out;
            }
            let inv = match frame::inverse(&j.cbar) {
                Ok(m) => m,
                Err(_) => return vec![Jet::constant(f64::NAN); out.len()],
            };
            let xs: Vec<Vec<Jet>> = j.grads.iter().map(|g| l.mul_vec(g)).collect();
            let pair: Vec<Jet> = j.grads.iter().map(|g| dot(g, &out)).collect();
            let k = xs.len();
            let mut coef = vec![Jet::constant(0.0); k];
            for a in 0..k {
                for b in 0..k {
                    coef[a] += &(inv.get(a, b) * &pair[b]);
                }
            }
            let base = out.clone();
            for (i, o) in out.iter_mut().enumerate() {
                let mut acc = base[i].clone();
                for a in 0..k {
                    acc -= &(&coef[a] * &xs[a][i]);
                }
                *o = acc;
            }
            out
        })
    }

    /// `ℙ(E_h)`.
    pub fn projected_evolution(&self) -> VectorField {
        self.project_field(&self.structure.evolution_field())
    }

    /// `ġ = ℙ(R̃)(G) + {G, h}_D`.
    pub fn evolution(&self, g: &ScalarField) -> ScalarField {
        let pr = self.project_field(&self.structure.reeb_tilde);
        let (ctx, g) = (self.clone(), g.clone());
        ScalarField::composed(self.structure.dim, move |x| {
            let dg = g.gradient_jet(x);
            let a = dot(&dg, &pr.eval_jet(x));
            let b = ctx.dirac_jet(x, &dg, &ctx.structure.h.gradient_jet(x));
            &a + &b
        })
    }

    /// `{X̄_α, F}_D` for every second-class constraint: the Casimir residual.
    pub fn casimir_residual(&self, f: &ScalarField, points: &[Vec<f64>]) -> f64 {
        let mut worst: f64 = 0.0;
        for xb in self.second_class_fields() {
            let b = self.dirac_bracket(&xb, f);
            for p in points {
                worst = worst.max(b.eval(p).abs());
            }
        }
        worst
    }

    pub fn is_all_second_class(&self) -> bool {
        self.first_class.is_empty()
    }
}
