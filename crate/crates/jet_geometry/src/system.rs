use crate::GeometryError;
use expr_core::diff::{add, mul, sub};
use expr_core::{diff, parse, Expr, Jet, ScalarField, SymbolTable};
use nalgebra::DMatrix;
use precosym::frame::JetMat;
use precosym::{linalg, sampling};

/// Number of random chart points used to confirm a constant Hessian rank.
pub const RANK_SAMPLES: usize = 100;
const RANK_SAMPLE_SEED: u64 = 0x4a45_5447;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Regularity {
    Regular,
    Singular { corank: usize },
}

impl Regularity {
    pub fn corank(self) -> usize {
        match self {
            Regularity::Regular => 0,
            Regularity::Singular { corank } => corank,
        }
    }
}

/// A Lagrangian on the chart `(t, q1..qn, v1..vn)` with its symbolic
/// first and second partials.
#[derive(Clone, Debug)]
pub struct LagrangianSystem {
    pub n: usize,
    pub table: SymbolTable,
    pub lagrangian: Expr,
    pub seed: Vec<f64>,
    /// `∂L/∂t`.
    pub dt: Expr,
    /// `∂L/∂q^ρ`.
    pub dq: Vec<Expr>,
    /// `∂L/∂v^ρ`.
    pub dv: Vec<Expr>,
    /// `∂²L/∂v^ρ∂v^ν`.
    pub hess: Vec<Vec<Expr>>,
    /// `M[ρ][ν] = ∂²L/∂q^ρ∂v^ν`.
    pub mixed_q: Vec<Vec<Expr>>,
    /// `∂²L/∂t∂v^ρ`.
    pub mixed_t: Vec<Expr>,
    pub regularity: Regularity,
}

impl LagrangianSystem {
    pub fn from_source(n: usize, source: &str, seed: Vec<f64>) -> Result<LagrangianSystem, GeometryError> {
        let table = SymbolTable::lagrangian(n);
        let expr = parse(source, &table)?;
        LagrangianSystem::new(n, expr, seed)
    }

    pub fn new(n: usize, lagrangian: Expr, seed: Vec<f64>) -> Result<LagrangianSystem, GeometryError> {
        let table = SymbolTable::lagrangian(n);
        let dim = 2 * n + 1;
        if seed.len() != dim {
            return Err(GeometryError::SeedDimension {
                got: seed.len(),
                expected: dim,
            });
        }
        let q = |i: usize| 1 + i;
        let v = |i: usize| 1 + n + i;
        let dt = diff(&lagrangian, 0);
        let dq: Vec<Expr> = (0..n).map(|i| diff(&lagrangian, q(i))).collect();
        let dv: Vec<Expr> = (0..n).map(|i| diff(&lagrangian, v(i))).collect();
        let hess = (0..n).map(|r| (0..n).map(|c| diff(&dv[c], v(r))).collect()).collect();
        let mixed_q = (0..n).map(|r| (0..n).map(|c| diff(&dv[c], q(r))).collect()).collect();
        let mixed_t = dv.iter().map(|e| diff(e, 0)).collect();
        let mut sys = LagrangianSystem {
            n,
            table,
            lagrangian,
            seed,
            dt,
            dq,
            dv,
            hess,
            mixed_q,
            mixed_t,
            regularity: Regularity::Regular,
        };
        sys.lagrangian.eval_checked(&sys.seed)?;
        let h0 = sys.hessian_at(&sys.seed);
        if h0.iter().any(|x| !x.is_finite()) {
            return Err(GeometryError::Domain(expr_core::DomainError::NonFinite));
        }
        let r0 = linalg::rank(&h0);
        for p in sampling::gaussian_cloud(&sys.seed, RANK_SAMPLES, 1.0, RANK_SAMPLE_SEED) {
            let h = sys.hessian_at(&p);
            if h.iter().any(|x| !x.is_finite()) {
                continue;
            }
            let r = linalg::rank(&h);
            if r != r0 {
                return Err(GeometryError::MixedRank {
                    seed_rank: r0,
                    rank: r,
                    point: p,
                });
            }
        }
        sys.regularity = if r0 == n {
            Regularity::Regular
        } else {
            Regularity::Singular { corank: n - r0 }
        };
        Ok(sys)
    }

    pub fn dim(&self) -> usize {
        2 * self.n + 1
    }

    pub fn q_slot(&self, i: usize) -> usize {
        1 + i
    }

    pub fn v_slot(&self, i: usize) -> usize {
        1 + self.n + i
    }

    pub fn is_regular(&self) -> bool {
        self.regularity == Regularity::Regular
    }

    pub fn lagrangian_field(&self) -> ScalarField {
        ScalarField::symbolic(self.lagrangian.clone(), self.dim())
    }

    /// `E = v^ρ ∂L/∂v^ρ − L`.
    pub fn energy(&self) -> Expr {
        let mut acc = Expr::Const(0.0);
        for i in 0..self.n {
            acc = add(acc, mul(Expr::Var(self.v_slot(i)), self.dv[i].clone()));
        }
        sub(acc, self.lagrangian.clone())
    }

    pub fn hessian_at(&self, x: &[f64]) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |r, c| self.hess[r][c].eval(x))
    }

    pub fn hessian_jet(&self, x: &[Jet]) -> JetMat {
        JetMat::from_rows(
            self.hess
                .iter()
                .map(|row| row.iter().map(|e| e.eval(x)).collect())
                .collect(),
        )
    }

    pub fn hessian_rank(&self) -> usize {
        self.n - self.regularity.corank()
    }
}
