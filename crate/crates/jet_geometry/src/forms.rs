use crate::system::LagrangianSystem;
use expr_core::diff::{add, mul, neg, sub};
use expr_core::{CovectorField, Expr, TwoFormField};
use nalgebra::DMatrix;
use std::sync::Arc;

/// Poincaré–Cartan forms `Θ_L`, `Ω_L` and the time form `η = dt`.
#[derive(Clone, Debug)]
pub struct LagrangianForms {
    pub dim: usize,
    pub theta_exprs: Vec<Expr>,
    /// Row-major `Ω_L` entries.
    pub omega_exprs: Vec<Expr>,
    pub theta: CovectorField,
    pub omega: TwoFormField,
    pub eta: CovectorField,
}

impl LagrangianForms {
    pub fn omega_at(&self, x: &[f64]) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.dim, self.dim, &self.omega.eval(x))
    }

    pub fn theta_at(&self, x: &[f64]) -> Vec<f64> {
        self.theta.eval(x)
    }
}

pub fn build_forms(sys: &LagrangianSystem) -> LagrangianForms {
    let n = sys.n;
    let dim = sys.dim();
    let energy = sys.energy();
    let mut theta = vec![Expr::Const(0.0); dim];
    theta[0] = neg(energy);
    for i in 0..n {
        theta[sys.q_slot(i)] = sys.dv[i].clone();
    }

    let mut w = vec![Expr::Const(0.0); dim * dim];
    let mut put = |a: usize, b: usize, e: Expr| {
        w[b * dim + a] = neg(e.clone());
        w[a * dim + b] = e;
    };
    for r in 0..n {
        for c in 0..n {
            put(sys.v_slot(r), sys.q_slot(c), neg(sys.hess[r][c].clone()));
            if r < c {
                put(
                    sys.q_slot(r),
                    sys.q_slot(c),
                    neg(sub(sys.mixed_q[r][c].clone(), sys.mixed_q[c][r].clone())),
                );
            }
        }
        let mut vt = Expr::Const(0.0);
        let mut qt = Expr::Const(0.0);
        for c in 0..n {
            vt = add(vt, mul(Expr::Var(sys.v_slot(c)), sys.hess[r][c].clone()));
            qt = add(qt, mul(sys.mixed_q[r][c].clone(), Expr::Var(sys.v_slot(c))));
        }
        qt = add(sub(qt, sys.dq[r].clone()), sys.mixed_t[r].clone());
        put(sys.v_slot(r), 0, vt);
        put(sys.q_slot(r), 0, qt);
    }

    let th = Arc::new(theta.clone());
    let om = Arc::new(w.clone());
    let mut eta = vec![0.0; dim];
    eta[0] = 1.0;
    LagrangianForms {
        dim,
        theta_exprs: theta,
        omega_exprs: w,
        theta: CovectorField::new(dim, move |p| th.iter().map(|e| e.eval(p)).collect()),
        omega: TwoFormField::new(dim, move |p| om.iter().map(|e| e.eval(p)).collect()),
        eta: CovectorField::constant(eta),
    }
}
