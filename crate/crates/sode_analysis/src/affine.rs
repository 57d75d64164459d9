//! Lagrangians affine in the velocities, `L = γ_i(t, q) v^i + γ_0(t, q)`.

use expr_core::diff::{add, mul, sub};
use expr_core::{diff, Expr};
use jet_geometry::{LagrangianForms, LagrangianSystem};

/// Components of the one-form `γ = γ_0 dt + γ_i dq^i` on `E`.
#[derive(Clone, Debug)]
pub struct AffineOneForm {
    pub gamma0: Expr,
    pub gamma: Vec<Expr>,
}

/// Splits `L` into `γ`, or returns `None` when some component depends on a
/// velocity at one of the probe points.
pub fn affine_one_form(sys: &LagrangianSystem, probes: &[Vec<f64>]) -> Option<AffineOneForm> {
    let n = sys.n;
    let mut vdv = Expr::c(0.0);
    for i in 0..n {
        vdv = add(vdv, mul(Expr::Var(sys.v_slot(i)), sys.dv[i].clone()));
    }
    let gamma0 = sub(sys.lagrangian.clone(), vdv);
    let gamma = sys.dv.clone();
    for e in std::iter::once(&gamma0).chain(&gamma) {
        for r in 0..n {
            let d = diff(e, sys.v_slot(r));
            if probes.iter().any(|x| d.eval(x).abs() > 1e-12) {
                return None;
            }
        }
    }
    Some(AffineOneForm { gamma0, gamma })
}

/// Largest entry of `Θ_L − π*γ` over the points.
pub fn theta_pullback_residual(forms: &LagrangianForms, form: &AffineOneForm, points: &[Vec<f64>]) -> f64 {
    let mut worst: f64 = 0.0;
    for x in points {
        let th = forms.theta_at(x);
        let mut pulled = vec![0.0; th.len()];
        pulled[0] = form.gamma0.eval(x);
        for (i, g) in form.gamma.iter().enumerate() {
            pulled[1 + i] = g.eval(x);
        }
        for (a, b) in th.iter().zip(&pulled) {
            worst = worst.max((a - b).abs());
        }
    }
    worst
}
