//! Pointwise identities expected on the first constraint level.

use crate::problem::GeometricProblem;
use expr_core::jet::lift;
use nalgebra::DMatrix;
use precosym::{linalg, Subspace};

/// Mutual containment residual between `ker Ω ∩ ker η` and `ker ω ∩ ker η`.
pub fn kernel_agreement(p: &GeometricProblem, x: &[f64]) -> f64 {
    let n = p.dim;
    let eta = p.eta.eval(x);
    let stack = |w: Vec<f64>| {
        let mut m = DMatrix::zeros(n + 1, n);
        for i in 0..n {
            for j in 0..n {
                m[(j, i)] = w[i * n + j];
            }
            m[(n, i)] = eta[i];
        }
        Subspace::from_matrix(&linalg::null_space(&m))
    };
    let a = stack(p.omega_big.eval(x));
    let b = stack(p.omega.eval(x));
    if a.dim() != b.dim() {
        return f64::INFINITY;
    }
    a.containment_residual(&b).max(b.containment_residual(&a))
}

/// Largest `|dγ(Z, W)|` for `Z, W` in `ker ω ∩ ker η`, with `dγ` from
/// exact derivatives of the `γ` evaluator.
pub fn dgamma_on_kernel(p: &GeometricProblem, x: &[f64]) -> f64 {
    let n = p.dim;
    let k = linalg::null_space(&p.flat_at(x));
    let dg = p.gamma.exterior_derivative().eval_jet(&lift(x));
    let m = DMatrix::from_fn(n, n, |a, b| dg[a * n + b].re());
    let r = k.transpose() * m * &k;
    linalg::max_abs(&r)
}
