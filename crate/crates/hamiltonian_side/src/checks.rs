//! Closed-form Dirac bracket displays compared against the general formula.

use crate::dirac::DiracContext;
use expr_core::{diff, Expr, ScalarField};
use jet_geometry::LagrangianSystem;
use nalgebra::{DMatrix, DVector};

fn coordinates(dim: usize) -> Vec<ScalarField> {
    (0..dim).map(|i| ScalarField::coordinate(dim, i)).collect()
}

/// Results for `𝒞_{αβ} = C̄_{αβ} + ∂_tX̄_α ∂_tX̄_β` and the bracket written with it.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeDependentReport {
    /// Largest entry of `𝒞 𝒞⁻¹ − Id` with the closed-form inverse.
    pub inverse_residual: f64,
    /// Largest `|aᵀ C̄⁻¹ a|`.
    pub skew_identity: f64,
    /// Display with the lower-index `𝒞`, against the general bracket.
    pub display_mismatch: f64,
    /// Same display with `𝒞^{αβ}` in place of `𝒞_{αβ}`.
    pub upper_index_mismatch: f64,
}

pub fn time_dependent_check(ctx: &DiracContext, points: &[Vec<f64>]) -> TimeDependentReport {
    let dim = ctx.structure.dim;
    let xs = ctx.second_class_fields();
    let k = xs.len();
    let coords = coordinates(dim);
    let mut rep = TimeDependentReport {
        inverse_residual: 0.0,
        skew_identity: 0.0,
        display_mismatch: 0.0,
        upper_index_mismatch: 0.0,
    };
    for x in points {
        let cbar = ctx.cbar_at(x);
        let cinv = match cbar.clone().try_inverse() {
            Some(m) => m,
            None => {
                rep.inverse_residual = f64::INFINITY;
                continue;
            }
        };
        let grads: Vec<Vec<f64>> = xs.iter().map(|f| f.gradient(x)).collect();
        let a = DVector::from_fn(k, |i, _| grads[i][0]);
        let big = &cbar + &a * a.transpose();
        let ca = &cinv * &a;
        let closed = &cinv + &ca * ca.transpose();
        let resid = &big * &closed - DMatrix::identity(k, k);
        rep.inverse_residual = rep.inverse_residual.max(resid.amax());
        rep.skew_identity = rep.skew_identity.max(a.dot(&(&cinv * &a)).abs());

        let l = ctx.structure.poisson_at(x);
        let dcs: Vec<DVector<f64>> = coords.iter().map(|c| DVector::from_vec(c.gradient(x))).collect();
        let dxs: Vec<DVector<f64>> = grads.iter().map(|g| DVector::from_vec(g.clone())).collect();
        let br = |u: &DVector<f64>, v: &DVector<f64>| u.dot(&(&l * v));
        for (fi, df) in dcs.iter().enumerate() {
            for (gi, dg) in dcs.iter().enumerate() {
                let reference = ctx.dirac_bracket(&coords[fi], &coords[gi]).eval(x);
                let xg = DVector::from_fn(k, |b, _| br(&dxs[b], dg));
                let xf = DVector::from_fn(k, |b, _| br(&dxs[b], df));
                let plain = br(df, dg);
                for (mat, slot) in [(&big, 0usize), (&closed, 1usize)] {
                    let first = (mat * &xg).dot(&xf);
                    let second = a.dot(&(mat * &xg)) * a.dot(&(mat * &xf));
                    let display = plain - first - second;
                    let m = (display - reference).abs();
                    if slot == 0 {
                        rep.display_mismatch = rep.display_mismatch.max(m);
                    } else {
                        rep.upper_index_mismatch = rep.upper_index_mismatch.max(m);
                    }
                }
            }
        }
    }
    rep
}

/// Results of the affine-Lagrangian bracket identities.
#[derive(Clone, Debug, PartialEq)]
pub struct AffineReport {
    /// `|{ξ_i, ξ_j} − γ_ij|` on the samples.
    pub gamma_bracket_residual: f64,
    /// Closed form whose last factor carries `∂F/∂p_l`.
    pub df_factor_mismatch: f64,
    /// Last factor with `∂G/∂p_l`.
    pub dg_factor_mismatch: f64,
    /// Last factor with `∂G/∂p_l` and `γ^{ji}` in place of `γ^{ij}`.
    pub dg_transposed_mismatch: f64,
}

/// `γ_i = ∂L/∂v^i` for a Lagrangian affine in the velocities, as functions of `(t, q)`.
pub fn affine_one_form(sys: &LagrangianSystem) -> Vec<Expr> {
    sys.dv.clone()
}

pub fn affine_closed_form_check(ctx: &DiracContext, sys: &LagrangianSystem, points: &[Vec<f64>]) -> AffineReport {
    let n = sys.n;
    let dim = 2 * n + 1;
    let gamma = affine_one_form(sys);
    let dgam: Vec<Vec<Expr>> = gamma.iter().map(|g| (0..n).map(|k| diff(g, 1 + k)).collect()).collect();
    let coords = coordinates(dim);
    let xi: Vec<ScalarField> = (0..n)
        .map(|i| {
            let g = gamma[i].clone();
            ScalarField::composed(dim, move |x| &x[n + 1 + i] - &g.eval(x))
        })
        .collect();
    let mut rep = AffineReport {
        gamma_bracket_residual: 0.0,
        df_factor_mismatch: 0.0,
        dg_factor_mismatch: 0.0,
        dg_transposed_mismatch: 0.0,
    };
    for x in points {
        let d = DMatrix::from_fn(n, n, |i, k| dgam[i][k].eval(x));
        let gij = DMatrix::from_fn(n, n, |i, j| d[(j, i)] - d[(i, j)]);
        for i in 0..n {
            for j in 0..n {
                let b = ctx.bracket(&xi[i], &xi[j]).eval(x);
                rep.gamma_bracket_residual = rep.gamma_bracket_residual.max((b - gij[(i, j)]).abs());
            }
        }
        let ginv = match gij.clone().try_inverse() {
            Some(m) => m,
            None => {
                rep.df_factor_mismatch = f64::INFINITY;
                continue;
            }
        };
        for f in 0..dim {
            for g in 0..dim {
                let reference = ctx.dirac_bracket(&coords[f], &coords[g]).eval(x);
                let df = |s: usize| if s == f { 1.0 } else { 0.0 };
                let dg = |s: usize| if s == g { 1.0 } else { 0.0 };
                let q = |i: usize| 1 + i;
                let p = |i: usize| 1 + n + i;
                let canonical: f64 = (0..n).map(|i| df(q(i)) * dg(p(i)) - df(p(i)) * dg(q(i))).sum();
                let left = |i: usize| df(q(i)) + (0..n).map(|k| d[(i, k)] * df(p(k))).sum::<f64>();
                let right_f = |j: usize| dg(q(j)) + (0..n).map(|l| d[(j, l)] * df(p(l))).sum::<f64>();
                let right_g = |j: usize| dg(q(j)) + (0..n).map(|l| d[(j, l)] * dg(p(l))).sum::<f64>();
                let mut with_df = canonical;
                let mut with_dg = canonical;
                let mut transposed = canonical;
                for i in 0..n {
                    for j in 0..n {
                        with_df -= ginv[(i, j)] * left(i) * right_f(j);
                        with_dg -= ginv[(i, j)] * left(i) * right_g(j);
                        transposed -= ginv[(j, i)] * left(i) * right_g(j);
                    }
                }
                rep.df_factor_mismatch = rep.df_factor_mismatch.max((with_df - reference).abs());
                rep.dg_factor_mismatch = rep.dg_factor_mismatch.max((with_dg - reference).abs());
                rep.dg_transposed_mismatch = rep.dg_transposed_mismatch.max((transposed - reference).abs());
            }
        }
    }
    rep
}

/// Reeb field of `(−dγ, dt)` on `E` by a direct linear solve, in the slots `(t, q)`.
pub fn affine_reeb_direct(sys: &LagrangianSystem, tq: &[f64]) -> Option<Vec<f64>> {
    let n = sys.n;
    let mut x = tq.to_vec();
    x.extend(std::iter::repeat(0.0).take(n));
    let forms = jet_geometry::build_forms(sys);
    let om = forms.omega_at(&x);
    let m = n + 1;
    let mut a = DMatrix::zeros(m + 1, m);
    let mut rhs = DVector::zeros(m + 1);
    for j in 0..m {
        for i in 0..m {
            a[(j, i)] = om[(i, j)];
        }
    }
    a[(m, 0)] = 1.0;
    rhs[m] = 1.0;
    let sol = a.clone().svd(true, true).solve(&rhs, 1e-12).ok()?;
    if (&a * &sol - &rhs).amax() > 1e-10 {
        return None;
    }
    Some(sol.iter().copied().collect())
}

/// `∂/∂t + ½γ^{ij}(∂γ₀/∂q^i − ∂γ_i/∂t)∂/∂q^j` in closed form for the affine case.
pub fn affine_reeb_display(sys: &LagrangianSystem, tq: &[f64]) -> Option<Vec<f64>> {
    let n = sys.n;
    let mut x = tq.to_vec();
    x.extend(std::iter::repeat(0.0).take(n));
    let gamma0 = expr_core::diff::sub(sys.lagrangian.clone(), {
        let mut acc = Expr::c(0.0);
        for i in 0..n {
            acc = expr_core::diff::add(acc, expr_core::diff::mul(Expr::Var(1 + n + i), sys.dv[i].clone()));
        }
        acc
    });
    let d = DMatrix::from_fn(n, n, |i, k| diff(&sys.dv[i], 1 + k).eval(&x));
    let gij = DMatrix::from_fn(n, n, |i, j| d[(j, i)] - d[(i, j)]);
    let ginv = gij.try_inverse()?;
    let mut out = vec![0.0; n + 1];
    out[0] = 1.0;
    for j in 0..n {
        for i in 0..n {
            let c = diff(&gamma0, 1 + i).eval(&x) - diff(&sys.dv[i], 0).eval(&x);
            out[1 + j] += 0.5 * ginv[(i, j)] * c;
        }
    }
    Some(out)
}
