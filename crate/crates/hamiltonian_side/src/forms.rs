use crate::chart::MomentumChart;
use expr_core::jet::lift;
use expr_core::{CovectorField, Jet, TwoFormField, VectorField};
use jet_geometry::LagrangianForms;
use nalgebra::DMatrix;

/// `Θ_{h₀} = p_i dq^i − h₀ dt`, `Ω_{h₀} = −dΘ_{h₀}` and `η⁰ = dt` on the chart of `𝒫`.
#[derive(Clone, Debug)]
pub struct HamiltonCartanForms {
    pub dim: usize,
    pub theta: CovectorField,
    pub omega: TwoFormField,
    pub eta: CovectorField,
}

pub fn hamilton_cartan_forms(chart: &MomentumChart) -> HamiltonCartanForms {
    let n = chart.n;
    let dim = chart.dim_p();
    let emb = chart.embedding.clone();
    let energy = chart.energy.clone();
    let theta = CovectorField::new(dim, move |y| {
        let x = emb.eval_jet(y);
        let mut out = vec![Jet::constant(0.0); dim];
        out[0] = -energy.eval_jet(y);
        for i in 0..n {
            out[1 + i] = x[n + 1 + i].clone();
        }
        out
    });
    let d = theta.exterior_derivative();
    let omega = TwoFormField::new(dim, move |y| d.eval_jet(y).into_iter().map(|v| -v).collect());
    let mut e = vec![0.0; dim];
    e[0] = 1.0;
    HamiltonCartanForms {
        dim,
        theta,
        omega,
        eta: CovectorField::constant(e),
    }
}

/// Jacobian of a map at a point, one column per source direction.
pub fn map_jacobian(map: &VectorField, x: &[f64]) -> DMatrix<f64> {
    let xs = lift(x);
    let cols: Vec<Vec<f64>> = (0..map.arity())
        .map(|j| {
            let mut dir = vec![Jet::constant(0.0); map.arity()];
            dir[j] = Jet::constant(1.0);
            map.directional_jet(&xs, &dir).iter().map(Jet::re).collect()
        })
        .collect();
    DMatrix::from_fn(map.dim(), map.arity(), |i, j| cols[j][i])
}

/// Largest entry of `Tᵀ Ω_{h₀}(FL₀ x) T − Ω_L(x)` and of `Θ_{h₀}∘T − Θ_L`
/// over the points, `T` being the Jacobian of `FL₀`.
pub fn pullback_residual(
    chart: &MomentumChart,
    forms: &HamiltonCartanForms,
    lagrangian: &LagrangianForms,
    points: &[Vec<f64>],
) -> f64 {
    let mut worst: f64 = 0.0;
    let dp = forms.dim;
    for x in points {
        let t = map_jacobian(&chart.fl0, x);
        let y = chart.fl0.eval(x);
        let om = DMatrix::from_row_slice(dp, dp, &forms.omega.eval(&y));
        let pulled = t.transpose() * om * &t;
        let diff = pulled - lagrangian.omega_at(x);
        worst = worst.max(diff.iter().fold(0.0, |a, v| a.max(v.abs())));
        let th = nalgebra::DVector::from_vec(forms.theta.eval(&y));
        let pth = t.transpose() * th;
        for (a, b) in pth.iter().zip(lagrangian.theta_at(x)) {
            worst = worst.max((a - b).abs());
        }
    }
    worst
}
