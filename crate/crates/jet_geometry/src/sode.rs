use expr_core::{Jet, VectorField};

/// `𝒥 = (dq^ρ − v^ρ dt) ⊗ ∂/∂v^ρ` applied to a field on `(t, q, v)`.
pub fn canonical_endomorphism(n: usize, x: &VectorField) -> VectorField {
    let f = x.clone();
    VectorField::new(x.arity(), 2 * n + 1, move |p| {
        let xv = f.eval_jet(p);
        let mut out = vec![Jet::constant(0.0); 2 * n + 1];
        for r in 0..n {
            out[1 + n + r] = &xv[1 + r] - &(&p[1 + n + r] * &xv[0]);
        }
        out
    })
}

/// `(max |𝒥X|, |⟨dt, X⟩ − 1|)` at a point.
pub fn sode_residual(n: usize, x: &VectorField, point: &[f64]) -> (f64, f64) {
    let xv = x.eval(point);
    let j = (0..n)
        .map(|r| (xv[1 + r] - point[1 + n + r] * xv[0]).abs())
        .fold(0.0, f64::max);
    (j, (xv[0] - 1.0).abs())
}

pub fn is_sode(n: usize, x: &VectorField, points: &[Vec<f64>], tol: f64) -> bool {
    points.iter().all(|p| {
        let (j, e) = sode_residual(n, x, p);
        j <= tol && e <= tol
    })
}

/// `D = ∂/∂t + v^ρ ∂/∂q^ρ`.
pub fn total_time_derivative(n: usize) -> VectorField {
    VectorField::new(2 * n + 1, 2 * n + 1, move |p| {
        let mut out = vec![Jet::constant(0.0); 2 * n + 1];
        out[0] = Jet::constant(1.0);
        for r in 0..n {
            out[1 + r] = p[1 + n + r].clone();
        }
        out
    })
}
