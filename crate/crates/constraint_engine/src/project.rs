use crate::Settings;
use expr_core::ScalarField;
use nalgebra::{DMatrix, DVector};
use precosym::{linalg, sampling};
use rayon::prelude::*;

fn values(cs: &[ScalarField], x: &[f64]) -> DVector<f64> {
    DVector::from_iterator(cs.len(), cs.iter().map(|c| c.eval(x)))
}

pub fn jacobian(cs: &[ScalarField], x: &[f64]) -> DMatrix<f64> {
    let rows: Vec<Vec<f64>> = cs.iter().map(|c| c.gradient(x)).collect();
    DMatrix::from_fn(cs.len(), x.len(), |i, j| rows[i][j])
}

fn sup(v: &DVector<f64>) -> f64 {
    v.iter()
        .fold(0.0, |a, x| if x.is_nan() { f64::INFINITY } else { a.max(x.abs()) })
}

/// Damped Gauss–Newton with minimum-norm steps onto `{c = 0}`.
pub fn project(cs: &[ScalarField], x0: &[f64], s: &Settings) -> Option<Vec<f64>> {
    let mut x = x0.to_vec();
    if cs.is_empty() {
        return Some(x);
    }
    let mut f = values(cs, &x);
    let mut polish = 0;
    for _ in 0..s.gn_iterations {
        let r = sup(&f);
        if !r.is_finite() {
            return None;
        }
        if r <= s.projection_tol {
            polish += 1;
            if polish > 2 || r == 0.0 {
                return Some(x);
            }
        }
        let j = jacobian(cs, &x);
        if j.iter().any(|v| !v.is_finite()) {
            return None;
        }
        let step = linalg::lstsq(&j, &(-&f));
        let mut t = 1.0;
        let norm0 = f.norm();
        loop {
            let trial: Vec<f64> = x.iter().zip(step.iter()).map(|(a, d)| a + t * d).collect();
            let ft = values(cs, &trial);
            if ft.iter().all(|v| v.is_finite()) && ft.norm() <= norm0 {
                x = trial;
                f = ft;
                break;
            }
            t *= 0.5;
            if t < 1e-6 {
                return if r <= s.projection_tol { Some(x) } else { None };
            }
        }
    }
    (sup(&f) <= s.projection_tol).then_some(x)
}

/// Projected seed followed by projected Gaussian perturbations of it.
/// Returns `None` when neither the seed nor any perturbation converges.
pub fn sample_level(cs: &[ScalarField], seed: &[f64], s: &Settings, stream: u64) -> Option<Vec<Vec<f64>>> {
    let starts = sampling::gaussian_cloud(
        seed,
        s.samples,
        s.sigma,
        s.rng_seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15),
    );
    let first = match project(cs, seed, s) {
        Some(p) => p,
        None => {
            let alt: Vec<Option<Vec<f64>>> = starts.par_iter().map(|st| project(cs, st, s)).collect();
            alt.into_iter().flatten().next()?
        }
    };
    let cloud = sampling::gaussian_cloud(
        &first,
        s.samples,
        s.sigma,
        s.rng_seed ^ stream.wrapping_add(1).wrapping_mul(0xD1B5_4A32_D192_ED03),
    );
    let projected: Vec<Option<Vec<f64>>> = cloud.par_iter().map(|st| project(cs, st, s)).collect();
    let mut out = vec![first];
    out.extend(projected.into_iter().flatten());
    Some(out)
}
