use crate::system::LagrangianSystem;
use expr_core::{Jet, VectorField};
use nalgebra::DMatrix;
use std::sync::Arc;

/// `FL(t, q, v) = (t, q, ∂L/∂v)` and the extended map that also carries
/// `p = L − v^ρ ∂L/∂v^ρ` as a last coordinate.
#[derive(Clone, Debug)]
pub struct LegendreMaps {
    pub fl: VectorField,
    pub fl_ext: VectorField,
}

pub fn legendre_map(sys: &LagrangianSystem) -> LegendreMaps {
    let n = sys.n;
    let dim = sys.dim();
    let dv = Arc::new(sys.dv.clone());
    let energy = Arc::new(sys.energy());
    let d1 = dv.clone();
    let fl = VectorField::new(dim, dim, move |p| {
        let mut out: Vec<Jet> = p[..=n].to_vec();
        out.extend(d1.iter().map(|e| e.eval(p)));
        out
    });
    let fl_ext = VectorField::new(dim, dim + 1, move |p| {
        let mut out: Vec<Jet> = p[..=n].to_vec();
        out.extend(dv.iter().map(|e| e.eval(p)));
        out.push(-energy.eval::<Jet>(p));
        out
    });
    LegendreMaps { fl, fl_ext }
}

/// Matrix of `FL_*` at `x` in the block form
/// `[[1, 0, 0], [0, I, 0], [∂²L/∂t∂v, ∂²L/∂q∂v, ∂²L/∂v∂v]]`.
pub fn legendre_tangent(sys: &LagrangianSystem, x: &[f64]) -> DMatrix<f64> {
    let n = sys.n;
    let mut m = DMatrix::zeros(sys.dim(), sys.dim());
    for i in 0..=n {
        m[(i, i)] = 1.0;
    }
    for r in 0..n {
        let row = 1 + n + r;
        m[(row, 0)] = sys.mixed_t[r].eval(x);
        for c in 0..n {
            m[(row, 1 + c)] = sys.mixed_q[c][r].eval(x);
            m[(row, 1 + n + c)] = sys.hess[c][r].eval(x);
        }
    }
    m
}
