use crate::system::LagrangianSystem;
use crate::GeometryError;
use expr_core::{Jet, VectorField};
use nalgebra::DVector;
use precosym::frame::FrozenPivots;
use precosym::PrecoError;
use std::sync::Arc;

/// Smooth frame `W_j = ∂/∂v^{f_j} + W_j^i ∂/∂v^i` of `ker FL_*`, with the
/// principal Hessian pivots `P` chosen at the seed and frozen.
#[derive(Clone, Debug)]
pub struct KerFl {
    pub n: usize,
    pub pivots: FrozenPivots,
}

impl KerFl {
    pub fn at_seed(sys: &LagrangianSystem) -> KerFl {
        KerFl {
            n: sys.n,
            pivots: FrozenPivots::select_symmetric(&sys.hessian_at(&sys.seed)),
        }
    }

    /// Pivot velocity indices.
    pub fn pivot_velocities(&self) -> &[usize] {
        &self.pivots.cols
    }

    /// Non-pivot velocity indices, one per kernel vector.
    pub fn free_velocities(&self) -> Vec<usize> {
        self.pivots.free_cols()
    }

    pub fn len(&self) -> usize {
        self.n - self.pivots.rank()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Kernel frame at a hyper-dual point as full chart vectors.
    pub fn basis_jet(&self, sys: &LagrangianSystem, x: &[Jet]) -> Result<Vec<Vec<Jet>>, GeometryError> {
        let h = sys.hessian_jet(x);
        self.pivots.check(&h).map_err(degeneracy)?;
        let null = self.pivots.null_basis(&h).map_err(degeneracy)?;
        Ok(null
            .into_iter()
            .map(|w| {
                let mut v = vec![Jet::constant(0.0); 2 * self.n + 1];
                for (i, c) in w.into_iter().enumerate() {
                    v[1 + self.n + i] = c;
                }
                v
            })
            .collect())
    }

    pub fn basis_at(&self, sys: &LagrangianSystem, x: &[f64]) -> Result<Vec<DVector<f64>>, GeometryError> {
        let b = self.basis_jet(sys, &expr_core::jet::lift(x))?;
        Ok(b.iter()
            .map(|v| DVector::from_iterator(v.len(), v.iter().map(Jet::re)))
            .collect())
    }

    /// Frame vectors as chart fields; a degenerate pivot block yields NaN.
    pub fn fields(&self, sys: &LagrangianSystem) -> Vec<VectorField> {
        let dim = sys.dim();
        let shared = Arc::new((self.clone(), sys.clone()));
        (0..self.len())
            .map(|j| {
                let s = shared.clone();
                VectorField::new(dim, dim, move |p| match s.0.basis_jet(&s.1, p) {
                    Ok(mut b) => b.swap_remove(j),
                    Err(_) => vec![Jet::constant(f64::NAN); dim],
                })
            })
            .collect()
    }
}

fn degeneracy(e: PrecoError) -> GeometryError {
    match e {
        PrecoError::PivotDegeneracy { rcond } => GeometryError::PivotDegeneracy { rcond },
        _ => GeometryError::PivotDegeneracy { rcond: 0.0 },
    }
}

/// `ker FL_*` at `x` with pivots frozen at the system seed.
pub fn ker_fl_basis(sys: &LagrangianSystem, x: &[f64]) -> Result<Vec<DVector<f64>>, GeometryError> {
    KerFl::at_seed(sys).basis_at(sys, x)
}
