//! Linear subspaces with an orthonormal working copy.

use crate::linalg;
use nalgebra::{DMatrix, DVector};

/// Mutual-projection tolerance for subspace comparisons.
pub const SUBSPACE_TOL: f64 = 1e-8;

#[derive(Clone, Debug)]
pub struct Subspace {
    ambient: usize,
    basis: DMatrix<f64>,
    ortho: DMatrix<f64>,
}

impl Subspace {
    /// Span of the given columns; dependent columns are discarded.
    pub fn span(ambient: usize, vectors: &[DVector<f64>]) -> Subspace {
        if vectors.is_empty() {
            return Subspace::zero(ambient);
        }
        let m = DMatrix::from_columns(vectors);
        Subspace::from_matrix(&m)
    }

    pub fn from_matrix(m: &DMatrix<f64>) -> Subspace {
        let ambient = m.nrows();
        let ortho = linalg::column_space(m);
        let mut basis_cols: Vec<DVector<f64>> = Vec::new();
        for j in 0..m.ncols() {
            let mut trial = basis_cols.clone();
            trial.push(m.column(j).into_owned());
            if linalg::rank(&DMatrix::from_columns(&trial)) == trial.len() {
                basis_cols = trial;
            }
        }
        let basis = if basis_cols.is_empty() {
            DMatrix::zeros(ambient, 0)
        } else {
            DMatrix::from_columns(&basis_cols)
        };
        Subspace { ambient, basis, ortho }
    }

    pub fn zero(ambient: usize) -> Subspace {
        Subspace {
            ambient,
            basis: DMatrix::zeros(ambient, 0),
            ortho: DMatrix::zeros(ambient, 0),
        }
    }

    pub fn full(ambient: usize) -> Subspace {
        Subspace::from_matrix(&DMatrix::identity(ambient, ambient))
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    pub fn dim(&self) -> usize {
        self.ortho.ncols()
    }

    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    pub fn orthonormal(&self) -> &DMatrix<f64> {
        &self.ortho
    }

    pub fn vectors(&self) -> Vec<DVector<f64>> {
        (0..self.basis.ncols())
            .map(|j| self.basis.column(j).into_owned())
            .collect()
    }

    /// Distance from `v` to the subspace, relative to `max(‖v‖, 1)`.
    pub fn residual(&self, v: &DVector<f64>) -> f64 {
        let proj = if self.dim() == 0 {
            DVector::zeros(self.ambient)
        } else {
            &self.ortho * (self.ortho.transpose() * v)
        };
        (v - proj).norm() / v.norm().max(1.0)
    }

    pub fn contains(&self, v: &DVector<f64>) -> bool {
        self.residual(v) <= SUBSPACE_TOL
    }

    /// Largest residual of `self`'s orthonormal basis against `other`.
    pub fn containment_residual(&self, other: &Subspace) -> f64 {
        (0..self.dim())
            .map(|j| other.residual(&self.ortho.column(j).into_owned()))
            .fold(0.0, f64::max)
    }

    pub fn is_subspace_of(&self, other: &Subspace) -> bool {
        self.containment_residual(other) <= SUBSPACE_TOL
    }

    pub fn same_as(&self, other: &Subspace) -> bool {
        self.dim() == other.dim() && self.is_subspace_of(other) && other.is_subspace_of(self)
    }

    pub fn intersection(&self, other: &Subspace) -> Subspace {
        if self.dim() == 0 || other.dim() == 0 {
            return Subspace::zero(self.ambient);
        }
        let stacked = DMatrix::from_columns(
            &(0..self.dim())
                .map(|j| self.ortho.column(j).into_owned())
                .chain((0..other.dim()).map(|j| -other.ortho.column(j).into_owned()))
                .collect::<Vec<_>>(),
        );
        let ns = linalg::null_space(&stacked);
        let coeffs = ns.rows(0, self.dim()).into_owned();
        Subspace::from_matrix(&(&self.ortho * coeffs))
    }

    /// Annihilator as covectors (rows of the returned matrix's columns).
    pub fn annihilator(&self) -> Vec<DVector<f64>> {
        let ns = if self.dim() == 0 {
            DMatrix::identity(self.ambient, self.ambient)
        } else {
            linalg::null_space(&self.ortho.transpose())
        };
        (0..ns.ncols()).map(|j| ns.column(j).into_owned()).collect()
    }
}
