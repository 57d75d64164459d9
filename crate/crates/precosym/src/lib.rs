//! Precosymplectic and cosymplectic linear algebra at a point.
//!
//! Conventions: `(i(v)ω)_j = Σ_i v^i ω_ij`, `(α∧β)_ij = α_i β_j − α_j β_i`
//! and `♭(v) = i(v)ω + ⟨η, v⟩η`, so the matrix of `♭` is `ωᵀ + ηηᵀ`. The
//! Poisson map `#` is defined by `♭(#α) = α − α(R)η`, and brackets follow
//! `{G, F} = X_F(G) = ⟨dG, #dF⟩`.

pub mod checks;
pub mod frame;
pub mod linalg;
pub mod sampling;
pub mod subspace;

pub use frame::{FrozenPivots, JetMat};
pub use subspace::{Subspace, SUBSPACE_TOL};

use expr_core::Jet;
use nalgebra::{DMatrix, DVector};
use thiserror::Error;

/// Tolerance for the precosymplectic triple conditions.
pub const TRIPLE_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PrecoError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("structure is not cosymplectic (rank of flat map {rank} < {dim})")]
    NotCosymplectic { rank: usize, dim: usize },
    #[error("D and #(D⁰) do not span the space (combined rank {rank} < {dim})")]
    SplitFails { rank: usize, dim: usize },
    #[error("frozen pivot block degenerated (reciprocal condition {rcond:e})")]
    PivotDegeneracy { rcond: f64 },
    #[error("singular linear system")]
    Singular,
    #[error("vector is not a Reeb vector: residual {0:e}")]
    BadReeb(f64),
}

/// A pair `(η, ω)` with optional Reeb vector.
#[derive(Clone, Debug)]
pub struct PrecoPoint {
    eta: DVector<f64>,
    omega: DMatrix<f64>,
    reeb: Option<DVector<f64>>,
}

impl PrecoPoint {
    /// Stores the antisymmetric part of `omega`.
    pub fn new(eta: DVector<f64>, omega: DMatrix<f64>) -> Result<PrecoPoint, PrecoError> {
        let n = eta.len();
        if omega.nrows() != n || omega.ncols() != n {
            return Err(PrecoError::DimensionMismatch {
                expected: n,
                got: omega.nrows(),
            });
        }
        let omega = (&omega - omega.transpose()) * 0.5;
        Ok(PrecoPoint { eta, omega, reeb: None })
    }

    /// Attaches `R` after checking `i(R)ω = 0` and `⟨η, R⟩ = 1`.
    pub fn with_reeb(mut self, r: DVector<f64>) -> Result<PrecoPoint, PrecoError> {
        self.check_len(&r)?;
        let res = (self.omega.transpose() * &r).norm().max((self.eta.dot(&r) - 1.0).abs());
        if res > TRIPLE_TOL * r.norm().max(1.0) {
            return Err(PrecoError::BadReeb(res));
        }
        self.reeb = Some(r);
        Ok(self)
    }

    pub fn from_jets(eta: &[Jet], omega: &[Jet]) -> Result<PrecoPoint, PrecoError> {
        let n = eta.len();
        PrecoPoint::new(
            DVector::from_iterator(n, eta.iter().map(Jet::re)),
            DMatrix::from_row_iterator(n, n, omega.iter().map(Jet::re)),
        )
    }

    pub fn dim(&self) -> usize {
        self.eta.len()
    }

    pub fn eta(&self) -> &DVector<f64> {
        &self.eta
    }

    pub fn omega(&self) -> &DMatrix<f64> {
        &self.omega
    }

    pub fn reeb_vector(&self) -> Option<&DVector<f64>> {
        self.reeb.as_ref()
    }

    fn check_len(&self, v: &DVector<f64>) -> Result<(), PrecoError> {
        if v.len() != self.dim() {
            return Err(PrecoError::DimensionMismatch {
                expected: self.dim(),
                got: v.len(),
            });
        }
        Ok(())
    }

    /// Matrix of `♭`: `ωᵀ + ηηᵀ`.
    pub fn flat_matrix(&self) -> DMatrix<f64> {
        self.omega.transpose() + &self.eta * self.eta.transpose()
    }

    pub fn contract(&self, v: &DVector<f64>) -> DVector<f64> {
        self.omega.transpose() * v
    }

    pub fn is_cosymplectic(&self) -> bool {
        linalg::rank(&self.flat_matrix()) == self.dim()
    }

    /// `ker ω ∩ ker η`.
    pub fn characteristic(&self) -> Subspace {
        let m = DMatrix::from_fn(self.dim() + 1, self.dim(), |i, j| {
            if i < self.dim() {
                self.omega[(j, i)]
            } else {
                self.eta[j]
            }
        });
        Subspace::from_matrix(&linalg::null_space(&m))
    }

    /// `ω_R = Ω − η ∧ i(R)Ω` for a vector with `⟨η, R⟩ = 1`.
    pub fn split_along(&self, r: &DVector<f64>) -> PrecoPoint {
        let gamma = self.contract(r);
        let wedge = &self.eta * gamma.transpose() - &gamma * self.eta.transpose();
        PrecoPoint {
            eta: self.eta.clone(),
            omega: &self.omega - wedge,
            reeb: Some(r.clone()),
        }
    }
}

/// `♭(v) = i(v)ω + ⟨η, v⟩η`.
pub fn flat_map(p: &PrecoPoint, v: &DVector<f64>) -> Result<DVector<f64>, PrecoError> {
    p.check_len(v)?;
    Ok(p.flat_matrix() * v)
}

/// `K⊥ = (♭K)⁰`.
pub fn orthogonal_complement(p: &PrecoPoint, k: &Subspace) -> Subspace {
    let n = p.dim();
    if k.dim() == 0 {
        return Subspace::full(n);
    }
    let flat = p.flat_matrix();
    let images: Vec<DVector<f64>> = k.vectors().iter().map(|v| &flat * v).collect();
    let m = DMatrix::from_fn(images.len(), n, |i, j| images[i][j]);
    Subspace::from_matrix(&linalg::null_space(&m))
}

/// The unique `R` with `i(R)ω = 0`, `⟨η, R⟩ = 1`.
pub fn reeb(p: &PrecoPoint) -> Result<DVector<f64>, PrecoError> {
    let flat = p.flat_matrix();
    let r = linalg::rank(&flat);
    if r < p.dim() {
        return Err(PrecoError::NotCosymplectic { rank: r, dim: p.dim() });
    }
    flat.lu().solve(p.eta()).ok_or(PrecoError::Singular)
}

/// `#α` with `♭(#α) = α − α(R)η`.
pub fn poisson_sharp(p: &PrecoPoint, alpha: &DVector<f64>) -> Result<DVector<f64>, PrecoError> {
    p.check_len(alpha)?;
    let r = match p.reeb_vector() {
        Some(r) if p.is_cosymplectic() => r.clone(),
        _ => reeb(p)?,
    };
    let rhs = alpha - p.eta() * alpha.dot(&r);
    p.flat_matrix().lu().solve(&rhs).ok_or(PrecoError::Singular)
}

/// `(X_F, E_F)` from the differential `dF`.
pub fn hamiltonian_and_evolution(
    p: &PrecoPoint,
    df: &DVector<f64>,
) -> Result<(DVector<f64>, DVector<f64>), PrecoError> {
    let x = poisson_sharp(p, df)?;
    let r = reeb(p)?;
    let e = &r + &x;
    Ok((x, e))
}

/// Projectors for `V = D ⊕ #(D⁰)`.
pub fn dirac_split(p: &PrecoPoint, d: &Subspace) -> Result<(DMatrix<f64>, DMatrix<f64>), PrecoError> {
    let n = p.dim();
    let ann = d.annihilator();
    let mut sharp = Vec::with_capacity(ann.len());
    for a in &ann {
        sharp.push(poisson_sharp(p, a)?);
    }
    let dv = d.vectors();
    let mut cols = dv.clone();
    cols.extend(sharp.iter().cloned());
    if cols.is_empty() {
        return Ok((DMatrix::zeros(n, n), DMatrix::zeros(n, n)));
    }
    let basis = DMatrix::from_columns(&cols);
    let rk = linalg::rank(&basis);
    if rk < n || cols.len() != n {
        return Err(PrecoError::SplitFails { rank: rk, dim: n });
    }
    let inv = basis
        .clone()
        .try_inverse()
        .ok_or(PrecoError::SplitFails { rank: rk, dim: n })?;
    let mut sel = DMatrix::zeros(n, n);
    for i in 0..dv.len() {
        sel[(i, i)] = 1.0;
    }
    let proj = &basis * sel * inv;
    let q = DMatrix::identity(n, n) - &proj;
    Ok((proj, q))
}

/// Projectors built from the differentials of second-class functions:
/// `Q = C^{αβ} X_α ⊗ dX̄_β`, `P = Id − Q`, with `C_{αβ} = ⟨dX̄_α, X_β⟩`.
pub fn dirac_split_from_differentials(
    p: &PrecoPoint,
    dx: &[DVector<f64>],
) -> Result<(DMatrix<f64>, DMatrix<f64>), PrecoError> {
    let n = p.dim();
    let k = dx.len();
    let mut xs = Vec::with_capacity(k);
    for a in dx {
        xs.push(poisson_sharp(p, a)?);
    }
    let c = DMatrix::from_fn(k, k, |a, b| dx[a].dot(&xs[b]));
    let cinv = c.clone().try_inverse().ok_or(PrecoError::SplitFails {
        rank: linalg::rank(&c),
        dim: k,
    })?;
    let mut q = DMatrix::zeros(n, n);
    for a in 0..k {
        for b in 0..k {
            q += &xs[a] * dx[b].transpose() * cinv[(a, b)];
        }
    }
    let proj = DMatrix::identity(n, n) - &q;
    Ok((proj, q))
}

/// Jet-level `♭` matrix `ωᵀ + ηηᵀ` from flat row-major `ω`.
pub fn flat_matrix_jet(eta: &[Jet], omega: &[Jet]) -> JetMat {
    let n = eta.len();
    let mut m = JetMat::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            m.set(i, j, &omega[j * n + i] + &(&eta[i] * &eta[j]));
        }
    }
    m
}

/// Jet-level `#α` for a cosymplectic pair, given the Reeb vector.
pub fn sharp_jet(eta: &[Jet], omega: &[Jet], reeb: &[Jet], alpha: &[Jet]) -> Result<Vec<Jet>, PrecoError> {
    let ar = expr_core::field::dot(alpha, reeb);
    let rhs: Vec<Jet> = alpha.iter().zip(eta).map(|(a, e)| a - &(&ar * e)).collect();
    frame::solve_vec(&flat_matrix_jet(eta, omega), &rhs)
}

/// Jet-level Reeb vector `♭⁻¹(η)`.
pub fn reeb_jet(eta: &[Jet], omega: &[Jet]) -> Result<Vec<Jet>, PrecoError> {
    frame::solve_vec(&flat_matrix_jet(eta, omega), eta)
}
