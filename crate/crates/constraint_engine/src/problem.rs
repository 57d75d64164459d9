use crate::{EngineError, Settings};
use expr_core::jet::lift;
use expr_core::{CovectorField, Jet, TwoFormField, VectorField};
use nalgebra::{DMatrix, DVector};
use precosym::frame::JetMat;
use precosym::{linalg, sampling, PrecoPoint};

/// `(F, Ω, η, 𝒴)` with the induced splitting `Ω = η ∧ γ + ω`.
#[derive(Clone, Debug)]
pub struct GeometricProblem {
    pub dim: usize,
    pub omega_big: TwoFormField,
    pub eta: CovectorField,
    pub y: VectorField,
    pub gamma: CovectorField,
    pub omega: TwoFormField,
    pub seed: Vec<f64>,
    pub names: Vec<String>,
    pub settings: Settings,
}

/// `γ = i(𝒴)Ω` and `ω = Ω − η ∧ γ`, after checking `⟨η, 𝒴⟩ = 1` at `points`.
pub fn split_forms(
    omega: &TwoFormField,
    eta: &CovectorField,
    y: &VectorField,
    points: &[Vec<f64>],
) -> Result<(CovectorField, TwoFormField), EngineError> {
    let mut worst: f64 = 0.0;
    for p in points {
        let e = eta.eval(p);
        let v = y.eval(p);
        let pair: f64 = e.iter().zip(&v).map(|(a, b)| a * b).sum();
        worst = worst.max((pair - 1.0).abs());
    }
    if !(worst <= 1e-12) {
        return Err(EngineError::ConnectionNotNormalized { residual: worst });
    }
    let gamma = omega.contract(y);
    let small = omega.minus_wedge(eta, &gamma);
    Ok((gamma, small))
}

impl GeometricProblem {
    pub fn new(
        omega_big: TwoFormField,
        eta: CovectorField,
        y: VectorField,
        seed: Vec<f64>,
        names: Vec<String>,
        settings: Settings,
    ) -> Result<GeometricProblem, EngineError> {
        let dim = omega_big.dim();
        if seed.len() != dim || eta.dim() != dim || y.dim() != dim || names.len() != dim {
            return Err(EngineError::Dimension {
                expected: dim,
                got: seed.len(),
            });
        }
        let points = sampling::gaussian_cloud(&seed, settings.samples, settings.sigma, settings.rng_seed);
        let mut all = vec![seed.clone()];
        all.extend(points);
        let (gamma, omega) = split_forms(&omega_big, &eta, &y, &all)?;
        let mut worst: f64 = 0.0;
        for p in &all {
            worst = worst.max(omega_big.closedness_residual(p));
            worst = worst.max(
                eta.exterior_derivative()
                    .eval(p)
                    .iter()
                    .fold(0.0, |a, v| a.max(v.abs())),
            );
        }
        if !(worst <= 1e-7) {
            return Err(EngineError::NotClosed { residual: worst });
        }
        Ok(GeometricProblem {
            dim,
            omega_big,
            eta,
            y,
            gamma,
            omega,
            seed,
            names,
            settings,
        })
    }

    /// Same forms with another connection.
    pub fn with_connection(&self, y: VectorField) -> Result<GeometricProblem, EngineError> {
        GeometricProblem::new(
            self.omega_big.clone(),
            self.eta.clone(),
            y,
            self.seed.clone(),
            self.names.clone(),
            self.settings.clone(),
        )
    }

    pub fn point(&self, x: &[f64]) -> PrecoPoint {
        PrecoPoint::new(
            DVector::from_vec(self.eta.eval(x)),
            DMatrix::from_row_slice(self.dim, self.dim, &self.omega.eval(x)),
        )
        .expect("square data")
    }

    /// `B = ωᵀ + ηηᵀ` at a hyper-dual point, so that `B X = ♭X`.
    pub fn flat_jet(&self, x: &[Jet]) -> JetMat {
        precosym::flat_matrix_jet(&self.eta.eval_jet(x), &self.omega.eval_jet(x))
    }

    /// `η − γ` at a hyper-dual point.
    pub fn rhs_jet(&self, x: &[Jet]) -> Vec<Jet> {
        let e = self.eta.eval_jet(x);
        let g = self.gamma.eval_jet(x);
        e.iter().zip(&g).map(|(a, b)| a - b).collect()
    }

    pub fn flat_at(&self, x: &[f64]) -> DMatrix<f64> {
        self.flat_jet(&lift(x)).real()
    }
}

/// Outcome of the pointwise dynamical equations `i(X)ω = −γ`, `i(X)η = 1`.
#[derive(Clone, Debug, PartialEq)]
pub enum PointSolution {
    NoSolution {
        residual: f64,
    },
    Solution {
        x: DVector<f64>,
        nullspace: Vec<DVector<f64>>,
    },
}

pub fn solve_pointwise(p: &GeometricProblem, x: &[f64]) -> PointSolution {
    let b = p.flat_at(x);
    let rhs = DVector::from_vec(p.rhs_jet(&lift(x)).iter().map(Jet::re).collect());
    let sol = linalg::lstsq(&b, &rhs);
    let residual = (&b * &sol - &rhs).norm();
    if residual > 1e-9 * rhs.norm().max(1.0) {
        return PointSolution::NoSolution { residual };
    }
    let null = linalg::null_space(&b);
    PointSolution::Solution {
        x: sol,
        nullspace: null.column_iter().map(|c| c.into_owned()).collect(),
    }
}

impl GeometricProblem {
    /// `(J¹E, Ω_L, dt)` with connection `y` and the system seed.
    pub fn from_lagrangian(
        sys: &jet_geometry::LagrangianSystem,
        forms: &jet_geometry::LagrangianForms,
        y: VectorField,
        settings: Settings,
    ) -> Result<GeometricProblem, EngineError> {
        GeometricProblem::new(
            forms.omega.clone(),
            forms.eta.clone(),
            y,
            sys.seed.clone(),
            sys.table.names().to_vec(),
            settings,
        )
    }
}

/// `∂/∂t` on a chart of the given dimension.
pub fn time_connection(dim: usize) -> VectorField {
    let mut v = vec![0.0; dim];
    v[0] = 1.0;
    VectorField::constant(v)
}
