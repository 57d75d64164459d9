//! Scalar, vector, covector and two-form fields on a chart.
//!
//! Fields evaluate on hyper-dual points, so derivatives of any composition
//! (including derivatives of derivatives) are exact to rounding. A Lie
//! derivative at a point of depth `d` seeds the new generator `ε_d` along the
//! vector field and reads back the coefficient of `ε_d`.

use crate::expr::{DomainError, Expr};
use crate::jet::{lift, max_depth, reals, Jet};
use std::fmt;
use std::sync::Arc;

pub type JetScalarFn = Arc<dyn Fn(&[Jet]) -> Jet + Send + Sync>;
pub type JetVectorFn = Arc<dyn Fn(&[Jet]) -> Vec<Jet> + Send + Sync>;

/// `x + ε_d·dir` where `d` is the common depth of `x` and `dir`.
pub fn seed_along(x: &[Jet], dir: &[Jet]) -> (Vec<Jet>, usize) {
    let d = max_depth(x).max(max_depth(dir));
    let y = x.iter().zip(dir).map(|(a, b)| a.with_top(b, d)).collect();
    (y, d)
}

/// Differentiable real function of the chart coordinates.
#[derive(Clone)]
pub struct ScalarField {
    arity: usize,
    kind: Kind,
}

#[derive(Clone)]
enum Kind {
    Symbolic(Arc<Expr>),
    Composed(JetScalarFn),
}

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            Kind::Symbolic(e) => write!(f, "ScalarField::Symbolic({e:?})"),
            Kind::Composed(_) => write!(f, "ScalarField::Composed(arity {})", self.arity),
        }
    }
}

impl ScalarField {
    pub fn symbolic(expr: Expr, arity: usize) -> ScalarField {
        if let Some(s) = expr.max_slot() {
            assert!(s < arity, "expression references slot {s} beyond arity {arity}");
        }
        ScalarField {
            arity,
            kind: Kind::Symbolic(Arc::new(expr)),
        }
    }

    pub fn composed(arity: usize, f: impl Fn(&[Jet]) -> Jet + Send + Sync + 'static) -> ScalarField {
        ScalarField {
            arity,
            kind: Kind::Composed(Arc::new(f)),
        }
    }

    pub fn constant(arity: usize, c: f64) -> ScalarField {
        ScalarField::symbolic(Expr::c(c), arity)
    }

    pub fn coordinate(arity: usize, slot: usize) -> ScalarField {
        ScalarField::symbolic(Expr::Var(slot), arity)
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn expr(&self) -> Option<&Expr> {
        match &self.kind {
            Kind::Symbolic(e) => Some(e),
            Kind::Composed(_) => None,
        }
    }

    pub fn is_symbolic(&self) -> bool {
        matches!(self.kind, Kind::Symbolic(_))
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        match &self.kind {
            Kind::Symbolic(e) => e.eval(x),
            Kind::Composed(f) => f(&lift(x)).re(),
        }
    }

    pub fn eval_jet(&self, x: &[Jet]) -> Jet {
        match &self.kind {
            Kind::Symbolic(e) => e.eval(x),
            Kind::Composed(f) => f(x),
        }
    }

    pub fn eval_checked(&self, x: &[f64]) -> Result<f64, DomainError> {
        if x.len() != self.arity {
            return Err(DomainError::Arity {
                got: x.len(),
                expected: self.arity,
            });
        }
        match &self.kind {
            Kind::Symbolic(e) => e.eval_checked(x),
            Kind::Composed(f) => {
                let v = f(&lift(x)).re();
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(DomainError::NonFinite)
                }
            }
        }
    }

    /// Value and directional derivative along `seed`.
    pub fn eval_dual(&self, x: &[f64], seed: &[f64]) -> Result<(f64, f64), DomainError> {
        let v = self.eval_checked(x)?;
        if seed.len() != self.arity {
            return Err(DomainError::Arity {
                got: seed.len(),
                expected: self.arity,
            });
        }
        let pt: Vec<Jet> = x
            .iter()
            .zip(seed)
            .map(|(&a, &s)| Jet::constant(a).with_top(&Jet::constant(s), 0))
            .collect();
        let j = self.eval_jet(&pt);
        let d = j.coeff(1);
        if !d.is_finite() {
            return Err(DomainError::NonFinite);
        }
        Ok((v, d))
    }

    /// Directional derivative at a hyper-dual point.
    pub fn directional_jet(&self, x: &[Jet], dir: &[Jet]) -> Jet {
        let (y, d) = seed_along(x, dir);
        self.eval_jet(&y).top_part(d)
    }

    /// Partial derivatives at a hyper-dual point.
    pub fn gradient_jet(&self, x: &[Jet]) -> Vec<Jet> {
        let n = self.arity;
        (0..n)
            .map(|i| {
                let dir: Vec<Jet> = (0..n).map(|k| Jet::constant(if k == i { 1.0 } else { 0.0 })).collect();
                self.directional_jet(x, &dir)
            })
            .collect()
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        reals(&self.gradient_jet(&lift(x)))
    }

    /// `L(X)f` as a composed field.
    pub fn lie(&self, x_field: &VectorField) -> ScalarField {
        let f = self.clone();
        let v = x_field.clone();
        ScalarField::composed(self.arity, move |p| {
            let dir = v.eval_jet(p);
            f.directional_jet(p, &dir)
        })
    }

    pub fn differential(&self) -> CovectorField {
        let f = self.clone();
        CovectorField::new(self.arity, move |p| f.gradient_jet(p))
    }

    /// `Σ c_k f_k` as a composed field.
    pub fn combination(arity: usize, terms: Vec<(f64, ScalarField)>) -> ScalarField {
        ScalarField::composed(arity, move |p| {
            let mut acc = Jet::constant(0.0);
            for (c, f) in &terms {
                acc += &(f.eval_jet(p) * *c);
            }
            acc
        })
    }

    /// Pulls the field back along a map `y ↦ φ(y)` of the given source arity.
    pub fn pullback(&self, source_arity: usize, map: &VectorField) -> ScalarField {
        let f = self.clone();
        let m = map.clone();
        ScalarField::composed(source_arity, move |p| f.eval_jet(&m.eval_jet(p)))
    }
}

/// Field of tangent vectors, possibly between charts of different size.
#[derive(Clone)]
pub struct VectorField {
    arity: usize,
    dim: usize,
    f: JetVectorFn,
}

impl fmt::Debug for VectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "VectorField({} -> {})", self.arity, self.dim)
    }
}

impl VectorField {
    pub fn new(arity: usize, dim: usize, f: impl Fn(&[Jet]) -> Vec<Jet> + Send + Sync + 'static) -> VectorField {
        VectorField {
            arity,
            dim,
            f: Arc::new(f),
        }
    }

    pub fn from_components(components: Vec<ScalarField>) -> VectorField {
        let arity = components.first().map_or(0, ScalarField::arity);
        let dim = components.len();
        VectorField::new(arity, dim, move |p| components.iter().map(|c| c.eval_jet(p)).collect())
    }

    pub fn constant(values: Vec<f64>) -> VectorField {
        let n = values.len();
        VectorField::new(n, n, move |_| values.iter().map(|&v| Jet::constant(v)).collect())
    }

    pub fn zero(n: usize) -> VectorField {
        VectorField::constant(vec![0.0; n])
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        reals(&(self.f)(&lift(x)))
    }

    pub fn eval_jet(&self, x: &[Jet]) -> Vec<Jet> {
        (self.f)(x)
    }

    pub fn component(&self, i: usize) -> ScalarField {
        let v = self.clone();
        ScalarField::composed(self.arity, move |p| v.eval_jet(p)[i].clone())
    }

    /// Directional derivative of every component along `dir` at `x`.
    pub fn directional_jet(&self, x: &[Jet], dir: &[Jet]) -> Vec<Jet> {
        let (y, d) = seed_along(x, dir);
        self.eval_jet(&y).iter().map(|c| c.top_part(d)).collect()
    }

    /// `Σ c_k(x) X_k(x)` with field coefficients.
    pub fn affine(
        base: Option<VectorField>,
        terms: Vec<(ScalarField, VectorField)>,
        arity: usize,
        dim: usize,
    ) -> VectorField {
        VectorField::new(arity, dim, move |p| {
            let mut acc: Vec<Jet> = match &base {
                Some(b) => b.eval_jet(p),
                None => vec![Jet::constant(0.0); dim],
            };
            for (c, v) in &terms {
                let cv = c.eval_jet(p);
                for (a, w) in acc.iter_mut().zip(v.eval_jet(p)) {
                    *a += &(&cv * &w);
                }
            }
            acc
        })
    }

    pub fn add(&self, other: &VectorField) -> VectorField {
        let (a, b) = (self.clone(), other.clone());
        VectorField::new(self.arity, self.dim, move |p| {
            a.eval_jet(p).iter().zip(b.eval_jet(p)).map(|(x, y)| x + &y).collect()
        })
    }

    pub fn scale(&self, c: f64) -> VectorField {
        let a = self.clone();
        VectorField::new(self.arity, self.dim, move |p| {
            a.eval_jet(p).iter().map(|x| x * c).collect()
        })
    }
}

/// Jacobi–Lie bracket `[X, Z]^i = X(Z^i) − Z(X^i)`.
pub fn bracket(x: &VectorField, z: &VectorField) -> VectorField {
    let (a, b) = (x.clone(), z.clone());
    VectorField::new(x.arity(), x.dim(), move |p| {
        let xa = a.eval_jet(p);
        let zb = b.eval_jet(p);
        let dz = b.directional_jet(p, &xa);
        let dx = a.directional_jet(p, &zb);
        dz.iter().zip(dx).map(|(u, w)| u - &w).collect()
    })
}

/// Field of covectors.
#[derive(Clone)]
pub struct CovectorField {
    dim: usize,
    f: JetVectorFn,
}

impl fmt::Debug for CovectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CovectorField({})", self.dim)
    }
}

impl CovectorField {
    pub fn new(dim: usize, f: impl Fn(&[Jet]) -> Vec<Jet> + Send + Sync + 'static) -> CovectorField {
        CovectorField { dim, f: Arc::new(f) }
    }

    pub fn constant(values: Vec<f64>) -> CovectorField {
        let n = values.len();
        CovectorField::new(n, move |_| values.iter().map(|&v| Jet::constant(v)).collect())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        reals(&(self.f)(&lift(x)))
    }

    pub fn eval_jet(&self, x: &[Jet]) -> Vec<Jet> {
        (self.f)(x)
    }

    /// `⟨α, X⟩` as a scalar field.
    pub fn pair(&self, v: &VectorField) -> ScalarField {
        let (a, b) = (self.clone(), v.clone());
        ScalarField::composed(self.dim, move |p| dot(&a.eval_jet(p), &b.eval_jet(p)))
    }

    /// Exterior derivative `(dθ)_{ab} = ∂_a θ_b − ∂_b θ_a`.
    pub fn exterior_derivative(&self) -> TwoFormField {
        let th = self.clone();
        let n = self.dim;
        TwoFormField::new(n, move |p| {
            let grads: Vec<Vec<Jet>> = (0..n)
                .map(|a| {
                    let dir: Vec<Jet> = (0..n).map(|k| Jet::constant(if k == a { 1.0 } else { 0.0 })).collect();
                    let (y, d) = seed_along(p, &dir);
                    th.eval_jet(&y).iter().map(|c| c.top_part(d)).collect()
                })
                .collect();
            let mut m = vec![Jet::constant(0.0); n * n];
            for a in 0..n {
                for b in 0..n {
                    if a != b {
                        m[a * n + b] = &grads[a][b] - &grads[b][a];
                    }
                }
            }
            m
        })
    }
}

/// Field of antisymmetric matrices `Ω = Σ_{i<j} Ω_ij dx^i ∧ dx^j`, stored
/// row-major as full `n × n` matrices.
#[derive(Clone)]
pub struct TwoFormField {
    dim: usize,
    f: JetVectorFn,
}

impl fmt::Debug for TwoFormField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TwoFormField({})", self.dim)
    }
}

impl TwoFormField {
    pub fn new(dim: usize, f: impl Fn(&[Jet]) -> Vec<Jet> + Send + Sync + 'static) -> TwoFormField {
        TwoFormField { dim, f: Arc::new(f) }
    }

    pub fn zero(dim: usize) -> TwoFormField {
        TwoFormField::new(dim, move |_| vec![Jet::constant(0.0); dim * dim])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        reals(&(self.f)(&lift(x)))
    }

    pub fn eval_jet(&self, x: &[Jet]) -> Vec<Jet> {
        (self.f)(x)
    }

    /// `(i(X)Ω)_j = Σ_i X^i Ω_ij`.
    pub fn contract(&self, v: &VectorField) -> CovectorField {
        let (w, x) = (self.clone(), v.clone());
        let n = self.dim;
        CovectorField::new(n, move |p| contract_jet(&w.eval_jet(p), &x.eval_jet(p), n))
    }

    /// `Ω − α ∧ β`.
    pub fn minus_wedge(&self, alpha: &CovectorField, beta: &CovectorField) -> TwoFormField {
        let (w, a, b) = (self.clone(), alpha.clone(), beta.clone());
        let n = self.dim;
        TwoFormField::new(n, move |p| {
            let mut m = w.eval_jet(p);
            let av = a.eval_jet(p);
            let bv = b.eval_jet(p);
            for i in 0..n {
                for j in 0..n {
                    let wedge = &(&av[i] * &bv[j]) - &(&av[j] * &bv[i]);
                    m[i * n + j] -= &wedge;
                }
            }
            m
        })
    }

    /// Cyclic sum `∂_a Ω_bc + ∂_b Ω_ca + ∂_c Ω_ab` at a real point (max abs).
    pub fn closedness_residual(&self, x: &[f64]) -> f64 {
        let n = self.dim;
        let p = lift(x);
        let d: Vec<Vec<f64>> = (0..n)
            .map(|a| {
                let dir: Vec<Jet> = (0..n).map(|k| Jet::constant(if k == a { 1.0 } else { 0.0 })).collect();
                let (y, dd) = seed_along(&p, &dir);
                self.eval_jet(&y).iter().map(|c| c.top_part(dd).re()).collect()
            })
            .collect();
        let mut worst: f64 = 0.0;
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    let s = d[a][b * n + c] + d[b][c * n + a] + d[c][a * n + b];
                    worst = worst.max(s.abs());
                }
            }
        }
        worst
    }
}

pub fn dot(a: &[Jet], b: &[Jet]) -> Jet {
    let mut acc = Jet::constant(0.0);
    for (x, y) in a.iter().zip(b) {
        acc += &(x * y);
    }
    acc
}

/// `(i(v)Ω)_j = Σ_i v^i Ω_ij` on flat row-major storage.
pub fn contract_jet(omega: &[Jet], v: &[Jet], n: usize) -> Vec<Jet> {
    (0..n)
        .map(|j| {
            let mut acc = Jet::constant(0.0);
            for i in 0..n {
                acc += &(&v[i] * &omega[i * n + j]);
            }
            acc
        })
        .collect()
}
