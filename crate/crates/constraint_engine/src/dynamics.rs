use crate::{EngineError, RankCheck};
use expr_core::jet::lift;
use expr_core::{Jet, ScalarField, VectorField};
use nalgebra::DMatrix;
use precosym::frame::{FrozenPivots, JetMat};
use precosym::linalg;
use std::fmt;
use std::sync::Arc;

/// Particular field and gauge frame evaluated together at a point.
pub type FrameFn = Arc<dyn Fn(&[Jet]) -> (Vec<Jet>, Vec<Vec<Jet>>) + Send + Sync>;

/// A family `X_part + Σ f_j G_j` of candidate dynamics.
#[derive(Clone)]
pub struct DynamicsSolution {
    pub dim: usize,
    pub n_gauge: usize,
    /// Number of gauge coefficients fixed so far by stability.
    pub determined: usize,
    frame: FrameFn,
}

impl fmt::Debug for DynamicsSolution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "DynamicsSolution(dim {}, gauge {}, determined {})",
            self.dim, self.n_gauge, self.determined
        )
    }
}

impl DynamicsSolution {
    pub fn new(
        dim: usize,
        n_gauge: usize,
        frame: impl Fn(&[Jet]) -> (Vec<Jet>, Vec<Vec<Jet>>) + Send + Sync + 'static,
    ) -> Self {
        DynamicsSolution {
            dim,
            n_gauge,
            determined: 0,
            frame: Arc::new(frame),
        }
    }

    pub fn frame_jet(&self, x: &[Jet]) -> (Vec<Jet>, Vec<Vec<Jet>>) {
        (self.frame)(x)
    }

    pub fn x_part(&self) -> VectorField {
        let f = self.frame.clone();
        VectorField::new(self.dim, self.dim, move |p| f(p).0)
    }

    pub fn gauge(&self) -> Vec<VectorField> {
        (0..self.n_gauge)
            .map(|j| {
                let f = self.frame.clone();
                VectorField::new(self.dim, self.dim, move |p| f(p).1.swap_remove(j))
            })
            .collect()
    }

    pub fn x_part_at(&self, x: &[f64]) -> Vec<f64> {
        self.frame_jet(&lift(x)).0.iter().map(Jet::re).collect()
    }

    pub fn gauge_at(&self, x: &[f64]) -> Vec<Vec<f64>> {
        self.frame_jet(&lift(x))
            .1
            .iter()
            .map(|g| g.iter().map(Jet::re).collect())
            .collect()
    }
}

/// A pointwise linear functional `X ↦ row(x, X)` on candidate vectors.
#[derive(Clone)]
pub struct Row {
    pub label: String,
    f: Arc<dyn Fn(&[Jet], &[Jet]) -> Jet + Send + Sync>,
}

impl fmt::Debug for Row {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Row({})", self.label)
    }
}

impl Row {
    pub fn new(label: impl Into<String>, f: impl Fn(&[Jet], &[Jet]) -> Jet + Send + Sync + 'static) -> Row {
        Row {
            label: label.into(),
            f: Arc::new(f),
        }
    }

    /// `X ↦ L(X)χ`.
    pub fn tangency(label: impl Into<String>, chi: &ScalarField) -> Row {
        let c = chi.clone();
        Row::new(label, move |p, v| c.directional_jet(p, v))
    }

    pub fn eval(&self, x: &[Jet], v: &[Jet]) -> Jet {
        (self.f)(x, v)
    }
}

/// Result of imposing rows on a dynamics family.
#[derive(Clone, Debug)]
pub struct Imposed {
    pub dynamics: DynamicsSolution,
    /// One field per row combination that the gauge cannot satisfy.
    pub candidates: Vec<ScalarField>,
    pub pivots: FrozenPivots,
    /// Rank of the stability matrix at the seed.
    pub rank: usize,
}

fn row_system(rows: &[Row], x: &[Jet], xp: &[Jet], gauge: &[Vec<Jet>]) -> (JetMat, Vec<Jet>) {
    let mut a = JetMat::zeros(rows.len(), gauge.len());
    let mut r = Vec::with_capacity(rows.len());
    for (k, row) in rows.iter().enumerate() {
        for (j, g) in gauge.iter().enumerate() {
            a.set(k, j, row.eval(x, g));
        }
        r.push(-row.eval(x, xp));
    }
    (a, r)
}

/// Stability step: solve `row_k(X_part + G f) = 0` for `f` with pivots
/// frozen at `seed`; left-null row combinations become candidate constraints.
pub fn impose_rows(
    dynamics: &DynamicsSolution,
    rows: Vec<Row>,
    seed: &[f64],
    samples: &[Vec<f64>],
) -> Result<Imposed, EngineError> {
    let dim = dynamics.dim;
    let stability_at = |x: &[f64]| -> DMatrix<f64> {
        let p = lift(x);
        let (xp, g) = dynamics.frame_jet(&p);
        row_system(&rows, &p, &xp, &g).0.real()
    };
    let a0 = stability_at(seed);
    let pivots = FrozenPivots::select(&a0);
    let rank = pivots.rank();
    for s in samples {
        let a = stability_at(s);
        let r = linalg::rank(&a);
        if r != rank {
            return Err(EngineError::RankDrift {
                check: RankCheck::Stability,
                expected: rank,
                found: r,
                point: s.clone(),
            });
        }
    }
    let rows = Arc::new(rows);
    let base = dynamics.clone();
    let piv = pivots.clone();
    let frame_rows = rows.clone();
    let n_gauge_new = dynamics.n_gauge - rank;
    let new_frame = move |p: &[Jet]| -> (Vec<Jet>, Vec<Vec<Jet>>) {
        let (xp, g) = base.frame_jet(p);
        let (a, r) = row_system(&frame_rows, p, &xp, &g);
        let nan = || vec![Jet::constant(f64::NAN); dim];
        let f = match piv.particular(&a, &r) {
            Ok(f) => f,
            Err(_) => return (nan(), vec![nan(); n_gauge_new]),
        };
        let mut x = xp;
        for (fj, gj) in f.iter().zip(&g) {
            for (xi, gi) in x.iter_mut().zip(gj) {
                *xi += &(fj * gi);
            }
        }
        let null = piv.null_basis(&a).unwrap_or_else(|_| vec![nan(); n_gauge_new]);
        let gauge = null
            .iter()
            .map(|c| {
                let mut v = vec![Jet::constant(0.0); dim];
                for (cj, gj) in c.iter().zip(&g) {
                    for (vi, gi) in v.iter_mut().zip(gj) {
                        *vi += &(cj * gi);
                    }
                }
                v
            })
            .collect();
        (x, gauge)
    };
    let mut next = DynamicsSolution::new(dim, n_gauge_new, new_frame);
    next.determined = dynamics.determined + rank;

    let n_left = rows.len() - rank;
    let candidates = (0..n_left)
        .map(|l| {
            let base = dynamics.clone();
            let rows = rows.clone();
            let piv = pivots.clone();
            ScalarField::composed(dim, move |p| {
                let (xp, g) = base.frame_jet(p);
                let (a, r) = row_system(&rows, p, &xp, &g);
                match piv.left_null_basis(&a) {
                    Ok(lam) => {
                        let mut acc = Jet::constant(0.0);
                        for (lk, rk) in lam[l].iter().zip(&r) {
                            acc -= &(lk * rk);
                        }
                        acc
                    }
                    Err(_) => Jet::constant(f64::NAN),
                }
            })
        })
        .collect();
    Ok(Imposed {
        dynamics: next,
        candidates,
        pivots,
        rank,
    })
}
