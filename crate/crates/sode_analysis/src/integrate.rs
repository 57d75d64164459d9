//! Fixed-step RK4 along a chart vector field and trajectory diagnostics.

use expr_core::{ScalarField, VectorField};
use jet_geometry::LagrangianSystem;

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub h: f64,
    pub points: Vec<Vec<f64>>,
}

impl Trajectory {
    pub fn last(&self) -> &[f64] {
        self.points.last().expect("at least the initial point")
    }

    /// Largest `|x_k[slot] − x_0[slot]|`.
    pub fn excursion(&self, slot: usize) -> f64 {
        let x0 = self.points[0][slot];
        self.points.iter().map(|p| (p[slot] - x0).abs()).fold(0.0, f64::max)
    }
}

fn axpy(x: &[f64], a: f64, k: &[f64]) -> Vec<f64> {
    x.iter().zip(k).map(|(xi, ki)| xi + a * ki).collect()
}

pub fn rk4(field: &VectorField, x0: &[f64], h: f64, steps: usize) -> Trajectory {
    let mut points = Vec::with_capacity(steps + 1);
    points.push(x0.to_vec());
    let mut x = x0.to_vec();
    for _ in 0..steps {
        let k1 = field.eval(&x);
        let k2 = field.eval(&axpy(&x, h / 2.0, &k1));
        let k3 = field.eval(&axpy(&x, h / 2.0, &k2));
        let k4 = field.eval(&axpy(&x, h, &k3));
        for i in 0..x.len() {
            x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        points.push(x.clone());
    }
    Trajectory { h, points }
}

/// Largest central-difference residual of `d/dt(∂L/∂v) − ∂L/∂q` and of
/// `dq/dt − v` at the interior trajectory points.
pub fn el_residual(sys: &LagrangianSystem, traj: &Trajectory) -> f64 {
    let n = sys.n;
    let h = traj.h;
    let pts = &traj.points;
    let momenta: Vec<Vec<f64>> = pts.iter().map(|x| sys.dv.iter().map(|e| e.eval(x)).collect()).collect();
    let mut worst: f64 = 0.0;
    for k in 1..pts.len().saturating_sub(1) {
        for r in 0..n {
            let pdot = (momenta[k + 1][r] - momenta[k - 1][r]) / (2.0 * h);
            worst = worst.max((pdot - sys.dq[r].eval(&pts[k])).abs());
            let qdot = (pts[k + 1][1 + r] - pts[k - 1][1 + r]) / (2.0 * h);
            worst = worst.max((qdot - pts[k][1 + n + r]).abs());
        }
    }
    worst
}

/// Largest `|c(x_k)|` over the trajectory.
pub fn constraint_drift(fields: &[ScalarField], traj: &Trajectory) -> f64 {
    constraint_engine::tower::max_abs_on(fields, &traj.points)
}
