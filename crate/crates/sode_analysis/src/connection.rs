use crate::SodeError;
use constraint_engine::tower::max_abs_on;
use constraint_engine::{run, time_connection, AlgorithmReport, GeometricProblem, Settings};
use jet_geometry::{total_time_derivative, LagrangianForms, LagrangianSystem};
use nalgebra::{DMatrix, DVector};

/// Comparison of the dynamical towers built with `∂/∂t` and with `D`.
#[derive(Clone, Debug)]
pub struct CrossCheck {
    pub time: AlgorithmReport,
    pub sode: AlgorithmReport,
    /// Constraints of the `∂/∂t` tower on the samples of the `D` tower.
    pub time_on_sode: f64,
    pub sode_on_time: f64,
    /// Distance of `X_t − X_D` from the span of the gauge directions, on the `D` samples.
    pub field_gap: f64,
}

impl CrossCheck {
    pub fn residual(&self) -> f64 {
        self.time_on_sode.max(self.sode_on_time).max(self.field_gap)
    }

    pub fn same_shape(&self) -> bool {
        self.time.levels.len() == self.sode.levels.len()
            && self.time.termination == self.sode.termination
            && self.time.constraint_count() == self.sode.constraint_count()
    }
}

pub fn tower_cross_check(
    sys: &LagrangianSystem,
    forms: &LagrangianForms,
    settings: Settings,
    max_iter: usize,
) -> Result<CrossCheck, SodeError> {
    let dim = sys.dim();
    let pt = GeometricProblem::from_lagrangian(sys, forms, time_connection(dim), settings.clone())?;
    let pd = GeometricProblem::from_lagrangian(sys, forms, total_time_derivative(sys.n), settings)?;
    let time = run(&pt, max_iter)?;
    let sode = run(&pd, max_iter)?;
    let time_on_sode = max_abs_on(&time.final_level().fields(), &sode.final_level().samples);
    let sode_on_time = max_abs_on(&sode.final_level().fields(), &time.final_level().samples);
    let mut field_gap: f64 = 0.0;
    for x in &sode.final_level().samples {
        let a = DVector::from_vec(time.dynamics.x_part_at(x));
        let b = DVector::from_vec(sode.dynamics.x_part_at(x));
        let diff = a - b;
        let gauge = time.dynamics.gauge_at(x);
        let gap = if gauge.is_empty() {
            diff.amax()
        } else {
            let g = DMatrix::from_fn(dim, gauge.len(), |i, j| gauge[j][i]);
            let c = g
                .clone()
                .svd(true, true)
                .solve(&diff, 1e-12)
                .unwrap_or_else(|_| DVector::zeros(gauge.len()));
            (&g * c - &diff).amax()
        };
        field_gap = field_gap.max(if gap.is_nan() { f64::INFINITY } else { gap });
    }
    Ok(CrossCheck {
        time,
        sode,
        time_on_sode,
        sode_on_time,
        field_gap,
    })
}
