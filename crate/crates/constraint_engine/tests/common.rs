#![allow(dead_code)]

use constraint_engine::{time_connection, GeometricProblem, Settings};
use jet_geometry::{build_forms, total_time_derivative, LagrangianSystem};

pub fn lagrangian(n: usize, src: &str, seed: &[f64]) -> LagrangianSystem {
    LagrangianSystem::from_source(n, src, seed.to_vec()).unwrap()
}

pub fn problem(sys: &LagrangianSystem) -> GeometricProblem {
    let f = build_forms(sys);
    GeometricProblem::from_lagrangian(sys, &f, time_connection(sys.dim()), Settings::default()).unwrap()
}

pub fn sode_problem(sys: &LagrangianSystem) -> GeometricProblem {
    let f = build_forms(sys);
    GeometricProblem::from_lagrangian(sys, &f, total_time_derivative(sys.n), Settings::default()).unwrap()
}

pub const QV: &str = "0.5*v1^2 + q2*v1";
pub const QV_SEED: [f64; 5] = [0.0, 0.3, -0.2, 0.5, 0.4];
pub const AFFINE: &str = "q2*v1 - q1*v2 - (q1^2 + q2^2)/2";
pub const AFFINE_SEED: [f64; 5] = [0.0, 1.0, 2.0, 0.5, -0.5];
