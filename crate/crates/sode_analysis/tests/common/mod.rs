#![allow(dead_code)]

use constraint_engine::{run, time_connection, AlgorithmReport, GeometricProblem, Settings};
use jet_geometry::{build_forms, LagrangianForms, LagrangianSystem};

pub const QV: &str = "0.5*v1^2 + q2*v1";
pub const QV_SEED: [f64; 5] = [0.0, 0.3, -0.2, 0.5, 0.4];
pub const AFFINE: &str = "q2*v1 - q1*v2 - (q1^2 + q2^2)/2";
pub const AFFINE_SEED: [f64; 5] = [0.0, 1.0, 2.0, 0.5, -0.5];
pub const FREE: &str = "0.5*(v1^2 + v2^2)";
pub const FREE_SEED: [f64; 5] = [0.0, 0.1, 0.2, 0.3, 0.4];
pub const FREE3: &str = "0.5*(v1^2 + v2^2 + v3^2)";
pub const FREE3_SEED: [f64; 7] = [0.0, 0.1, 0.2, 0.3, 0.4, -0.5, 0.6];
pub const OSCILLATOR: &str = "0.5*(v1^2 + v2^2) - 0.5*(q1^2 + 2*q2^2) + q1*v2";
pub const OSCILLATOR_SEED: [f64; 5] = [0.0, 0.5, -0.3, 0.2, 0.1];

pub fn system(src: &str, seed: &[f64]) -> (LagrangianSystem, LagrangianForms) {
    let n = (seed.len() - 1) / 2;
    let sys = LagrangianSystem::from_source(n, src, seed.to_vec()).expect("valid system");
    let forms = build_forms(&sys);
    (sys, forms)
}

/// Dynamical tower with the connection `∂/∂t`.
pub fn dynamical(sys: &LagrangianSystem, forms: &LagrangianForms) -> AlgorithmReport {
    let p = GeometricProblem::from_lagrangian(sys, forms, time_connection(sys.dim()), Settings::default())
        .expect("problem");
    run(&p, sys.dim()).expect("tower")
}

pub fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
