#![allow(dead_code)]

use constraint_engine::Settings;
use hamiltonian_side::{analyze, BaseConnection, HamiltonianAnalysis, PrimaryMode};
use jet_geometry::LagrangianSystem;

pub const QV: &str = "0.5*v1^2 + q2*v1";
pub const QV_SEED: [f64; 5] = [0.0, 0.3, -0.2, 0.5, 0.4];
pub const AFFINE: &str = "q2*v1 - q1*v2 - (q1^2 + q2^2)/2";
pub const AFFINE_SEED: [f64; 5] = [0.0, 1.0, 2.0, 0.5, -0.5];
pub const TIME_DEP: &str = "0.5*v1^2 + t*q2*v1";
pub const TIME_DEP_SEED: [f64; 5] = [1.0, 0.3, -0.2, 0.5, 0.4];
pub const FREE: &str = "0.5*(v1^2 + v2^2)";
pub const FREE_SEED: [f64; 5] = [0.0, 0.1, 0.2, 0.3, 0.4];

pub fn system(src: &str, seed: &[f64]) -> LagrangianSystem {
    LagrangianSystem::from_source(2, src, seed.to_vec()).expect("valid Lagrangian")
}

pub fn run(src: &str, seed: &[f64]) -> HamiltonianAnalysis {
    run_with(src, seed, BaseConnection::time(2))
}

pub fn run_with(src: &str, seed: &[f64], conn: BaseConnection) -> HamiltonianAnalysis {
    analyze(
        &system(src, seed),
        PrimaryMode::AutoEliminate,
        conn,
        Settings::default(),
        8,
    )
    .expect("analysis succeeds")
}

pub fn shifted() -> BaseConnection {
    BaseConnection::parse(2, &["q1", "0"]).expect("valid connection")
}
