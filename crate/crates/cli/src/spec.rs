//! System definition files.
//!
//! ```toml
//! [system]
//! name = "qv"                        # optional
//! n = 2
//! lagrangian = "0.5*v1^2 + q2*v1"    # over t, q1..qn, v1..vn
//!
//! [seed]
//! point = [0.0, 0.3, -0.2, 0.5, 0.4] # (t, q, v), length 2n + 1
//!
//! [connection]                       # optional, default d/dt
//! components = ["q1", "0"]           # Y^i in d/dt + Y^i d/dq^i, over t, q
//!
//! [hamiltonian]                      # optional, default automatic elimination
//! constraints = ["p2"]               # primary constraints over t, q, p
//! h0 = "0.5*(p1 - q2)^2"             # optional energy on the primary image
//!
//! [run]                              # optional overrides
//! samples = 20
//! rng_seed = 20240917
//! tol_rank = 1e-9
//! residual_tol = 1e-8
//! projection_tol = 1e-10
//! max_iter = 8
//! ```

use crate::CliError;
use constraint_engine::Settings;
use hamiltonian_side::{BaseConnection, PrimaryMode};
use jet_geometry::{GeometryError, LagrangianSystem};
use serde::Deserialize;
use std::path::Path;

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSpec {
    pub system: SystemSection,
    pub seed: SeedSection,
    pub connection: Option<ConnectionSection>,
    pub hamiltonian: Option<HamiltonianSection>,
    #[serde(default)]
    pub run: RunSection,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSection {
    pub name: Option<String>,
    pub n: usize,
    pub lagrangian: String,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeedSection {
    pub point: Vec<f64>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConnectionSection {
    pub components: Vec<String>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HamiltonianSection {
    pub constraints: Vec<String>,
    pub h0: Option<String>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub samples: Option<usize>,
    pub rng_seed: Option<u64>,
    pub tol_rank: Option<f64>,
    pub residual_tol: Option<f64>,
    pub projection_tol: Option<f64>,
    pub max_iter: Option<usize>,
}

/// A parsed and validated system ready for the pipelines. Parsing also
/// installs `tol_rank` as the process-wide rank cutoff.
#[derive(Clone, Debug)]
pub struct Loaded {
    pub spec: SystemSpec,
    pub system: LagrangianSystem,
    pub connection: BaseConnection,
    pub mode: PrimaryMode,
    pub settings: Settings,
    pub tol_rank: f64,
    pub max_iter: usize,
}

impl Loaded {
    pub fn name(&self) -> String {
        self.spec
            .system
            .name
            .clone()
            .unwrap_or_else(|| self.spec.system.lagrangian.clone())
    }
}

pub fn load(path: &Path) -> Result<Loaded, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    parse_spec(&text)
}

pub fn parse_spec(text: &str) -> Result<Loaded, CliError> {
    let spec: SystemSpec = toml::from_str(text).map_err(|e| CliError::Input(format!("system file: {e}")))?;
    let n = spec.system.n;
    if n == 0 {
        return Err(CliError::Input("system.n must be positive".into()));
    }
    if spec.seed.point.len() != 2 * n + 1 {
        return Err(CliError::Input(format!(
            "seed.point has {} values, expected 2n + 1 = {}",
            spec.seed.point.len(),
            2 * n + 1
        )));
    }
    let tol_rank = spec.run.tol_rank.unwrap_or(precosym::linalg::RANK_RTOL);
    if !(tol_rank > 0.0 && tol_rank < 1.0) {
        return Err(CliError::Input("run.tol_rank must lie in (0, 1)".into()));
    }
    precosym::linalg::set_rank_rtol(tol_rank);
    let system =
        LagrangianSystem::from_source(n, &spec.system.lagrangian, spec.seed.point.clone()).map_err(|e| match e {
            GeometryError::Parse(_) | GeometryError::SeedDimension { .. } => {
                CliError::Input(format!("lagrangian: {e}"))
            }
            other => CliError::Assumption(format!("lagrangian: {other}")),
        })?;
    let connection = match &spec.connection {
        None => BaseConnection::time(n),
        Some(c) => {
            if c.components.len() != n {
                return Err(CliError::Input(format!("connection.components needs {n} entries")));
            }
            BaseConnection::parse(n, &c.components).map_err(|e| CliError::Input(format!("connection: {e}")))?
        }
    };
    let mode = match &spec.hamiltonian {
        None => PrimaryMode::AutoEliminate,
        Some(h) => PrimaryMode::UserSupplied {
            constraints: h.constraints.clone(),
            h0: h.h0.clone(),
        },
    };
    let defaults = Settings::default();
    let r = &spec.run;
    let settings = Settings {
        samples: r.samples.unwrap_or(defaults.samples),
        rng_seed: r.rng_seed.unwrap_or(defaults.rng_seed),
        residual_tol: r.residual_tol.unwrap_or(defaults.residual_tol),
        projection_tol: r.projection_tol.unwrap_or(defaults.projection_tol),
        ..defaults
    };
    let max_iter = r.max_iter.unwrap_or(2 * n + 2);
    Ok(Loaded {
        spec,
        system,
        connection,
        mode,
        settings,
        tol_rank,
        max_iter,
    })
}
