//! Serializable analysis report. Field order is the output order.

use serde::Serialize;
use std::fmt::Write as _;

#[derive(Clone, Debug, Default, Serialize)]
pub struct Report {
    pub system: SystemInfo,
    pub regularity: RegularityInfo,
    pub towers: Towers,
    pub fl_relation: Option<FlRelation>,
    pub sode: Option<SodeInfo>,
    pub classification: Option<Classification>,
    pub dirac_bracket_table: Vec<BracketEntry>,
    pub formula_checks: Vec<FormulaInfo>,
    pub bracket_checks: BracketChecks,
    pub warnings: Vec<String>,
    pub status: Status,
    pub provenance: Provenance,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct SystemInfo {
    pub name: String,
    pub n: usize,
    pub lagrangian: String,
    pub seed: Vec<f64>,
    pub connection: Vec<String>,
    pub primary_mode: String,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct RegularityInfo {
    pub regular: bool,
    pub hessian_rank: usize,
    pub corank: usize,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct Towers {
    pub lagrangian: Option<TowerInfo>,
    pub hamiltonian: Option<HamiltonianTowerInfo>,
    pub euler_lagrange: Option<TowerInfo>,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct TowerInfo {
    pub termination: String,
    pub generations: usize,
    pub gauge_dimension: usize,
    pub coordinates: Vec<String>,
    pub final_field_at_seed: Option<Vec<f64>>,
    pub tangency_residual: Option<f64>,
    pub levels: Vec<LevelInfo>,
    pub notes: Vec<String>,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct LevelInfo {
    pub generation: usize,
    pub constraint_descriptions: Vec<String>,
    /// `sode` or `dynamical` per constraint; only filled for the Euler–Lagrange tower.
    pub kinds: Vec<String>,
    pub rank: usize,
    pub sample_residual: f64,
    pub samples: usize,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct HamiltonianTowerInfo {
    pub primaries: Vec<String>,
    pub primary_count: usize,
    pub secondary_count: usize,
    pub tower: TowerInfo,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct FlRelation {
    pub ok: bool,
    pub same_termination: bool,
    pub levels: Vec<FlLevel>,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct FlLevel {
    pub index: usize,
    pub lagrangian_codim: usize,
    pub hamiltonian_codim: usize,
    pub pullback_residual: f64,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct SodeInfo {
    pub free_velocities: Vec<String>,
    pub constraints: Vec<String>,
    pub projectability_residual: f64,
    pub sode_defect: f64,
    pub time_normalization_defect: f64,
    pub tangency: f64,
    pub opposite_sign_tangency: f64,
    pub kernel_pairing_residual: f64,
    pub samples: usize,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct Classification {
    pub second_class: Vec<String>,
    pub first_class: Vec<String>,
    pub bracket_rank: usize,
    pub min_reciprocal_condition: f64,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct BracketEntry {
    pub f: String,
    pub g: String,
    pub bracket: f64,
    pub dirac: f64,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct FormulaInfo {
    pub name: String,
    pub residual: f64,
    pub consistent: bool,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct BracketChecks {
    pub time_dependent: Option<TimeDependentInfo>,
    pub affine: Option<AffineInfo>,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct TimeDependentInfo {
    pub inverse_residual: f64,
    pub skew_identity: f64,
    pub lower_index_display_mismatch: f64,
    pub upper_index_display_mismatch: f64,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct AffineInfo {
    pub gamma_bracket_residual: f64,
    pub last_factor_df_mismatch: f64,
    pub last_factor_dg_mismatch: f64,
    pub last_factor_dg_transposed_mismatch: f64,
    pub reeb_field_residual: f64,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct Status {
    pub ok: bool,
    pub failure: Option<String>,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct Provenance {
    pub version: String,
    pub samples: usize,
    pub sigma: f64,
    pub rng_seed: u64,
    pub max_iter: usize,
    pub tol_rank: f64,
    pub residual_tol: f64,
    pub projection_tol: f64,
    pub characterization_tol: f64,
    pub zero_drop_tol: f64,
    pub projectability_tol: f64,
    pub hessian_pivots: Vec<String>,
    pub kept_momenta: Vec<String>,
    pub eliminated_momenta: Vec<String>,
}

impl Report {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// Short plain-text digest of the report.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let s = &self.system;
        let _ = writeln!(out, "system {} (n = {}): L = {}", s.name, s.n, s.lagrangian);
        let r = &self.regularity;
        let _ = writeln!(
            out,
            "  {} (Hessian rank {}, corank {})",
            if r.regular { "regular" } else { "singular" },
            r.hessian_rank,
            r.corank
        );
        let towers = [
            ("lagrangian", self.towers.lagrangian.as_ref()),
            ("hamiltonian", self.towers.hamiltonian.as_ref().map(|h| &h.tower)),
            ("euler-lagrange", self.towers.euler_lagrange.as_ref()),
        ];
        for (name, tower) in towers {
            if let Some(t) = tower {
                let _ = writeln!(
                    out,
                    "  {name} tower: {} after {} generation(s), gauge {}",
                    t.termination, t.generations, t.gauge_dimension
                );
                for l in t.levels.iter().skip(1) {
                    let kinds = if l.kinds.is_empty() {
                        String::new()
                    } else {
                        format!(" [{}]", l.kinds.join(", "))
                    };
                    let _ = writeln!(
                        out,
                        "    level {}: {}{kinds}",
                        l.generation,
                        l.constraint_descriptions.join("; ")
                    );
                }
            }
        }
        if let Some(h) = &self.towers.hamiltonian {
            let _ = writeln!(
                out,
                "  primaries: {}",
                if h.primaries.is_empty() {
                    "none".into()
                } else {
                    h.primaries.join(", ")
                }
            );
        }
        if let Some(c) = &self.classification {
            let _ = writeln!(out, "  second class: {}", c.second_class.len());
            let _ = writeln!(out, "  first class: {}", c.first_class.len());
        }
        if let Some(f) = &self.fl_relation {
            let _ = writeln!(out, "  towers FL-related: {}", f.ok);
        }
        for w in &self.warnings {
            let _ = writeln!(out, "  warning: {w}");
        }
        match &self.status.failure {
            None => {
                let _ = writeln!(out, "  status: ok");
            }
            Some(f) => {
                let _ = writeln!(out, "  status: failed ({f})");
            }
        }
        out
    }
}
