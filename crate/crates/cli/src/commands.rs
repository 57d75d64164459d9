use crate::report::*;
use crate::spec::Loaded;
use crate::CliError;
use constraint_engine::{run, time_connection, AlgorithmReport, GeometricProblem, Termination};
use expr_core::{parse, ScalarField, SymbolTable};
use hamiltonian_side::checks::{affine_closed_form_check, affine_reeb_direct, time_dependent_check};
use hamiltonian_side::{verify_fl_related, DiracContext, HamiltonianAnalysis, PrimaryMode};
use jet_geometry::{build_forms, KerFl, LagrangianForms};
use precosym::sampling::gaussian_cloud;
use rayon::prelude::*;
use serde::Serialize;
use sode_analysis::affine::affine_one_form;
use sode_analysis::{
    constraint_drift, el_residual, euler_lagrange_algorithm, rk4, sode_submanifold, EulerLagrangeTower,
};

const DISPLAY_TOL: f64 = 1e-9;
const TANGENCY_TOL: f64 = 1e-6;
const FL_TOL: f64 = 1e-7;
const FORMULA_POINTS: usize = 10;
const BRACKET_POINTS: usize = 10;

/// Outcome of `analyze`: the report and the process exit code it implies.
#[derive(Clone, Debug)]
pub struct Analysis {
    pub report: Report,
    pub exit_code: i32,
}

fn termination_text(t: &Termination) -> String {
    match t {
        Termination::Final { level } => format!("final at level {level}"),
        Termination::Empty { level } => format!("empty at level {level}"),
        Termination::ZeroDimensional { level } => format!("zero-dimensional at level {level}"),
        Termination::MaxIterExceeded => "iteration limit reached".into(),
    }
}

fn lagrangian_names(n: usize) -> Vec<String> {
    SymbolTable::lagrangian(n).names().to_vec()
}

fn momentum_names(n: usize) -> Vec<String> {
    SymbolTable::momentum(n).names().to_vec()
}

fn tower_info(rep: &AlgorithmReport, coordinates: Vec<String>, kinds: &dyn Fn(usize) -> Vec<String>) -> TowerInfo {
    let finished = rep.is_final();
    TowerInfo {
        termination: termination_text(&rep.termination),
        generations: rep.levels.len() - 1,
        gauge_dimension: rep.dynamics.n_gauge,
        coordinates,
        final_field_at_seed: finished.then(|| rep.final_field().eval(rep.final_level().seed())),
        tangency_residual: finished.then_some(rep.tangency_residual),
        levels: rep
            .levels
            .iter()
            .map(|l| LevelInfo {
                generation: l.index,
                constraint_descriptions: l
                    .new_constraints
                    .iter()
                    .map(|&i| l.constraints[i].label.clone())
                    .collect(),
                kinds: kinds(l.index),
                rank: l.rank,
                sample_residual: l.max_residual(),
                samples: l.samples.len(),
            })
            .collect(),
        notes: rep.notes.clone(),
    }
}

fn lagrangian_tower(loaded: &Loaded, forms: &LagrangianForms) -> Result<AlgorithmReport, CliError> {
    let sys = &loaded.system;
    let problem = GeometricProblem::from_lagrangian(sys, forms, time_connection(sys.dim()), loaded.settings.clone())
        .map_err(|e| CliError::Assumption(format!("Lagrangian problem: {e}")))?;
    run(&problem, loaded.max_iter).map_err(|e| CliError::Assumption(format!("Lagrangian tower: {e}")))
}

fn hamiltonian(loaded: &Loaded) -> Result<HamiltonianAnalysis, CliError> {
    hamiltonian_side::analyze(
        &loaded.system,
        loaded.mode.clone(),
        loaded.connection.clone(),
        loaded.settings.clone(),
        loaded.max_iter,
    )
    .map_err(|e| match e {
        hamiltonian_side::HamiltonianError::Parse(p) => CliError::Input(format!("hamiltonian section: {p}")),
        other => CliError::Assumption(format!("Hamiltonian analysis: {other}")),
    })
}

fn el_tower(loaded: &Loaded, forms: &LagrangianForms) -> Result<EulerLagrangeTower, CliError> {
    euler_lagrange_algorithm(&loaded.system, forms, loaded.settings.clone(), loaded.max_iter)
        .map_err(|e| CliError::Assumption(format!("Euler-Lagrange tower: {e}")))
}

fn base_report(loaded: &Loaded) -> Report {
    let sys = &loaded.system;
    let n = sys.n;
    let s = &loaded.settings;
    let v = lagrangian_names(n);
    let kerfl = KerFl::at_seed(sys);
    Report {
        system: SystemInfo {
            name: loaded.name(),
            n,
            lagrangian: loaded.spec.system.lagrangian.clone(),
            seed: sys.seed.clone(),
            connection: match &loaded.spec.connection {
                Some(c) => c.components.clone(),
                None => vec!["0".into(); n],
            },
            primary_mode: match &loaded.mode {
                PrimaryMode::AutoEliminate => "automatic elimination".into(),
                PrimaryMode::UserSupplied { .. } => "user supplied".into(),
            },
        },
        regularity: RegularityInfo {
            regular: sys.is_regular(),
            hessian_rank: sys.hessian_rank(),
            corank: sys.regularity.corank(),
        },
        provenance: Provenance {
            version: env!("CARGO_PKG_VERSION").into(),
            samples: s.samples,
            sigma: s.sigma,
            rng_seed: s.rng_seed,
            max_iter: loaded.max_iter,
            tol_rank: loaded.tol_rank,
            residual_tol: s.residual_tol,
            projection_tol: s.projection_tol,
            characterization_tol: s.characterization_tol,
            zero_drop_tol: s.zero_drop_tol,
            projectability_tol: sode_analysis::PROJECTABILITY_TOL,
            hessian_pivots: kerfl.pivot_velocities().iter().map(|&i| v[1 + n + i].clone()).collect(),
            ..Provenance::default()
        },
        status: Status {
            ok: true,
            failure: None,
        },
        ..Report::default()
    }
}

fn fail(mut report: Report, err: CliError) -> Analysis {
    let exit_code = err.exit_code();
    report.status = Status {
        ok: false,
        failure: Some(err.to_string()),
    };
    Analysis { report, exit_code }
}

/// Runs every pipeline on one system. Structural failures stop the run and
/// yield the report assembled so far.
pub fn analyze(loaded: &Loaded) -> Analysis {
    let sys = &loaded.system;
    let n = sys.n;
    let mut report = base_report(loaded);
    let forms = build_forms(sys);

    let lag = match lagrangian_tower(loaded, &forms) {
        Ok(l) => l,
        Err(e) => return fail(report, e),
    };
    report.towers.lagrangian = Some(tower_info(&lag, lagrangian_names(n), &|_| Vec::new()));
    for note in &lag.notes {
        report.warnings.push(format!("Lagrangian tower: {note}"));
    }

    let ham = match hamiltonian(loaded) {
        Ok(h) => h,
        Err(e) => return fail(report, e),
    };
    let p = momentum_names(n);
    report.provenance.kept_momenta = ham.chart.kept.iter().map(|&i| p[1 + n + i].clone()).collect();
    report.provenance.eliminated_momenta = ham.chart.eliminated.iter().map(|&i| p[1 + n + i].clone()).collect();
    let mut htower = tower_info(&ham.tower.report, p.clone(), &|_| Vec::new());
    if ham.tower.report.is_final() {
        let y = ham.tower.report.final_level().seed();
        htower.final_field_at_seed = Some(ham.tower.pushed_field_at(&ham.chart, y));
    }
    report.towers.hamiltonian = Some(HamiltonianTowerInfo {
        primaries: ham.chart.primary_labels.clone(),
        primary_count: ham.tower.primary_count(),
        secondary_count: ham.tower.secondary_count(),
        tower: htower,
    });
    for note in &ham.tower.report.notes {
        report.warnings.push(format!("Hamiltonian tower: {note}"));
    }

    let rel = verify_fl_related(&ham.chart, &lag, &ham.tower, FL_TOL);
    if !rel.ok {
        report
            .warnings
            .push("Lagrangian and Hamiltonian towers are not FL-related at the checked samples".into());
    }
    report.fl_relation = Some(FlRelation {
        ok: rel.ok,
        same_termination: rel.same_termination,
        levels: rel
            .levels
            .iter()
            .map(|l| FlLevel {
                index: l.index,
                lagrangian_codim: l.lagrangian_codim,
                hamiltonian_codim: l.hamiltonian_codim,
                pullback_residual: l.pullback_residual,
            })
            .collect(),
    });

    let points = gaussian_cloud(&ham.chart.seed, FORMULA_POINTS, 0.5, loaded.settings.rng_seed);
    for c in ham.structure.formula_checks(&points) {
        if !c.consistent {
            report.warnings.push(format!(
                "coordinate formula `{}` disagrees with the structure of the chosen connection (residual {:e})",
                c.name, c.residual
            ));
        }
        report.formula_checks.push(FormulaInfo {
            name: c.name,
            residual: c.residual,
            consistent: c.consistent,
        });
    }

    if let Some(ctx) = &ham.dirac {
        report.classification = Some(Classification {
            second_class: ctx.second_class_labels(),
            first_class: ctx.first_class.iter().map(|f| f.label.clone()).collect(),
            bracket_rank: ctx.bracket_rank,
            min_reciprocal_condition: ctx.min_rcond,
        });
        report.dirac_bracket_table = bracket_table(ctx, &p);
        bracket_checks(loaded, ctx, &mut report);
    }

    let el = match el_tower(loaded, &forms) {
        Ok(t) => t,
        Err(e) => return fail(report, e),
    };
    let kinds = |g: usize| {
        el.tags
            .iter()
            .filter(|t| t.constraint.generation == g)
            .map(|t| t.kind.as_str().to_string())
            .collect()
    };
    report.towers.euler_lagrange = Some(tower_info(&el.report, lagrangian_names(n), &kinds));
    for note in &el.report.notes {
        report.warnings.push(format!("Euler-Lagrange tower: {note}"));
    }
    if el.report.is_final() && el.gauge_dim() > 0 {
        report.warnings.push(format!(
            "Euler-Lagrange dynamics is not unique: {} gauge direction(s) remain on the final level",
            el.gauge_dim()
        ));
    }
    if let (Some(info), Some(ctx)) = (report.bracket_checks.affine.as_mut(), ham.dirac.as_ref()) {
        if ctx.first_class.is_empty() && el.report.is_final() {
            info.reeb_field_residual = affine_reeb_residual(loaded, &el);
        }
    }

    if lag.is_final() {
        match sode_submanifold(sys, &lag, &loaded.settings) {
            Ok(s) => {
                let (defect, normalization) = s.sode_defect();
                let info = SodeInfo {
                    free_velocities: s
                        .free_velocities
                        .iter()
                        .map(|&i| lagrangian_names(n)[1 + n + i].clone())
                        .collect(),
                    constraints: s.labels.clone(),
                    projectability_residual: s.projectability_residual,
                    sode_defect: defect,
                    time_normalization_defect: normalization,
                    tangency: s.tangency(&s.x_ls),
                    opposite_sign_tangency: s.tangency(&s.x_ls_minus),
                    kernel_pairing_residual: s.kernel_pairing_residual(),
                    samples: s.samples.len(),
                };
                if !s.free_velocities.is_empty() && info.opposite_sign_tangency > TANGENCY_TOL {
                    report.warnings.push(format!(
                        "X_f - X_f(xi_j) W_j is not tangent to S (residual {:e}); the tangent correction is X_f + X_f(xi_j) W_j",
                        info.opposite_sign_tangency
                    ));
                }
                report.sode = Some(info);
            }
            Err(e) => report.warnings.push(format!("SODE submanifold not built: {e}")),
        }
    }

    for (name, t) in [
        ("Lagrangian", &lag.termination),
        ("Euler-Lagrange", &el.report.termination),
    ] {
        if *t == Termination::MaxIterExceeded {
            let err = CliError::Assumption(format!(
                "{name} tower did not stabilize within {} iterations",
                loaded.max_iter
            ));
            return fail(report, err);
        }
    }
    if ham.tower.report.termination == Termination::MaxIterExceeded {
        let err = CliError::Assumption(format!(
            "Hamiltonian tower did not stabilize within {} iterations",
            loaded.max_iter
        ));
        return fail(report, err);
    }
    Analysis { report, exit_code: 0 }
}

fn bracket_table(ctx: &DiracContext, names: &[String]) -> Vec<BracketEntry> {
    let dim = names.len();
    let pairs: Vec<(usize, usize)> = (0..dim).flat_map(|i| (i + 1..dim).map(move |j| (i, j))).collect();
    pairs
        .par_iter()
        .map(|&(i, j)| {
            let (f, g) = (ScalarField::coordinate(dim, i), ScalarField::coordinate(dim, j));
            BracketEntry {
                f: names[i].clone(),
                g: names[j].clone(),
                bracket: ctx.bracket(&f, &g).eval(&ctx.seed),
                dirac: ctx.dirac_bracket(&f, &g).eval(&ctx.seed),
            }
        })
        .collect()
}

fn bracket_checks(loaded: &Loaded, ctx: &DiracContext, report: &mut Report) {
    let sys = &loaded.system;
    if ctx.first_class.is_empty() && !ctx.second_class.is_empty() {
        let t = time_dependent_check(ctx, &ctx.samples);
        if t.display_mismatch > DISPLAY_TOL {
            report.warnings.push(format!(
                "Dirac bracket display with the lower-index matrix C_ab = {{X_a, X_b}} + dX_a/dt dX_b/dt differs from the general bracket by {:e}; with the inverse C^ab the mismatch is {:e}",
                t.display_mismatch, t.upper_index_mismatch
            ));
        }
        report.bracket_checks.time_dependent = Some(TimeDependentInfo {
            inverse_residual: t.inverse_residual,
            skew_identity: t.skew_identity,
            lower_index_display_mismatch: t.display_mismatch,
            upper_index_display_mismatch: t.upper_index_mismatch,
        });
    }
    let probes = gaussian_cloud(&sys.seed, 30, 1.0, loaded.settings.rng_seed);
    let all_primary = ctx.constraints.len() == sys.n && ctx.constraints.iter().all(|c| c.primary);
    if affine_one_form(sys, &probes).is_some() && all_primary && ctx.first_class.is_empty() {
        let a = affine_closed_form_check(ctx, sys, &ctx.samples);
        if a.df_factor_mismatch > DISPLAY_TOL {
            report.warnings.push(format!(
                "closed-form Dirac bracket for velocity-affine Lagrangians: with dF/dp_l in the last factor the mismatch against the general bracket is {:e}; with dG/dp_l it is {:e}; with dG/dp_l and the transposed inverse gamma^ji it is {:e}",
                a.df_factor_mismatch, a.dg_factor_mismatch, a.dg_transposed_mismatch
            ));
        }
        report.bracket_checks.affine = Some(AffineInfo {
            gamma_bracket_residual: a.gamma_bracket_residual,
            last_factor_df_mismatch: a.df_factor_mismatch,
            last_factor_dg_mismatch: a.dg_factor_mismatch,
            last_factor_dg_transposed_mismatch: a.dg_transposed_mismatch,
            reeb_field_residual: f64::NAN,
        });
    }
}

fn affine_reeb_residual(loaded: &Loaded, el: &EulerLagrangeTower) -> f64 {
    let n = loaded.system.n;
    let field = el.final_field();
    let mut worst: f64 = 0.0;
    for x in &el.report.final_level().samples {
        let Some(direct) = affine_reeb_direct(&loaded.system, &x[..=n]) else {
            return f64::INFINITY;
        };
        let v = field.eval(x);
        for (a, b) in v[..=n].iter().zip(&direct) {
            worst = worst.max((a - b).abs());
        }
    }
    worst
}

#[derive(Clone, Debug, Serialize)]
pub struct BracketValue {
    pub point: Vec<f64>,
    pub bracket: f64,
    pub dirac: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct BracketReport {
    pub f: String,
    pub g: String,
    pub coordinates: Vec<String>,
    pub second_class: Vec<String>,
    pub first_class: Vec<String>,
    pub at_seed: BracketValue,
    pub on_final_level: Vec<BracketValue>,
}

/// `{F, G}` and `{F, G}_D` at the seed of the final Hamiltonian level and at
/// some of its samples. `F` and `G` are expressions over `(t, q, p)`.
pub fn bracket(loaded: &Loaded, f: &str, g: &str) -> Result<BracketReport, CliError> {
    let n = loaded.system.n;
    let table = SymbolTable::momentum(n);
    let dim = 2 * n + 1;
    let parse_field = |src: &str| {
        parse(src, &table)
            .map(|e| ScalarField::symbolic(e, dim))
            .map_err(|e| CliError::Input(format!("observable `{src}`: {e}")))
    };
    let (ff, gg) = (parse_field(f)?, parse_field(g)?);
    let ham = hamiltonian(loaded)?;
    let ctx = ham.dirac.as_ref().ok_or_else(|| {
        CliError::Assumption(format!(
            "Hamiltonian tower is {}, no Dirac bracket",
            termination_text(&ham.tower.report.termination)
        ))
    })?;
    let (b, d) = (ctx.bracket(&ff, &gg), ctx.dirac_bracket(&ff, &gg));
    let value = |x: &Vec<f64>| BracketValue {
        point: x.clone(),
        bracket: b.eval(x),
        dirac: d.eval(x),
    };
    Ok(BracketReport {
        f: f.into(),
        g: g.into(),
        coordinates: table.names().to_vec(),
        second_class: ctx.second_class_labels(),
        first_class: ctx.first_class.iter().map(|c| c.label.clone()).collect(),
        at_seed: value(&ctx.seed),
        on_final_level: ctx
            .samples
            .iter()
            .take(BRACKET_POINTS)
            .collect::<Vec<_>>()
            .par_iter()
            .map(|x| value(x))
            .collect(),
    })
}

/// CSV trajectory of the Euler–Lagrange field and a plain-text summary.
#[derive(Clone, Debug)]
pub struct Integration {
    pub csv: String,
    pub summary: String,
}

pub fn integrate(loaded: &Loaded, horizon: f64, step: f64) -> Result<Integration, CliError> {
    if !(horizon > 0.0 && step > 0.0 && step <= horizon) {
        return Err(CliError::Input("need 0 < step <= horizon".into()));
    }
    let sys = &loaded.system;
    let n = sys.n;
    let forms = build_forms(sys);
    let el = el_tower(loaded, &forms)?;
    if !el.report.is_final() {
        return Err(CliError::Assumption(format!(
            "Euler-Lagrange tower is {}, nothing to integrate",
            termination_text(&el.report.termination)
        )));
    }
    let level = el.report.final_level();
    let fields = level.fields();
    let steps = (horizon / step).round() as usize;
    let traj = rk4(&el.final_field(), level.seed(), step, steps);

    let names = lagrangian_names(n);
    let mut header: Vec<String> = names.clone();
    header.extend((0..fields.len()).map(|k| format!("drift_{k}")));
    let mut csv = header.join(",");
    csv.push('\n');
    for x in &traj.points {
        let mut row: Vec<String> = x.iter().map(|v| format!("{v:e}")).collect();
        row.extend(fields.iter().map(|c| format!("{:e}", c.eval(x))));
        csv.push_str(&row.join(","));
        csv.push('\n');
    }

    let drift = constraint_drift(&fields, &traj);
    let residual = el_residual(sys, &traj);
    let last = traj.last();
    let mut summary = format!(
        "integrated {} steps of size {step:e} from t = {}\nEuler-Lagrange residual {residual:e}\nconstraint drift {drift:e}\n",
        steps, traj.points[0][0]
    );
    for (k, name) in names.iter().enumerate() {
        summary.push_str(&format!("{name}: {:e} -> {:e}\n", traj.points[0][k], last[k]));
    }
    if el.gauge_dim() > 0 {
        summary.push_str(&format!("gauge directions set to zero: {}\n", el.gauge_dim()));
    }
    Ok(Integration { csv, summary })
}
