mod common;

use common::*;
use constraint_engine::{run as run_engine, time_connection, GeometricProblem, Settings, Termination};
use expr_core::ScalarField;
use hamiltonian_side::checks::{
    affine_closed_form_check, affine_reeb_direct, affine_reeb_display, time_dependent_check,
};
use hamiltonian_side::forms::pullback_residual;
use hamiltonian_side::{
    build_cosymplectic, build_primary_chart, hamilton_cartan_forms, verify_fl_related, BaseConnection,
    HamiltonianError, PrimaryMode,
};
use nalgebra::{DMatrix, DVector};
use precosym::sampling::gaussian_cloud;

fn coord(i: usize) -> ScalarField {
    ScalarField::coordinate(5, i)
}

#[test]
fn singular_primary_is_p2_with_projected_energy() {
    let a = run(QV, &QV_SEED);
    assert_eq!(a.chart.kept, vec![0]);
    assert_eq!(a.chart.eliminated, vec![1]);
    assert_eq!(a.chart.primaries.len(), 1);
    for x in gaussian_cloud(&a.chart.seed, 30, 1.0, 7) {
        assert!((a.chart.primaries[0].eval(&x) - x[4]).abs() <= 1e-12);
        let y = [x[0], x[1], x[2], x[3]];
        let expected = 0.5 * (x[3] - x[2]).powi(2);
        assert!((a.chart.energy.eval(&y) - expected).abs() <= 1e-12);
    }
}

#[test]
fn singular_tower_has_one_secondary_and_two_second_class() {
    let a = run(QV, &QV_SEED);
    assert_eq!(a.tower.report.termination, Termination::Final { level: 1 });
    assert_eq!(a.tower.primary_count(), 1);
    assert_eq!(a.tower.secondary_count(), 1);
    let sec = &a.tower.constraints[1].field;
    for x in &a.tower.samples {
        let g = sec.gradient(x);
        let ratio = g[3];
        assert!(ratio.abs() > 1e-6);
        let target = [0.0, 0.0, -1.0, 1.0, 0.0];
        for k in 0..5 {
            assert!((g[k] - ratio * target[k]).abs() <= 1e-9, "gradient {g:?}");
        }
        assert!(sec.eval(x).abs() <= 1e-9);
        assert!((x[3] - x[2]).abs() <= 1e-9);
    }
    let ctx = a.dirac.expect("final tower");
    assert_eq!(ctx.second_class.len(), 2);
    assert!(ctx.is_all_second_class());
}

#[test]
fn singular_dynamics_keeps_q1_fixed_and_matches_engine() {
    let a = run(QV, &QV_SEED);
    let ctx = a.dirac.as_ref().expect("final tower");
    let field = ctx.projected_evolution();
    for (x, y) in a.tower.samples.iter().zip(&a.tower.report.final_level().samples) {
        let v = field.eval(x);
        assert!(v[1].abs() <= 1e-9, "q1 moves: {v:?}");
        let pushed = a.tower.pushed_field_at(&a.chart, y);
        for k in 0..5 {
            assert!((v[k] - pushed[k]).abs() <= 1e-8, "{v:?} vs {pushed:?}");
        }
        for c in &a.tower.constraints {
            let d: f64 = c.field.gradient(x).iter().zip(&v).map(|(g, w)| g * w).sum();
            assert!(d.abs() <= 1e-7);
        }
    }
}

#[test]
fn affine_primaries_are_momenta_minus_one_form() {
    let a = run(AFFINE, &AFFINE_SEED);
    assert!(a.chart.kept.is_empty());
    assert_eq!(a.chart.primaries.len(), 2);
    for x in gaussian_cloud(&a.chart.seed, 40, 1.0, 11) {
        assert!((a.chart.primaries[0].eval(&x) - (x[3] - x[2])).abs() <= 1e-12);
        assert!((a.chart.primaries[1].eval(&x) - (x[4] + x[1])).abs() <= 1e-12);
    }
    assert_eq!(a.tower.report.termination, Termination::Final { level: 0 });
    let ctx = a.dirac.expect("final tower");
    assert_eq!(ctx.second_class.len(), 2);
    for x in &ctx.samples {
        let c = ctx.cbar_at(x);
        assert!((c[(0, 1)] + 2.0).abs() <= 1e-10 && (c[(1, 0)] - 2.0).abs() <= 1e-10);
    }
}

#[test]
fn affine_final_field_is_direct_reeb_and_display_is_half() {
    let a = run(AFFINE, &AFFINE_SEED);
    let sys = common::system(AFFINE, &AFFINE_SEED);
    let field = a.tower.final_field();
    let at = affine_reeb_direct(&sys, &[0.0, 1.0, 2.0]).expect("cosymplectic");
    assert!((at[0] - 1.0).abs() <= 1e-12 && (at[1] - 1.0).abs() <= 1e-12 && (at[2] + 0.5).abs() <= 1e-12);
    for y in gaussian_cloud(&[0.0, 1.0, 2.0], 100, 1.0, 5) {
        let direct = affine_reeb_direct(&sys, &y).expect("cosymplectic");
        let computed = field.eval(&y);
        for k in 0..3 {
            assert!((direct[k] - computed[k]).abs() <= 1e-10);
        }
        let display = affine_reeb_display(&sys, &y).expect("regular");
        for k in 1..3 {
            assert!((display[k] - 0.5 * direct[k]).abs() <= 1e-10);
        }
    }
}

#[test]
fn affine_closed_form_needs_dg_in_last_factor() {
    let a = run(AFFINE, &AFFINE_SEED);
    let sys = common::system(AFFINE, &AFFINE_SEED);
    let ctx = a.dirac.expect("final tower");
    let rep = affine_closed_form_check(&ctx, &sys, &ctx.samples);
    assert!(rep.gamma_bracket_residual <= 1e-10, "{rep:?}");
    assert!(rep.dg_transposed_mismatch <= 1e-9, "{rep:?}");
    assert!(rep.df_factor_mismatch > 1e-3, "{rep:?}");
    assert!(rep.dg_factor_mismatch > 1e-3, "{rep:?}");
}

#[test]
fn regular_system_has_no_constraints_and_canonical_bracket() {
    let a = run(FREE, &FREE_SEED);
    assert!(a.chart.primaries.is_empty());
    assert_eq!(a.tower.report.termination, Termination::Final { level: 0 });
    let ctx = a.dirac.expect("final tower");
    assert!(ctx.constraints.is_empty());
    let x = a.chart.seed.clone();
    assert!((ctx.dirac_bracket(&coord(1), &coord(3)).eval(&x) - 1.0).abs() <= 1e-12);
    assert!(ctx.dirac_bracket(&coord(1), &coord(2)).eval(&x).abs() <= 1e-12);
    assert!(ctx.dirac_bracket(&coord(0), &coord(3)).eval(&x).abs() <= 1e-12);
}

#[test]
fn shifted_connection_reeb_and_formula_flags() {
    let a = run_with(QV, &QV_SEED, shifted());
    let x = [0.2, 0.7, -0.4, 1.1, 0.3];
    let r = a.structure.reeb_tilde.eval(&x);
    let expected = [1.0, 0.7, 0.0, -1.1, 0.0];
    for k in 0..5 {
        assert!((r[k] - expected[k]).abs() <= 1e-12);
    }
    let pts = gaussian_cloud(&x, 10, 1.0, 3);
    let checks = a.structure.formula_checks(&pts);
    let flags: Vec<bool> = checks.iter().map(|c| c.consistent).collect();
    assert_eq!(
        flags,
        vec![true, true, true, true, false, false, true, false, true, false, true, true],
        "{checks:#?}"
    );
}

#[test]
fn hamilton_cartan_forms_pull_back_to_poincare_cartan() {
    for (src, seed) in [
        (QV, QV_SEED.to_vec()),
        (AFFINE, AFFINE_SEED.to_vec()),
        (FREE, FREE_SEED.to_vec()),
        ("exp(v1) + q2*v1", QV_SEED.to_vec()),
    ] {
        let sys = common::system(src, &seed);
        let chart = build_primary_chart(&sys, PrimaryMode::AutoEliminate).expect("almost regular");
        let forms = hamilton_cartan_forms(&chart);
        let lf = jet_geometry::build_forms(&sys);
        let pts = gaussian_cloud(&seed, 20, 0.5, 9);
        let r = pullback_residual(&chart, &forms, &lf, &pts);
        assert!(r <= 1e-9, "{src}: {r:e}");
    }
}

#[test]
fn nonlinear_elimination_projects_the_energy() {
    let sys = common::system("exp(v1) + q2*v1", &QV_SEED);
    let chart = build_primary_chart(&sys, PrimaryMode::AutoEliminate).expect("almost regular");
    for x in gaussian_cloud(&QV_SEED, 20, 0.5, 4) {
        let y = chart.fl0.eval(&x);
        let u = y[3] - y[2];
        assert!((chart.energy.eval(&y) - u * (u.ln() - 1.0)).abs() <= 1e-10);
    }
}

#[test]
fn energy_not_projectable_is_rejected() {
    let sys = common::system("sin(v1) + q2*v1", &[0.0, 0.1, 0.2, 0.5, 0.0]);
    match build_primary_chart(&sys, PrimaryMode::AutoEliminate) {
        Err(HamiltonianError::AutoEliminateUnsupported(_)) => {}
        other => panic!("expected rejection, got {other:?}"),
    }
}

#[test]
fn user_supplied_constraints_match_auto() {
    let sys = common::system(AFFINE, &AFFINE_SEED);
    let mode = PrimaryMode::UserSupplied {
        constraints: vec!["p1 - q2".into(), "p2 + q1".into()],
        h0: None,
    };
    let user = hamiltonian_side::analyze(&sys, mode, BaseConnection::time(2), Settings::default(), 8).expect("valid");
    let auto = run(AFFINE, &AFFINE_SEED);
    assert_eq!(user.tower.report.termination, auto.tower.report.termination);
    let (cu, ca) = (user.dirac.unwrap(), auto.dirac.unwrap());
    for x in &ca.samples {
        for (i, j) in [(1, 2), (1, 3), (2, 4), (3, 4)] {
            let u = cu.dirac_bracket(&coord(i), &coord(j)).eval(x);
            let v = ca.dirac_bracket(&coord(i), &coord(j)).eval(x);
            assert!((u - v).abs() <= 1e-10);
        }
    }
    let wrong = PrimaryMode::UserSupplied {
        constraints: vec!["p1".into(), "p2 + q1".into()],
        h0: None,
    };
    assert!(matches!(
        build_primary_chart(&sys, wrong),
        Err(HamiltonianError::ImageMismatch { .. })
    ));
    let with_h = PrimaryMode::UserSupplied {
        constraints: vec!["p1 - q2".into(), "p2 + q1".into()],
        h0: Some("(q1^2 + q2^2)/2".into()),
    };
    assert!(build_primary_chart(&sys, with_h).is_ok());
}

#[test]
fn towers_are_fl_related() {
    for (src, seed) in [
        (QV, QV_SEED.to_vec()),
        (AFFINE, AFFINE_SEED.to_vec()),
        (FREE, FREE_SEED.to_vec()),
    ] {
        let sys = common::system(src, &seed);
        let lf = jet_geometry::build_forms(&sys);
        let p = GeometricProblem::from_lagrangian(&sys, &lf, time_connection(5), Settings::default()).unwrap();
        let lag = run_engine(&p, 8).unwrap();
        let a = run(src, &seed);
        let rel = verify_fl_related(&a.chart, &lag, &a.tower, 1e-7);
        assert!(rel.ok, "{src}: {rel:?}");
    }
}

#[test]
fn time_dependent_matrix_inverse() {
    for (src, seed) in [(QV, QV_SEED.to_vec()), (TIME_DEP, TIME_DEP_SEED.to_vec())] {
        let a = run(src, &seed);
        let ctx = a.dirac.expect("final tower");
        assert_eq!(ctx.second_class.len(), 2);
        let rep = time_dependent_check(&ctx, &ctx.samples);
        assert!(rep.inverse_residual <= 1e-10, "{src}: {rep:?}");
        assert!(rep.skew_identity <= 1e-12);
    }
}

#[test]
fn projectors_match_pointwise_split() {
    for (src, seed) in [(QV, QV_SEED.to_vec()), (AFFINE, AFFINE_SEED.to_vec())] {
        let a = run(src, &seed);
        let ctx = a.dirac.expect("final tower");
        for x in &ctx.samples {
            let (p, q) = ctx.projectors_at(x);
            let om = DMatrix::from_row_slice(5, 5, &a.structure.omega_tilde.eval(x));
            let eta = DVector::from_vec(a.structure.eta.eval(x));
            let pt = precosym::PrecoPoint::new(eta, om).unwrap();
            let dx: Vec<DVector<f64>> = ctx
                .second_class_fields()
                .iter()
                .map(|f| DVector::from_vec(f.gradient(x)))
                .collect();
            let (p2, q2) = precosym::dirac_split_from_differentials(&pt, &dx).unwrap();
            assert!((&p - p2).amax() <= 1e-10 && (&q - q2).amax() <= 1e-10);
            assert!((&p * &p - &p).amax() <= 1e-9);
            assert!((&p + &q - DMatrix::identity(5, 5)).amax() <= 1e-12);
        }
    }
}

#[test]
fn observable_evolution_agrees_with_projected_field() {
    for (src, seed) in [(QV, QV_SEED.to_vec()), (AFFINE, AFFINE_SEED.to_vec())] {
        let a = run(src, &seed);
        let ctx = a.dirac.expect("final tower");
        let field = ctx.projected_evolution();
        let g = ScalarField::symbolic(
            expr_core::parse("q1*p2 + sin(q2) + t*p1^2", &expr_core::SymbolTable::momentum(2)).unwrap(),
            5,
        );
        let dot = ctx.evolution(&g);
        for x in &ctx.samples {
            let lhs = dot.eval(x);
            let rhs: f64 = g.gradient(x).iter().zip(field.eval(x)).map(|(a, b)| a * b).sum();
            assert!((lhs - rhs).abs() <= 1e-9);
        }
    }
}

#[test]
fn hamiltonian_extension_does_not_matter() {
    let a = run(QV, &QV_SEED);
    let ctx = a.dirac.as_ref().unwrap();
    let h = a.structure.h.clone();
    let xi = a.chart.primaries[0].clone();
    let h2 = ScalarField::composed(5, move |x| &h.eval_jet(x) + &(&(&x[1] * 0.7 + 0.3) * &xi.eval_jet(x)));
    let s2 = build_cosymplectic(a.structure.connection.clone(), h2);
    let ctx2 = ctx.with_structure(&s2).unwrap();
    let (f1, f2) = (ctx.projected_evolution(), ctx2.projected_evolution());
    for x in &ctx.samples {
        let (u, v) = (f1.eval(x), f2.eval(x));
        for k in 0..5 {
            assert!((u[k] - v[k]).abs() <= 1e-9);
        }
    }
}
