mod common;

use common::*;
use constraint_engine::*;
use expr_core::{CovectorField, TwoFormField, VectorField};
use nalgebra::{DMatrix, DVector};
use precosym::{reeb, sampling};

#[test]
fn split_of_the_free_particle_by_hand() {
    let s = lagrangian(1, "0.5*v1^2", &[0.0, 1.0, 2.0]);
    let p = problem(&s);
    // Ω_L has (v, t) = v and (v, q) = −1, so i(∂t)Ω_L = −v dv.
    assert_eq!(p.gamma.eval(&[0.0, 1.0, 2.0]), vec![0.0, 0.0, -2.0]);
    let w = DMatrix::from_row_slice(3, 3, &p.omega.eval(&[0.0, 1.0, 2.0]));
    let expect = DMatrix::from_row_slice(3, 3, &[0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, -1.0, 0.0]);
    assert!((&w - expect).abs().max() < 1e-15);
    for x in sampling::gaussian_cloud(&[0.0, 1.0, 2.0], 10, 1.0, 1) {
        let w = DMatrix::from_row_slice(3, 3, &p.omega.eval(&x));
        assert!((w.row(0)).abs().max() < 1e-15);
    }
}

#[test]
fn forms_without_time_components_split_trivially() {
    let omega = TwoFormField::new(3, |_| {
        let mut m = vec![expr_core::Jet::constant(0.0); 9];
        m[5] = expr_core::Jet::constant(1.0);
        m[7] = expr_core::Jet::constant(-1.0);
        m
    });
    let eta = CovectorField::constant(vec![1.0, 0.0, 0.0]);
    let (g, w) = split_forms(&omega, &eta, &time_connection(3), &[vec![0.0; 3]]).unwrap();
    assert_eq!(g.eval(&[0.1, 0.2, 0.3]), vec![0.0; 3]);
    assert_eq!(w.eval(&[0.1, 0.2, 0.3]), omega.eval(&[0.1, 0.2, 0.3]));
    let bad = VectorField::constant(vec![2.0, 0.0, 0.0]);
    assert!(matches!(
        split_forms(&omega, &eta, &bad, &[vec![0.0; 3]]),
        Err(EngineError::ConnectionNotNormalized { .. })
    ));
}

#[test]
fn connection_choices_give_the_same_solution_sets_on_c1() {
    let s = lagrangian(2, QV, &QV_SEED);
    let (a, b) = (problem(&s), sode_problem(&s));
    for x in sampling::gaussian_cloud(&QV_SEED, 10, 1.0, 8) {
        let mut x = x;
        x[3] = 0.0;
        let (PointSolution::Solution { x: xa, nullspace: na }, PointSolution::Solution { x: xb, nullspace: nb }) =
            (solve_pointwise(&a, &x), solve_pointwise(&b, &x))
        else {
            panic!("solvable on C1");
        };
        let sa = precosym::Subspace::span(5, &na);
        let sb = precosym::Subspace::span(5, &nb);
        assert!(sa.same_as(&sb));
        assert!(sa.residual(&(&xa - &xb)) < 1e-8);
    }
}

/// Solvability of `B X = η − γ` judged by an independent pseudo-inverse.
fn brute_solvable(p: &GeometricProblem, x: &[f64]) -> bool {
    let b = p.flat_at(x);
    let rhs = DVector::from_vec(p.eta.eval(x)) - DVector::from_vec(p.gamma.eval(x));
    let pinv = b.clone().pseudo_inverse(1e-10).unwrap();
    (&b * (pinv * &rhs) - rhs).norm() < 1e-9
}

#[test]
fn pointwise_solutions() {
    let s = lagrangian(2, "0.5*v1^2 + 0.5*v2^2 + q1*q2", &[0.0; 5]);
    let p = problem(&s);
    let x = [0.1, 0.2, 0.3, 0.4, 0.5];
    let PointSolution::Solution { x: sol, nullspace } = solve_pointwise(&p, &x) else {
        panic!()
    };
    assert!(nullspace.is_empty());
    let r = reeb(
        &precosym::PrecoPoint::new(
            DVector::from_vec(s_eta(5)),
            DMatrix::from_row_slice(5, 5, &p.omega_big.eval(&x)),
        )
        .unwrap(),
    )
    .unwrap();
    assert!((sol - r).norm() < 1e-12);

    let s = lagrangian(2, QV, &QV_SEED);
    let p = problem(&s);
    for x in sampling::gaussian_cloud(&QV_SEED, 20, 1.0, 4) {
        assert!(matches!(solve_pointwise(&p, &x), PointSolution::NoSolution { .. }));
        assert!(!brute_solvable(&p, &x));
        let mut on = x.clone();
        on[3] = 0.0;
        let PointSolution::Solution { x: sol, .. } = solve_pointwise(&p, &on) else {
            panic!("v1 = 0 is solvable")
        };
        assert!(brute_solvable(&p, &on));
        let w = DMatrix::from_row_slice(5, 5, &p.omega.eval(&on));
        let g = DVector::from_vec(p.gamma.eval(&on));
        assert!((w.transpose() * &sol + g).norm() < 1e-9);
        assert!((sol[0] - 1.0).abs() < 1e-9);
    }

    let zero = lagrangian(2, "0", &[0.0; 5]);
    let p = problem(&zero);
    let PointSolution::Solution { nullspace, .. } = solve_pointwise(&p, &[0.0; 5]) else {
        panic!()
    };
    assert_eq!(nullspace.len(), 4);
}

fn s_eta(n: usize) -> Vec<f64> {
    let mut e = vec![0.0; n];
    e[0] = 1.0;
    e
}

#[test]
fn first_generation_recovers_the_degeneracy() {
    let s = lagrangian(2, QV, &QV_SEED);
    let p = problem(&s);
    let level0 = tower::chart_level(&p);
    let (_, piv) = initial_dynamics(&p, &level0.samples).unwrap();
    let (gen1, notes) = first_generation(&p, &piv);
    assert_eq!(gen1.len(), 1, "{notes:?}");
    let pts = sampling::gaussian_cloud(&QV_SEED, 30, 1.0, 5);
    let ratio = gen1[0].field.eval(&pts[0]) / pts[0][3];
    assert!(ratio.abs() > 1e-3);
    for x in &pts {
        assert!((gen1[0].field.eval(x) - ratio * x[3]).abs() < 1e-10);
    }

    let reg = lagrangian(1, "0.5*v1^2", &[0.0, 0.0, 1.0]);
    let p = problem(&reg);
    let level0 = tower::chart_level(&p);
    let (_, piv) = initial_dynamics(&p, &level0.samples).unwrap();
    assert!(first_generation(&p, &piv).0.is_empty());
}

#[test]
fn regular_system_terminates_at_level_zero_with_the_reeb_field() {
    let s = lagrangian(
        3,
        "0.5*v1^2 + 0.5*v2^2 + 0.5*v3^2",
        &[0.0, 0.1, 0.2, 0.3, 1.0, -1.0, 0.5],
    );
    let p = problem(&s);
    let rep = run(&p, p.dim).unwrap();
    assert_eq!(rep.termination, Termination::Final { level: 0 });
    assert_eq!(rep.constraint_count(), 0);
    assert_eq!(rep.dynamics.n_gauge, 0);
    let x = rep.final_field();
    for pt in &rep.final_level().samples {
        let v = x.eval(pt);
        let expect: Vec<f64> = [1.0]
            .iter()
            .copied()
            .chain(pt[4..7].iter().copied())
            .chain([0.0; 3])
            .collect();
        for (a, b) in v.iter().zip(&expect) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}

#[test]
fn degenerate_system_tower() {
    let s = lagrangian(2, QV, &QV_SEED);
    let p = problem(&s);
    let rep = run(&p, p.dim).unwrap();
    assert_eq!(rep.termination, Termination::Final { level: 1 });
    assert_eq!(rep.constraint_count(), 1);
    assert_eq!(rep.dynamics.n_gauge, 1);
    assert!(rep.tangency_residual <= 1e-7);
    for pt in &rep.final_level().samples {
        assert!(pt[3].abs() < 1e-9);
        let g = &rep.dynamics.gauge_at(pt)[0];
        assert!(g[..4].iter().all(|c| c.abs() < 1e-12) && g[4].abs() > 0.5);
        // q̇1 = v1 = 0 and v̇1 = −q̇2 on the final level
        let x = rep.dynamics.x_part_at(pt);
        assert!(x[1].abs() < 1e-9);
        assert!((x[3] + x[2]).abs() < 1e-9);
    }
}

#[test]
fn contradictory_system_is_empty() {
    let s = lagrangian(1, "q1", &[0.0, 0.0, 0.0]);
    let p = problem(&s);
    let rep = run(&p, p.dim).unwrap();
    assert_eq!(rep.termination, Termination::Empty { level: 1 });
}

#[test]
fn iteration_cap_is_reported() {
    let s = lagrangian(2, QV, &QV_SEED);
    let p = problem(&s);
    assert_eq!(run(&p, 0).unwrap().termination, Termination::MaxIterExceeded);
}

#[test]
fn affine_system_dynamical_tower() {
    let s = lagrangian(2, AFFINE, &AFFINE_SEED);
    let p = problem(&s);
    let rep = run(&p, p.dim).unwrap();
    assert_eq!(rep.termination, Termination::Final { level: 0 });
    assert_eq!(rep.dynamics.n_gauge, 2);
    for pt in &rep.final_level().samples {
        let (q1, q2) = (pt[1], pt[2]);
        let x = rep.dynamics.x_part_at(pt);
        // i(R)dγ = 0, i(R)dt = 1 on (t, q1, q2): R = ∂t + q2 ∂q1 − q1 ∂q2 scaled per dγ
        let dg = DMatrix::from_row_slice(3, 3, &[0.0, q1, q2, -q1, 0.0, -2.0, -q2, 2.0, 0.0]);
        let r = DVector::from_vec(vec![x[0], x[1], x[2]]);
        assert!((dg.transpose() * &r).norm() < 1e-10);
        assert!((x[0] - 1.0).abs() < 1e-12);
    }
}

#[test]
fn connection_independence_of_the_tower() {
    for (src, seed) in [(QV, QV_SEED), (AFFINE, AFFINE_SEED)] {
        let s = lagrangian(2, src, &seed);
        let a = run(&problem(&s), 5).unwrap();
        let b = run(&sode_problem(&s), 5).unwrap();
        assert_eq!(a.constraint_count(), b.constraint_count());
        let fa = a.final_level().fields();
        let fb = b.final_level().fields();
        assert!(tower::max_abs_on(&fa, &b.final_level().samples) <= 1e-6);
        assert!(tower::max_abs_on(&fb, &a.final_level().samples) <= 1e-6);
    }
}

#[test]
fn kernel_identities_on_the_first_level() {
    for (src, seed) in [(QV, QV_SEED), (AFFINE, AFFINE_SEED)] {
        let s = lagrangian(2, src, &seed);
        let p = problem(&s);
        let rep = run(&p, 5).unwrap();
        let level = rep.levels.get(1).unwrap_or(&rep.levels[0]);
        for x in &level.samples {
            assert!(checks::kernel_agreement(&p, x) <= 1e-8);
            assert!(checks::dgamma_on_kernel(&p, x) <= 1e-6);
        }
    }
}

#[test]
fn vertical_endomorphism_is_skew_for_the_sode_split() {
    for (n, src) in [(2, "0.5*exp(q1)*v1^2 + t*q2*v1*v2 + sin(q1)*v2^2"), (2, QV)] {
        let seed = vec![0.1; 2 * n + 1];
        let s = lagrangian(n, src, &seed);
        let p = sode_problem(&s);
        let mut rng = sampling::rng(3);
        for x in sampling::gaussian_cloud(&seed, 10, 1.0, 9) {
            let w = DMatrix::from_row_slice(5, 5, &p.omega.eval(&x));
            let u = DVector::from_vec(sampling::perturb(&mut rng, &[0.0; 5], 1.0));
            let v = DVector::from_vec(sampling::perturb(&mut rng, &[0.0; 5], 1.0));
            let j = |z: &DVector<f64>| {
                let mut out = DVector::zeros(5);
                for r in 0..n {
                    out[1 + n + r] = z[1 + r] - x[1 + n + r] * z[0];
                }
                out
            };
            let lhs = (j(&u).transpose() * &w * &v)[0] + (u.transpose() * &w * j(&v))[0];
            assert!(lhs.abs() < 1e-9);
        }
    }
}
