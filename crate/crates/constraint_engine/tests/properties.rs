mod common;

use common::*;
use constraint_engine::*;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig { cases: 6, ..ProptestConfig::default() })]

    #[test]
    fn regular_quadratics_need_no_constraints(a in 0.5f64..2.0, b in 0.5f64..2.0, c in -1.0f64..1.0, d in -1.0f64..1.0) {
        let src = format!("0.5*{a}*v1^2 + 0.5*{b}*v2^2 + {c}*q1*v2 + {d}*q1*q2");
        let s = lagrangian(2, &src, &[0.0, 0.2, -0.1, 0.3, 0.4]);
        let p = problem(&s);
        let rep = run(&p, p.dim).unwrap();
        prop_assert_eq!(rep.termination.clone(), Termination::Final { level: 0 });
        for x in &rep.final_level().samples {
            let PointSolution::Solution { x: sol, nullspace } = solve_pointwise(&p, x) else { panic!("regular point") };
            prop_assert!(nullspace.is_empty());
            let got = rep.dynamics.x_part_at(x);
            prop_assert!(got.iter().zip(sol.iter()).all(|(u, v)| (u - v).abs() < 1e-9));
        }
    }

    #[test]
    fn final_levels_are_invariant(a in 0.5f64..2.0, c in 0.2f64..1.5, d in -1.0f64..1.0) {
        let src = format!("0.5*{a}*v1^2 + {c}*q2*v1 + {d}*q1*q2");
        let s = lagrangian(2, &src, &[0.0, 0.2, -0.1, 0.3, 0.4]);
        let p = problem(&s);
        let rep = run(&p, p.dim).unwrap();
        if rep.is_final() {
            let level = rep.final_level();
            prop_assert!(level.max_residual() <= 1e-8);
            prop_assert!(rep.tangency_residual <= 1e-7);
            let x = rep.final_field();
            for pt in &level.samples {
                prop_assert!((x.eval(pt)[0] - 1.0).abs() < 1e-12);
            }
        }
    }
}
