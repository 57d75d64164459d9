use expr_core::diff::{add, mul};
use expr_core::{diff, parse, Expr, Func, Rational, ScalarField, SymbolTable};
use proptest::prelude::*;

const ARITY: usize = 5;

fn leaf() -> impl Strategy<Value = Expr> {
    prop_oneof![
        (0usize..ARITY).prop_map(Expr::Var),
        (0u32..400).prop_map(|k| Expr::Const(k as f64 / 8.0)),
    ]
}

/// Trees whose value and derivatives stay finite on the whole chart.
fn smooth_tree() -> impl Strategy<Value = Expr> {
    leaf().prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(|a| Expr::Neg(Box::new(a))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Add(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Sub(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Mul(Box::new(a), Box::new(b))),
            (inner.clone(), 1i64..4).prop_map(|(a, k)| Expr::Pow(Box::new(a), Rational::integer(k))),
            inner.clone().prop_map(|a| Expr::Func(Func::Sin, Box::new(a))),
            inner.clone().prop_map(|a| Expr::Func(Func::Cos, Box::new(a))),
            inner
                .clone()
                .prop_map(|a| Expr::Func(Func::Exp, Box::new(Expr::Func(Func::Sin, Box::new(a))))),
            inner.clone().prop_map(|a| {
                let pos = Expr::Add(
                    Box::new(Expr::Const(1.0)),
                    Box::new(Expr::Pow(Box::new(a), Rational::integer(2))),
                );
                Expr::Func(Func::Log, Box::new(pos))
            }),
            inner.clone().prop_map(|a| {
                let pos = Expr::Add(Box::new(Expr::Const(2.0)), Box::new(Expr::Func(Func::Cos, Box::new(a))));
                Expr::Div(Box::new(Expr::Const(1.0)), Box::new(pos))
            }),
        ]
    })
}

/// Arbitrary well-formed trees, including every node kind and fractional exponents.
fn any_tree() -> impl Strategy<Value = Expr> {
    let funcs = prop_oneof![
        Just(Func::Sin),
        Just(Func::Cos),
        Just(Func::Exp),
        Just(Func::Log),
        Just(Func::Sqrt)
    ];
    leaf().prop_recursive(5, 40, 2, move |inner| {
        prop_oneof![
            inner.clone().prop_map(|a| Expr::Neg(Box::new(a))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Add(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Sub(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Mul(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Div(Box::new(a), Box::new(b))),
            (inner.clone(), -7i64..8, 1i64..6).prop_map(|(a, n, d)| Expr::Pow(Box::new(a), Rational::new(n, d))),
            (funcs.clone(), inner.clone()).prop_map(|(f, a)| Expr::Func(f, Box::new(a))),
        ]
    })
}

fn point() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.5f64..1.5, ARITY)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn print_then_parse_is_identity(e in any_tree()) {
        let t = SymbolTable::lagrangian(2);
        let text = e.to_text(&t);
        let back = parse(&text, &t).unwrap();
        prop_assert_eq!(back, e, "{}", text);
    }

    #[test]
    fn dual_gradient_matches_central_differences(e in smooth_tree(), x in point()) {
        let f = ScalarField::symbolic(e, ARITY);
        let g = f.gradient(&x);
        let h = 1e-6;
        for i in 0..ARITY {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[i] += h;
            xm[i] -= h;
            let fd = (f.eval(&xp) - f.eval(&xm)) / (2.0 * h);
            let err = (g[i] - fd).abs();
            prop_assert!(err <= 1e-6 || err <= 1e-6 * fd.abs(), "slot {i}: dual {} fd {fd}", g[i]);
        }
    }

    #[test]
    fn symbolic_and_dual_derivatives_agree(e in smooth_tree(), x in point()) {
        let f = ScalarField::symbolic(e.clone(), ARITY);
        let g = f.gradient(&x);
        for (i, gi) in g.iter().enumerate() {
            let s = diff(&e, i).eval::<f64>(&x);
            prop_assert!((s - gi).abs() <= 1e-10 * s.abs().max(1.0));
        }
    }

    #[test]
    fn diff_is_linear(f in smooth_tree(), g in smooth_tree(), a in -3.0f64..3.0, b in -3.0f64..3.0,
                      slot in 0usize..ARITY, pts in prop::collection::vec(point(), 20)) {
        let lhs = diff(&add(mul(Expr::c(a), f.clone()), mul(Expr::c(b), g.clone())), slot);
        let rhs = add(mul(Expr::c(a), diff(&f, slot)), mul(Expr::c(b), diff(&g, slot)));
        for x in &pts {
            let (l, r) = (lhs.eval::<f64>(x), rhs.eval::<f64>(x));
            prop_assert!((l - r).abs() <= 1e-12 * l.abs().max(1.0), "{l} vs {r}");
        }
    }

    #[test]
    fn evaluation_is_bit_deterministic(e in any_tree(), x in point()) {
        let f = ScalarField::symbolic(e, ARITY);
        let a = f.eval(&x);
        let b = f.eval(&x);
        prop_assert_eq!(a.to_bits(), b.to_bits());
    }
}
