use expr_core::diff::{add, mul};
use expr_core::field::bracket;
use expr_core::{diff, parse, DomainError, Expr, ParseError, Rational, ScalarField, SymbolTable, VectorField};

fn b(e: Expr) -> Box<Expr> {
    Box::new(e)
}

fn central(f: &ScalarField, x: &[f64], seed: &[f64], h: f64) -> f64 {
    let xp: Vec<f64> = x.iter().zip(seed).map(|(a, s)| a + h * s).collect();
    let xm: Vec<f64> = x.iter().zip(seed).map(|(a, s)| a - h * s).collect();
    (f.eval(&xp) - f.eval(&xm)) / (2.0 * h)
}

#[test]
fn parses_half_v_squared() {
    let t = SymbolTable::new(&["t", "q1", "v1"]).unwrap();
    let e = parse("0.5*v1^2", &t).unwrap();
    assert_eq!(
        e,
        Expr::Mul(b(Expr::Const(0.5)), b(Expr::Pow(b(Expr::Var(2)), Rational::integer(2))))
    );
}

#[test]
fn parses_difference_of_products() {
    let t = SymbolTable::lagrangian(2);
    let e = parse("q2*v1 - q1^2", &t).unwrap();
    let expected = Expr::Sub(
        b(Expr::Mul(b(Expr::Var(2)), b(Expr::Var(3)))),
        b(Expr::Pow(b(Expr::Var(1)), Rational::integer(2))),
    );
    assert_eq!(e, expected);
}

#[test]
fn unknown_symbol_is_reported_by_name() {
    let t = SymbolTable::new(&["t", "q1", "v1"]).unwrap();
    match parse("v3", &t) {
        Err(ParseError::UnknownSymbol { name, offset }) => {
            assert_eq!(name, "v3");
            assert_eq!(offset, 0);
        }
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn syntax_errors_carry_byte_offsets() {
    let t = SymbolTable::lagrangian(1);
    match parse("q1 + * v1", &t) {
        Err(ParseError::Syntax { offset, .. }) => assert_eq!(offset, 5),
        other => panic!("unexpected {other:?}"),
    }
    match parse("q1^v1", &t) {
        Err(ParseError::Syntax { offset, .. }) => assert_eq!(offset, 3),
        other => panic!("unexpected {other:?}"),
    }
    assert!(matches!(parse("(q1", &t), Err(ParseError::Syntax { offset: 3, .. })));
}

#[test]
fn power_binds_tighter_than_unary_minus() {
    let t = SymbolTable::lagrangian(1);
    let e = parse("-q1^2", &t).unwrap();
    assert_eq!(e, Expr::Neg(b(Expr::Pow(b(Expr::Var(1)), Rational::integer(2)))));
    let r = parse("q1^-1/2", &t).unwrap();
    assert_eq!(
        r,
        Expr::Div(
            b(Expr::Pow(b(Expr::Var(1)), Rational::integer(-1))),
            b(Expr::Const(2.0))
        )
    );
    let right = parse("q1^2^3", &t).unwrap();
    assert_eq!(right, Expr::Pow(b(Expr::Var(1)), Rational::integer(8)));
}

#[test]
fn derivative_examples_fold_to_simple_trees() {
    let t = SymbolTable::lagrangian(2);
    let half = parse("0.5*v1^2", &t).unwrap();
    assert_eq!(diff(&half, t.slot("v1").unwrap()), Expr::Var(3));
    let qv = parse("q2*v1", &t).unwrap();
    assert_eq!(diff(&qv, t.slot("q2").unwrap()), Expr::Var(3));
    let s = parse("sin(q1)", &t).unwrap();
    assert_eq!(diff(&s, 1).to_text(&t), "cos(q1)");
}

#[test]
fn eval_dual_examples() {
    let t = SymbolTable::new(&["t", "q1", "v1"]).unwrap();
    let sq = ScalarField::symbolic(parse("q1^2", &t).unwrap(), 3);
    assert_eq!(sq.eval_dual(&[0.0, 3.0, 0.0], &[0.0, 1.0, 0.0]).unwrap(), (9.0, 6.0));
    let five = ScalarField::constant(3, 5.0);
    assert_eq!(
        five.eval_dual(&[1.0, -2.0, 7.0], &[0.3, 0.1, -4.0]).unwrap(),
        (5.0, 0.0)
    );

    let t2 = SymbolTable::lagrangian(2);
    let f = ScalarField::symbolic(parse("q2*v1", &t2).unwrap(), 5);
    let x = [0.0, 1.0, 2.0, 4.0, 0.0];
    let seed = [0.0, 0.0, 0.0, 1.0, 0.0];
    let (v, d) = f.eval_dual(&x, &seed).unwrap();
    assert_eq!(v, 8.0);
    assert!((d - 2.0).abs() < 1e-15);
    assert!((d - central(&f, &x, &seed, 1e-6)).abs() <= 1e-8);
}

#[test]
fn domain_errors() {
    let t = SymbolTable::lagrangian(1);
    let lg = ScalarField::symbolic(parse("log(q1)", &t).unwrap(), 3);
    assert!(matches!(
        lg.eval_dual(&[0.0, -1.0, 0.0], &[0.0, 1.0, 0.0]),
        Err(DomainError::Log(_))
    ));
    let sq = ScalarField::symbolic(parse("sqrt(q1)", &t).unwrap(), 3);
    assert!(matches!(
        sq.eval_dual(&[0.0, -1.0, 0.0], &[0.0, 1.0, 0.0]),
        Err(DomainError::Sqrt(_))
    ));
    let dv = ScalarField::symbolic(parse("1/v1", &t).unwrap(), 3);
    assert!(matches!(
        dv.eval_dual(&[0.0, 1.0, 0.0], &[0.0, 1.0, 0.0]),
        Err(DomainError::DivisionByZero)
    ));
}

#[test]
fn printing_is_minimal_and_reparses() {
    let t = SymbolTable::lagrangian(2);
    for src in [
        "q1 - (q2 - v1)",
        "-(q1 + q2)*v1",
        "(-q1)^2",
        "q1^(1/2) + v2^(-1)",
        "--q1",
        "q1*-v2",
        "exp(sin(q1))/(q2*v1)",
    ] {
        let e = parse(src, &t).unwrap();
        assert_eq!(e.to_text(&t), src);
        assert_eq!(parse(&e.to_text(&t), &t).unwrap(), e);
    }
}

#[test]
fn nested_lie_derivatives_are_exact() {
    let t = SymbolTable::lagrangian(1);
    let f = ScalarField::symbolic(parse("sin(q1)*v1^3", &t).unwrap(), 3);
    let x_field = VectorField::from_components(vec![
        ScalarField::constant(3, 1.0),
        ScalarField::coordinate(3, 2),
        ScalarField::symbolic(parse("-q1", &t).unwrap(), 3),
    ]);
    let lf = f.lie(&x_field);
    let llf = lf.lie(&x_field);
    let e = f.expr().unwrap().clone();
    let comps = [Expr::Const(1.0), Expr::Var(2), parse("-q1", &t).unwrap()];
    let lie_sym = |g: &Expr| {
        let mut acc = Expr::Const(0.0);
        for (s, c) in comps.iter().enumerate() {
            acc = add(acc, mul(c.clone(), diff(g, s)));
        }
        acc
    };
    let l1 = lie_sym(&e);
    let l2 = lie_sym(&l1);
    for x in [[0.1, 0.4, -1.2], [2.0, -0.3, 0.7], [0.0, 1.0, 1.0]] {
        assert!((lf.eval(&x) - l1.eval::<f64>(&x)).abs() < 1e-12);
        assert!((llf.eval(&x) - l2.eval::<f64>(&x)).abs() < 1e-11);
    }
}

#[test]
fn bracket_of_rotation_and_translation() {
    let t = SymbolTable::new(&["x", "y"]).unwrap();
    let rot = VectorField::from_components(vec![
        ScalarField::symbolic(parse("-y", &t).unwrap(), 2),
        ScalarField::symbolic(parse("x", &t).unwrap(), 2),
    ]);
    let tx = VectorField::constant(vec![1.0, 0.0]);
    let br = bracket(&rot, &tx).eval(&[0.3, -0.8]);
    assert!((br[0] - 0.0).abs() < 1e-15 && (br[1] + 1.0).abs() < 1e-15);
}

#[test]
fn exterior_derivative_of_tautological_form() {
    let n = 3;
    let theta = expr_core::CovectorField::new(n, |p| {
        vec![
            p[2].clone(),
            expr_core::Jet::constant(0.0),
            expr_core::Jet::constant(0.0),
        ]
    });
    let w = theta.exterior_derivative().eval(&[0.5, 1.0, 2.0]);
    assert_eq!(w[2 * n], 1.0);
    assert_eq!(w[2], -1.0);
    assert!(theta.exterior_derivative().closedness_residual(&[0.1, 0.2, 0.3]) < 1e-14);
}
