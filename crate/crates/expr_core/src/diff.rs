//! Symbolic partial derivatives with constant folding and 0/1 identities.

use crate::expr::{Expr, Func, Rational};

fn is_zero(e: &Expr) -> bool {
    matches!(e, Expr::Const(c) if *c == 0.0)
}

fn is_one(e: &Expr) -> bool {
    matches!(e, Expr::Const(c) if *c == 1.0)
}

fn folded(e: &Expr) -> Option<f64> {
    match e {
        Expr::Const(c) => Some(*c),
        Expr::Neg(a) => match **a {
            Expr::Const(c) => Some(-c),
            _ => None,
        },
        _ => None,
    }
}

pub fn neg(a: Expr) -> Expr {
    if let Some(v) = folded(&a) {
        return Expr::c(-v);
    }
    if let Expr::Neg(inner) = a {
        return *inner;
    }
    Expr::Neg(Box::new(a))
}

pub fn add(a: Expr, b: Expr) -> Expr {
    if let (Some(x), Some(y)) = (folded(&a), folded(&b)) {
        return Expr::c(x + y);
    }
    if is_zero(&a) {
        return b;
    }
    if is_zero(&b) {
        return a;
    }
    Expr::Add(Box::new(a), Box::new(b))
}

pub fn sub(a: Expr, b: Expr) -> Expr {
    if let (Some(x), Some(y)) = (folded(&a), folded(&b)) {
        return Expr::c(x - y);
    }
    if is_zero(&b) {
        return a;
    }
    if is_zero(&a) {
        return neg(b);
    }
    Expr::Sub(Box::new(a), Box::new(b))
}

pub fn mul(a: Expr, b: Expr) -> Expr {
    if let (Some(x), Some(y)) = (folded(&a), folded(&b)) {
        return Expr::c(x * y);
    }
    if is_zero(&a) || is_zero(&b) {
        return Expr::Const(0.0);
    }
    if is_one(&a) {
        return b;
    }
    if is_one(&b) {
        return a;
    }
    if let (Some(x), Expr::Mul(l, r)) = (folded(&a), &b) {
        if let Some(y) = folded(l) {
            return mul(Expr::c(x * y), (**r).clone());
        }
    }
    Expr::Mul(Box::new(a), Box::new(b))
}

pub fn div(a: Expr, b: Expr) -> Expr {
    if let (Some(x), Some(y)) = (folded(&a), folded(&b)) {
        if y != 0.0 {
            return Expr::c(x / y);
        }
    }
    if is_zero(&a) {
        return Expr::Const(0.0);
    }
    if is_one(&b) {
        return a;
    }
    Expr::Div(Box::new(a), Box::new(b))
}

pub fn pow(a: Expr, r: Rational) -> Expr {
    if r.num == 0 {
        return Expr::Const(1.0);
    }
    if r.num == r.den {
        return a;
    }
    if let Some(x) = folded(&a) {
        let v = crate::jet::pow_real(x, r.num, r.den);
        if v.is_finite() {
            return Expr::c(v);
        }
    }
    Expr::Pow(Box::new(a), r)
}

pub fn func(f: Func, a: Expr) -> Expr {
    Expr::Func(f, Box::new(a))
}

/// Exact partial derivative of `e` with respect to coordinate `slot`.
pub fn diff(e: &Expr, slot: usize) -> Expr {
    match e {
        Expr::Const(_) => Expr::Const(0.0),
        Expr::Var(s) => Expr::Const(if *s == slot { 1.0 } else { 0.0 }),
        Expr::Neg(a) => neg(diff(a, slot)),
        Expr::Add(a, b) => add(diff(a, slot), diff(b, slot)),
        Expr::Sub(a, b) => sub(diff(a, slot), diff(b, slot)),
        Expr::Mul(a, b) => add(mul(diff(a, slot), (**b).clone()), mul((**a).clone(), diff(b, slot))),
        Expr::Div(a, b) => {
            let da = diff(a, slot);
            let db = diff(b, slot);
            if is_zero(&db) {
                return div(da, (**b).clone());
            }
            sub(
                div(da, (**b).clone()),
                div(mul((**a).clone(), db), pow((**b).clone(), Rational::integer(2))),
            )
        }
        Expr::Pow(a, r) => {
            let da = diff(a, slot);
            if is_zero(&da) {
                return Expr::Const(0.0);
            }
            mul(Expr::c(r.value()), mul(pow((**a).clone(), r.minus_one()), da))
        }
        Expr::Func(f, a) => {
            let da = diff(a, slot);
            if is_zero(&da) {
                return Expr::Const(0.0);
            }
            let inner = (**a).clone();
            let outer = match f {
                Func::Sin => func(Func::Cos, inner),
                Func::Cos => neg(func(Func::Sin, inner)),
                Func::Exp => func(Func::Exp, inner),
                Func::Log => div(Expr::Const(1.0), inner),
                Func::Sqrt => div(Expr::Const(0.5), func(Func::Sqrt, inner)),
            };
            mul(outer, da)
        }
    }
}

/// Gradient expressions for every slot below `arity`.
pub fn gradient(e: &Expr, arity: usize) -> Vec<Expr> {
    (0..arity).map(|s| diff(e, s)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn folding_basics() {
        assert_eq!(mul(Expr::Const(2.0), Expr::Const(3.0)), Expr::Const(6.0));
        assert_eq!(add(Expr::Const(0.0), Expr::Var(1)), Expr::Var(1));
        assert_eq!(neg(Expr::c(-2.0)), Expr::Const(2.0));
    }
}
