//! Minimal-parenthesis printing that re-parses to the same tree.

use crate::expr::{Expr, Rational, SymbolTable};
use std::fmt;

fn prec(e: &Expr) -> u8 {
    match e {
        Expr::Add(..) | Expr::Sub(..) => 1,
        Expr::Mul(..) | Expr::Div(..) => 2,
        Expr::Neg(..) => 3,
        Expr::Pow(..) => 4,
        Expr::Const(_) | Expr::Var(_) | Expr::Func(..) => 5,
    }
}

/// Borrowed printer returned by [`Expr::display`].
pub struct Display<'a> {
    expr: &'a Expr,
    table: &'a SymbolTable,
}

impl Expr {
    pub fn display<'a>(&'a self, table: &'a SymbolTable) -> Display<'a> {
        Display { expr: self, table }
    }

    pub fn to_text(&self, table: &SymbolTable) -> String {
        self.display(table).to_string()
    }
}

fn exponent(r: Rational) -> String {
    match (r.num < 0, r.den) {
        (false, 1) => format!("{}", r.num),
        (true, 1) => format!("({})", r.num),
        _ => format!("({}/{})", r.num, r.den),
    }
}

fn write(e: &Expr, t: &SymbolTable, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    let wrap = |sub: &Expr, paren: bool, f: &mut fmt::Formatter<'_>| -> fmt::Result {
        if paren {
            f.write_str("(")?;
            write(sub, t, f)?;
            f.write_str(")")
        } else {
            write(sub, t, f)
        }
    };
    match e {
        Expr::Const(c) => write!(f, "{c}"),
        Expr::Var(s) => f.write_str(t.name(*s)),
        Expr::Neg(a) => {
            f.write_str("-")?;
            wrap(a, prec(a) < 3, f)
        }
        Expr::Add(a, b) | Expr::Sub(a, b) => {
            wrap(a, false, f)?;
            f.write_str(if matches!(e, Expr::Add(..)) { " + " } else { " - " })?;
            wrap(b, prec(b) <= 1, f)
        }
        Expr::Mul(a, b) | Expr::Div(a, b) => {
            wrap(a, prec(a) < 2, f)?;
            f.write_str(if matches!(e, Expr::Mul(..)) { "*" } else { "/" })?;
            wrap(b, prec(b) <= 2, f)
        }
        Expr::Pow(a, r) => {
            wrap(a, prec(a) < 5, f)?;
            write!(f, "^{}", exponent(*r))
        }
        Expr::Func(func, a) => {
            write!(f, "{}(", func.name())?;
            write(a, t, f)?;
            f.write_str(")")
        }
    }
}

impl fmt::Display for Display<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write(self.expr, self.table, f)
    }
}
