//! Expression trees over a [`SymbolTable`] and their evaluation.

use crate::jet::{pow_real, Real};
use std::collections::HashMap;
use thiserror::Error;

/// Elementary functions admitted by the grammar.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Log,
    Sqrt,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
        }
    }

    pub fn from_name(s: &str) -> Option<Func> {
        Some(match s {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sqrt" => Func::Sqrt,
            _ => return None,
        })
    }
}

/// Reduced rational exponent with positive denominator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Rational {
    pub num: i64,
    pub den: i64,
}

impl Rational {
    pub fn new(num: i64, den: i64) -> Rational {
        assert!(den != 0, "zero denominator");
        let g = gcd(num.unsigned_abs(), den.unsigned_abs()).max(1) as i64;
        let s = if den < 0 { -1 } else { 1 };
        Rational {
            num: s * num / g,
            den: s * den / g,
        }
    }

    pub fn integer(n: i64) -> Rational {
        Rational { num: n, den: 1 }
    }

    pub fn value(self) -> f64 {
        self.num as f64 / self.den as f64
    }

    pub fn minus_one(self) -> Rational {
        Rational::new(self.num - self.den, self.den)
    }

    /// Best rational approximation of `x` with denominator ≤ 10⁶, accepted
    /// only when it reproduces `x` to a few ulps.
    pub fn approximate(x: f64) -> Option<Rational> {
        if !x.is_finite() {
            return None;
        }
        let (mut h0, mut h1) = (0i64, 1i64);
        let (mut k0, mut k1) = (1i64, 0i64);
        let mut v = x;
        for _ in 0..40 {
            let a = v.floor();
            if a.abs() > 1e12 {
                break;
            }
            let a = a as i64;
            let h2 = a.checked_mul(h1)?.checked_add(h0)?;
            let k2 = a.checked_mul(k1)?.checked_add(k0)?;
            if k2 > 1_000_000 {
                break;
            }
            h0 = h1;
            h1 = h2;
            k0 = k1;
            k1 = k2;
            let approx = h1 as f64 / k1 as f64;
            if (approx - x).abs() <= 4.0 * f64::EPSILON * x.abs().max(1.0) {
                return Some(Rational::new(h1, k1));
            }
            let frac = v - v.floor();
            if frac == 0.0 {
                break;
            }
            v = 1.0 / frac;
        }
        None
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Expression tree node. Constants are stored nonnegative; a negative literal
/// is `Neg(Const)`.
#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Const(f64),
    Var(usize),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Rational),
    Func(Func, Box<Expr>),
}

/// Ordered coordinate names; the slot of a name is its derivative slot.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymbolTable {
    names: Vec<String>,
    index: HashMap<String, usize>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TableError {
    #[error("duplicate symbol `{0}`")]
    Duplicate(String),
    #[error("invalid symbol name `{0}`")]
    Invalid(String),
}

impl SymbolTable {
    pub fn new<S: AsRef<str>>(names: &[S]) -> Result<SymbolTable, TableError> {
        let mut index = HashMap::new();
        let mut out = Vec::with_capacity(names.len());
        for (i, n) in names.iter().enumerate() {
            let n = n.as_ref();
            let mut chars = n.chars();
            let ok = chars.next().is_some_and(|c| c.is_ascii_alphabetic()) && chars.all(|c| c.is_ascii_alphanumeric());
            if !ok || Func::from_name(n).is_some() {
                return Err(TableError::Invalid(n.to_string()));
            }
            if index.insert(n.to_string(), i).is_some() {
                return Err(TableError::Duplicate(n.to_string()));
            }
            out.push(n.to_string());
        }
        Ok(SymbolTable { names: out, index })
    }

    /// `(t, q1..qn, v1..vn)`.
    pub fn lagrangian(n: usize) -> SymbolTable {
        Self::chart(n, "v")
    }

    /// `(t, q1..qn, p1..pn)`.
    pub fn momentum(n: usize) -> SymbolTable {
        Self::chart(n, "p")
    }

    /// `(t, q1..qn)`.
    pub fn base(n: usize) -> SymbolTable {
        let mut names = vec!["t".to_string()];
        names.extend((1..=n).map(|i| format!("q{i}")));
        SymbolTable::new(&names).expect("generated names are valid")
    }

    fn chart(n: usize, fiber: &str) -> SymbolTable {
        let mut names = vec!["t".to_string()];
        names.extend((1..=n).map(|i| format!("q{i}")));
        names.extend((1..=n).map(|i| format!("{fiber}{i}")));
        SymbolTable::new(&names).expect("generated names are valid")
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn slot(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn name(&self, slot: usize) -> &str {
        &self.names[slot]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DomainError {
    #[error("logarithm of nonpositive value {0}")]
    Log(f64),
    #[error("square root of negative value {0}")]
    Sqrt(f64),
    #[error("division by zero")]
    DivisionByZero,
    #[error("power {1}/{2} undefined at base {0}")]
    Pow(f64, i64, i64),
    #[error("non-finite value")]
    NonFinite,
    #[error("point has {got} coordinates, expected {expected}")]
    Arity { got: usize, expected: usize },
}

impl Expr {
    pub fn c(x: f64) -> Expr {
        if x == 0.0 {
            Expr::Const(0.0)
        } else if x < 0.0 {
            Expr::Neg(Box::new(Expr::Const(-x)))
        } else {
            Expr::Const(x)
        }
    }

    pub fn var(slot: usize) -> Expr {
        Expr::Var(slot)
    }

    /// Constant value when the tree contains no variables.
    pub fn constant_value(&self) -> Option<f64> {
        match self {
            Expr::Const(c) => Some(*c),
            Expr::Var(_) => None,
            Expr::Neg(a) => a.constant_value().map(|v| -v),
            Expr::Add(a, b) => Some(a.constant_value()? + b.constant_value()?),
            Expr::Sub(a, b) => Some(a.constant_value()? - b.constant_value()?),
            Expr::Mul(a, b) => Some(a.constant_value()? * b.constant_value()?),
            Expr::Div(a, b) => Some(a.constant_value()? / b.constant_value()?),
            Expr::Pow(a, r) => Some(pow_real(a.constant_value()?, r.num, r.den)),
            Expr::Func(f, a) => {
                let v = a.constant_value()?;
                Some(match f {
                    Func::Sin => v.sin(),
                    Func::Cos => v.cos(),
                    Func::Exp => v.exp(),
                    Func::Log => v.ln(),
                    Func::Sqrt => v.sqrt(),
                })
            }
        }
    }

    /// Largest variable slot referenced, if any.
    pub fn max_slot(&self) -> Option<usize> {
        match self {
            Expr::Const(_) => None,
            Expr::Var(s) => Some(*s),
            Expr::Neg(a) | Expr::Pow(a, _) | Expr::Func(_, a) => a.max_slot(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                match (a.max_slot(), b.max_slot()) {
                    (Some(x), Some(y)) => Some(x.max(y)),
                    (x, y) => x.or(y),
                }
            }
        }
    }

    /// Checked evaluation that reports domain violations.
    pub fn eval_checked(&self, x: &[f64]) -> Result<f64, DomainError> {
        Ok(match self {
            Expr::Const(c) => *c,
            Expr::Var(s) => x[*s],
            Expr::Neg(a) => -a.eval_checked(x)?,
            Expr::Add(a, b) => a.eval_checked(x)? + b.eval_checked(x)?,
            Expr::Sub(a, b) => a.eval_checked(x)? - b.eval_checked(x)?,
            Expr::Mul(a, b) => a.eval_checked(x)? * b.eval_checked(x)?,
            Expr::Div(a, b) => {
                let d = b.eval_checked(x)?;
                if d == 0.0 {
                    return Err(DomainError::DivisionByZero);
                }
                a.eval_checked(x)? / d
            }
            Expr::Pow(a, r) => {
                let v = a.eval_checked(x)?;
                if (v == 0.0 && r.num < 0) || (v < 0.0 && r.den % 2 == 0) {
                    return Err(DomainError::Pow(v, r.num, r.den));
                }
                pow_real(v, r.num, r.den)
            }
            Expr::Func(f, a) => {
                let v = a.eval_checked(x)?;
                match f {
                    Func::Sin => v.sin(),
                    Func::Cos => v.cos(),
                    Func::Exp => v.exp(),
                    Func::Log => {
                        if v <= 0.0 {
                            return Err(DomainError::Log(v));
                        }
                        v.ln()
                    }
                    Func::Sqrt => {
                        if v < 0.0 {
                            return Err(DomainError::Sqrt(v));
                        }
                        v.sqrt()
                    }
                }
            }
        })
    }

    /// Unchecked evaluation over any [`Real`]; domain violations propagate NaN.
    pub fn eval<R: Real>(&self, x: &[R]) -> R {
        match self {
            Expr::Const(c) => R::from_f64(*c),
            Expr::Var(s) => x[*s].clone(),
            Expr::Neg(a) => -a.eval(x),
            Expr::Add(a, b) => a.eval(x) + b.eval(x),
            Expr::Sub(a, b) => a.eval(x) - b.eval(x),
            Expr::Mul(a, b) => a.eval(x) * b.eval(x),
            Expr::Div(a, b) => a.eval(x) / b.eval(x),
            Expr::Pow(a, r) => a.eval(x).powr(r.num, r.den),
            Expr::Func(f, a) => {
                let v = a.eval(x);
                match f {
                    Func::Sin => v.sin(),
                    Func::Cos => v.cos(),
                    Func::Exp => v.exp(),
                    Func::Log => v.ln(),
                    Func::Sqrt => v.powr(1, 2),
                }
            }
        }
    }

    /// Replaces every variable slot `s` by `map[s]`.
    pub fn substitute(&self, map: &[Expr]) -> Expr {
        match self {
            Expr::Const(c) => Expr::Const(*c),
            Expr::Var(s) => map[*s].clone(),
            Expr::Neg(a) => Expr::Neg(Box::new(a.substitute(map))),
            Expr::Add(a, b) => Expr::Add(Box::new(a.substitute(map)), Box::new(b.substitute(map))),
            Expr::Sub(a, b) => Expr::Sub(Box::new(a.substitute(map)), Box::new(b.substitute(map))),
            Expr::Mul(a, b) => Expr::Mul(Box::new(a.substitute(map)), Box::new(b.substitute(map))),
            Expr::Div(a, b) => Expr::Div(Box::new(a.substitute(map)), Box::new(b.substitute(map))),
            Expr::Pow(a, r) => Expr::Pow(Box::new(a.substitute(map)), *r),
            Expr::Func(f, a) => Expr::Func(*f, Box::new(a.substitute(map))),
        }
    }
}
