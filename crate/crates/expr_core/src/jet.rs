//! Truncated hyper-dual numbers.
//!
//! A [`Jet`] of depth `k` carries `2^k` coefficients indexed by bitmasks over
//! `k` nilpotent generators `ε_0, …, ε_{k-1}` with `ε_i² = 0`. Coefficient
//! `mask` multiplies the monomial `Π_{i ∈ mask} ε_i`. Seeding one generator per
//! Lie derivative makes nested directional derivatives exact to rounding.

use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

/// Hyper-dual number with `2^depth` coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct Jet {
    c: Vec<f64>,
}

impl Jet {
    pub fn constant(x: f64) -> Self {
        Jet { c: vec![x] }
    }

    /// `x + ε_bit`, with depth `bit + 1`.
    pub fn variable(x: f64, bit: usize) -> Self {
        let mut c = vec![0.0; 1 << (bit + 1)];
        c[0] = x;
        c[1 << bit] = 1.0;
        Jet { c }
    }

    /// Builds a jet from raw coefficients; the length must be a power of two.
    pub fn from_coeffs(c: Vec<f64>) -> Self {
        assert!(c.len().is_power_of_two(), "jet length must be a power of two");
        Jet { c }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.c
    }

    pub fn depth(&self) -> usize {
        self.c.len().trailing_zeros() as usize
    }

    pub fn re(&self) -> f64 {
        self.c[0]
    }

    pub fn coeff(&self, mask: usize) -> f64 {
        self.c.get(mask).copied().unwrap_or(0.0)
    }

    pub fn is_finite(&self) -> bool {
        self.c.iter().all(|v| v.is_finite())
    }

    /// Zero-pads to `depth` generators (no-op when already deep enough).
    pub fn promote(&self, depth: usize) -> Jet {
        if self.depth() >= depth {
            return self.clone();
        }
        let mut c = self.c.clone();
        c.resize(1 << depth, 0.0);
        Jet { c }
    }

    /// Appends a new top generator `ε_d` (d = `depth`) carrying `dir`:
    /// returns `self + ε_d · dir`, both promoted to `depth` first.
    pub fn with_top(&self, dir: &Jet, depth: usize) -> Jet {
        let lo = self.promote(depth);
        let hi = dir.promote(depth);
        let mut c = lo.c;
        c.extend_from_slice(&hi.c);
        Jet { c }
    }

    /// Coefficient of the top generator `ε_d` as a jet of depth `d`;
    /// zero when `self` does not reach depth `d + 1`.
    pub fn top_part(&self, depth: usize) -> Jet {
        if self.depth() <= depth {
            return Jet {
                c: vec![0.0; 1 << depth],
            };
        }
        let base = 1 << depth;
        let mut c = Vec::with_capacity(base);
        for m in 0..base {
            c.push(self.c[base + m]);
        }
        let full = Jet { c };
        full.truncate(depth)
    }

    /// Drops every coefficient that involves generators at index ≥ `depth`.
    pub fn truncate(&self, depth: usize) -> Jet {
        if self.depth() <= depth {
            return self.clone();
        }
        Jet {
            c: self.c[..1 << depth].to_vec(),
        }
    }

    /// Evaluates a scalar function with derivatives `derivs[j] = f^(j)(re)` on
    /// the jet via the Taylor series of its nilpotent part.
    pub fn apply(&self, derivs: &[f64]) -> Jet {
        let k = self.depth();
        let mut out = Jet {
            c: vec![0.0; self.c.len()],
        };
        out.c[0] = derivs[0];
        if k == 0 {
            return out;
        }
        let mut nil = self.clone();
        nil.c[0] = 0.0;
        let mut power = nil.clone();
        let mut fact = 1.0;
        for (j, d) in derivs.iter().enumerate().skip(1).take(k) {
            fact *= j as f64;
            let w = d / fact;
            if w != 0.0 {
                for (o, p) in out.c.iter_mut().zip(power.c.iter()) {
                    *o += w * p;
                }
            }
            if j < k {
                power = &power * &nil;
            }
        }
        out
    }

    pub fn recip(&self) -> Jet {
        let a = self.re();
        let k = self.depth();
        let mut d = Vec::with_capacity(k + 1);
        let mut v = 1.0 / a;
        d.push(v);
        for j in 1..=k {
            v *= -(j as f64) / a;
            d.push(v);
        }
        self.apply(&d)
    }

    pub fn sin(&self) -> Jet {
        let a = self.re();
        let (s, c) = a.sin_cos();
        let d: Vec<f64> = (0..=self.depth())
            .map(|j| match j % 4 {
                0 => s,
                1 => c,
                2 => -s,
                _ => -c,
            })
            .collect();
        self.apply(&d)
    }

    pub fn cos(&self) -> Jet {
        let a = self.re();
        let (s, c) = a.sin_cos();
        let d: Vec<f64> = (0..=self.depth())
            .map(|j| match j % 4 {
                0 => c,
                1 => -s,
                2 => -c,
                _ => s,
            })
            .collect();
        self.apply(&d)
    }

    pub fn exp(&self) -> Jet {
        let e = self.re().exp();
        self.apply(&vec![e; self.depth() + 1])
    }

    pub fn ln(&self) -> Jet {
        let a = self.re();
        let k = self.depth();
        let mut d = vec![a.ln()];
        let mut fact = 1.0;
        for j in 1..=k {
            if j > 1 {
                fact *= (j - 1) as f64;
            }
            let sign = if j % 2 == 1 { 1.0 } else { -1.0 };
            d.push(sign * fact / a.powi(j as i32));
        }
        self.apply(&d)
    }

    /// `self^(num/den)` through the falling-factorial derivative rule.
    pub fn powr(&self, num: i64, den: i64) -> Jet {
        let a = self.re();
        let r = num as f64 / den as f64;
        let k = self.depth();
        let base = pow_real(a, num, den);
        let mut d = vec![base];
        let mut coef = 1.0;
        for j in 1..=k {
            coef *= r - (j as f64 - 1.0);
            let e = pow_real(a, num - (j as i64) * den, den);
            d.push(coef * e);
        }
        self.apply(&d)
    }

    pub fn sqrt(&self) -> Jet {
        self.powr(1, 2)
    }
}

/// Real power `a^(num/den)` with integer fast path and odd-root support for
/// negative bases.
pub fn pow_real(a: f64, num: i64, den: i64) -> f64 {
    if den == 1 {
        if let Ok(n) = i32::try_from(num) {
            return a.powi(n);
        }
    }
    if a < 0.0 && den % 2 == 1 {
        let m = (-a).powf(num as f64 / den as f64);
        return if num % 2 == 0 { m } else { -m };
    }
    a.powf(num as f64 / den as f64)
}

fn binary(a: &Jet, b: &Jet, f: impl Fn(f64, f64) -> f64) -> Jet {
    let n = a.c.len().max(b.c.len());
    let mut c = Vec::with_capacity(n);
    for m in 0..n {
        c.push(f(a.coeff(m), b.coeff(m)));
    }
    Jet { c }
}

impl<'a> Add<&'a Jet> for &'a Jet {
    type Output = Jet;
    fn add(self, o: &Jet) -> Jet {
        binary(self, o, |x, y| x + y)
    }
}

impl<'a> Sub<&'a Jet> for &'a Jet {
    type Output = Jet;
    fn sub(self, o: &Jet) -> Jet {
        binary(self, o, |x, y| x - y)
    }
}

impl<'a> Mul<&'a Jet> for &'a Jet {
    type Output = Jet;
    fn mul(self, o: &Jet) -> Jet {
        if self.c.len() == 1 {
            return Jet {
                c: o.c.iter().map(|v| v * self.c[0]).collect(),
            };
        }
        if o.c.len() == 1 {
            return Jet {
                c: self.c.iter().map(|v| v * o.c[0]).collect(),
            };
        }
        let n = self.c.len().max(o.c.len());
        let a = self.promote(n.trailing_zeros() as usize);
        let b = o.promote(n.trailing_zeros() as usize);
        let mut c = vec![0.0; n];
        for (m, slot) in c.iter_mut().enumerate() {
            let mut acc = 0.0;
            let mut s = m;
            loop {
                acc += a.c[s] * b.c[m ^ s];
                if s == 0 {
                    break;
                }
                s = (s - 1) & m;
            }
            *slot = acc;
        }
        Jet { c }
    }
}

impl<'a> Div<&'a Jet> for &'a Jet {
    type Output = Jet;
    fn div(self, o: &Jet) -> Jet {
        if o.c.len() == 1 {
            return Jet {
                c: self.c.iter().map(|v| v / o.c[0]).collect(),
            };
        }
        self * &o.recip()
    }
}

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        Jet {
            c: self.c.iter().map(|v| -v).collect(),
        }
    }
}

macro_rules! owned_ops {
    ($tr:ident, $m:ident) => {
        impl $tr<Jet> for Jet {
            type Output = Jet;
            fn $m(self, o: Jet) -> Jet {
                (&self).$m(&o)
            }
        }
        impl<'a> $tr<&'a Jet> for Jet {
            type Output = Jet;
            fn $m(self, o: &Jet) -> Jet {
                (&self).$m(o)
            }
        }
        impl<'a> $tr<Jet> for &'a Jet {
            type Output = Jet;
            fn $m(self, o: Jet) -> Jet {
                self.$m(&o)
            }
        }
        impl $tr<f64> for Jet {
            type Output = Jet;
            fn $m(self, o: f64) -> Jet {
                (&self).$m(&Jet::constant(o))
            }
        }
        impl<'a> $tr<f64> for &'a Jet {
            type Output = Jet;
            fn $m(self, o: f64) -> Jet {
                self.$m(&Jet::constant(o))
            }
        }
    };
}

owned_ops!(Add, add);
owned_ops!(Sub, sub);
owned_ops!(Mul, mul);
owned_ops!(Div, div);

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        -&self
    }
}

impl AddAssign<&Jet> for Jet {
    fn add_assign(&mut self, o: &Jet) {
        if o.c.len() > self.c.len() {
            self.c.resize(o.c.len(), 0.0);
        }
        for (a, b) in self.c.iter_mut().zip(o.c.iter()) {
            *a += b;
        }
    }
}

impl SubAssign<&Jet> for Jet {
    fn sub_assign(&mut self, o: &Jet) {
        if o.c.len() > self.c.len() {
            self.c.resize(o.c.len(), 0.0);
        }
        for (a, b) in self.c.iter_mut().zip(o.c.iter()) {
            *a -= b;
        }
    }
}

impl MulAssign<&Jet> for Jet {
    fn mul_assign(&mut self, o: &Jet) {
        *self = &*self * o;
    }
}

impl From<f64> for Jet {
    fn from(x: f64) -> Self {
        Jet::constant(x)
    }
}

/// Scalar arithmetic shared by the plain and hyper-dual evaluation paths.
pub trait Real:
    Clone
    + std::fmt::Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn from_f64(x: f64) -> Self;
    fn re(&self) -> f64;
    fn sin(&self) -> Self;
    fn cos(&self) -> Self;
    fn exp(&self) -> Self;
    fn ln(&self) -> Self;
    fn powr(&self, num: i64, den: i64) -> Self;
}

impl Real for f64 {
    fn from_f64(x: f64) -> Self {
        x
    }
    fn re(&self) -> f64 {
        *self
    }
    fn sin(&self) -> Self {
        f64::sin(*self)
    }
    fn cos(&self) -> Self {
        f64::cos(*self)
    }
    fn exp(&self) -> Self {
        f64::exp(*self)
    }
    fn ln(&self) -> Self {
        f64::ln(*self)
    }
    fn powr(&self, num: i64, den: i64) -> Self {
        pow_real(*self, num, den)
    }
}

impl Real for Jet {
    fn from_f64(x: f64) -> Self {
        Jet::constant(x)
    }
    fn re(&self) -> f64 {
        self.c[0]
    }
    fn sin(&self) -> Self {
        Jet::sin(self)
    }
    fn cos(&self) -> Self {
        Jet::cos(self)
    }
    fn exp(&self) -> Self {
        Jet::exp(self)
    }
    fn ln(&self) -> Self {
        Jet::ln(self)
    }
    fn powr(&self, num: i64, den: i64) -> Self {
        Jet::powr(self, num, den)
    }
}

/// Largest depth across a slice of jets.
pub fn max_depth(xs: &[Jet]) -> usize {
    xs.iter().map(Jet::depth).max().unwrap_or(0)
}

/// Lifts a real point to depth-0 jets.
pub fn lift(x: &[f64]) -> Vec<Jet> {
    x.iter().map(|&v| Jet::constant(v)).collect()
}

/// Real parts of a jet slice.
pub fn reals(x: &[Jet]) -> Vec<f64> {
    x.iter().map(Jet::re).collect()
}
