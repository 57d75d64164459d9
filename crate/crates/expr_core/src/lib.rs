//! Expression front end and exact forward-mode differentiation.
//!
//! Expressions are parsed over a [`SymbolTable`], differentiated
//! symbolically with [`diff()`], and evaluated either in plain `f64` or on
//! hyper-dual [`Jet`]s. [`field`] wraps both paths behind chart fields whose
//! Lie derivatives compose to any order.

pub mod diff;
pub mod expr;
pub mod field;
pub mod jet;
pub mod parse;
pub mod print;

pub use diff::{diff, gradient};
pub use expr::{DomainError, Expr, Func, Rational, SymbolTable, TableError};
pub use field::{bracket, CovectorField, ScalarField, TwoFormField, VectorField};
pub use jet::{Jet, Real};
pub use parse::{parse, ParseError};
