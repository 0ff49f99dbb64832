//! Exact symbolic expressions over jet-space coordinates.

mod bundle;
mod calculus;
mod expr;
mod parse;
mod poly;
mod print;
mod ratfunc;

pub use bundle::{BundleSpec, Independent, JetCoordinate, MultiIndex, Symbol};
pub use calculus::{is_identically_zero, normalize, partial, total_derivative};
pub use expr::Expr;
pub use parse::parse;
pub use poly::{gcd, Monomial, Poly};
pub use print::Displayed;
pub use ratfunc::RationalFunction;

pub(crate) use expr::rational_to_f64;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SymbolicError {
    #[error("syntax error at offset {position}: {message}")]
    Syntax { position: usize, message: String },
    #[error("unknown identifier `{0}`")]
    UnknownIdentifier(String),
    #[error("malformed derivative suffix in `{0}`")]
    MalformedSuffix(String),
    #[error("invalid bundle: {0}")]
    InvalidBundle(String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("no value assigned to symbol {0}")]
    UnassignedSymbol(String),
    #[error("exponent {0} is too large")]
    ExponentTooLarge(i64),
}
