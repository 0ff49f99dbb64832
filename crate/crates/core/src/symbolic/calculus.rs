//! Normalization, zero testing and differentiation on expression trees.

use super::bundle::{Independent, Symbol};
use super::expr::Expr;
use super::ratfunc::RationalFunction;
use super::SymbolicError;

/// Canonical form `p / q`: expanded, gcd-reduced, monic denominator, terms
/// in descending graded-lexicographic order. Algebraically equal inputs
/// give structurally equal outputs.
pub fn normalize(e: &Expr) -> Result<Expr, SymbolicError> {
    Ok(Expr::from_rational(&e.to_rational()?))
}

/// Exact zero test. An expression that cannot be normalized (it divides by
/// something identically zero) is not zero.
pub fn is_identically_zero(e: &Expr) -> bool {
    e.to_rational().is_ok_and(|r| r.is_zero())
}

/// Formal partial derivative with respect to `s`, normalized.
pub fn partial(e: &Expr, s: Symbol) -> Result<Expr, SymbolicError> {
    Ok(Expr::from_rational(&e.to_rational()?.partial(s)))
}

/// `D_dir^order e`, normalized.
pub fn total_derivative(e: &Expr, dir: Independent, order: u32) -> Result<Expr, SymbolicError> {
    let mut r = e.to_rational()?;
    for _ in 0..order {
        r = r.total_derivative(dir);
    }
    Ok(Expr::from_rational(&r))
}

impl Expr {
    pub fn normalized(&self) -> Result<Expr, SymbolicError> {
        normalize(self)
    }

    /// Algebraic equality as rational functions.
    pub fn equivalent(&self, other: &Expr) -> bool {
        match (self.to_rational(), other.to_rational()) {
            (Ok(a), Ok(b)) => a == b,
            _ => false,
        }
    }
}

impl RationalFunction {
    pub fn to_expr(&self) -> Expr {
        Expr::from_rational(self)
    }
}
