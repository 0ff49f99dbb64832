//! Expression trees over jet coordinates.

use std::collections::{BTreeMap, BTreeSet};
use std::ops;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::bundle::{BundleSpec, Independent, JetCoordinate, Symbol};
use super::poly::Poly;
use super::ratfunc::RationalFunction;
use super::SymbolicError;

/// An exact symbolic expression. Trees are immutable values; every
/// operation returns a new tree.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Expr {
    Const(BigRational),
    Sym(Symbol),
    Add(Vec<Expr>),
    Mul(Vec<Expr>),
    Neg(Box<Expr>),
    Pow(Box<Expr>, i64),
    Div(Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn zero() -> Expr {
        Expr::Const(BigRational::zero())
    }

    pub fn one() -> Expr {
        Expr::Const(BigRational::one())
    }

    pub fn int(n: i64) -> Expr {
        Expr::Const(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn rational(n: i64, d: i64) -> Expr {
        Expr::Const(BigRational::new(BigInt::from(n), BigInt::from(d)))
    }

    pub fn sym(s: impl Into<Symbol>) -> Expr {
        Expr::Sym(s.into())
    }

    pub fn z() -> Expr {
        Expr::Sym(Symbol::Z)
    }

    pub fn t() -> Expr {
        Expr::Sym(Symbol::T)
    }

    /// Jet coordinate `x^dep_{(j_z, j_t)}`.
    pub fn jet(dep: usize, j_z: u32, j_t: u32) -> Expr {
        Expr::Sym(Symbol::jet(dep, j_z, j_t))
    }

    pub fn pow(self, e: i64) -> Expr {
        Expr::Pow(Box::new(self), e)
    }

    pub fn is_literal_zero(&self) -> bool {
        matches!(self, Expr::Const(c) if c.is_zero())
    }

    /// All symbols occurring in the tree.
    pub fn symbols(&self) -> BTreeSet<Symbol> {
        let mut out = BTreeSet::new();
        self.collect_symbols(&mut out);
        out
    }

    fn collect_symbols(&self, out: &mut BTreeSet<Symbol>) {
        match self {
            Expr::Const(_) => {}
            Expr::Sym(s) => {
                out.insert(*s);
            }
            Expr::Add(xs) | Expr::Mul(xs) => xs.iter().for_each(|x| x.collect_symbols(out)),
            Expr::Neg(a) | Expr::Pow(a, _) => a.collect_symbols(out),
            Expr::Div(a, b) => {
                a.collect_symbols(out);
                b.collect_symbols(out);
            }
        }
    }

    pub fn jet_coordinates(&self) -> BTreeSet<JetCoordinate> {
        self.symbols().into_iter().filter_map(Symbol::as_jet).collect()
    }

    /// Maximal derivative order of the jet coordinates present, `None` when
    /// the expression contains no dependent variable at all.
    pub fn max_order(&self) -> Option<u32> {
        self.jet_coordinates().iter().map(|c| c.order()).max()
    }

    /// Single-pass simultaneous substitution. Replacement subtrees are not
    /// revisited and the result is not normalized.
    pub fn substitute(&self, rules: &BTreeMap<Symbol, Expr>) -> Expr {
        match self {
            Expr::Const(_) => self.clone(),
            Expr::Sym(s) => rules.get(s).cloned().unwrap_or_else(|| self.clone()),
            Expr::Add(xs) => Expr::Add(xs.iter().map(|x| x.substitute(rules)).collect()),
            Expr::Mul(xs) => Expr::Mul(xs.iter().map(|x| x.substitute(rules)).collect()),
            Expr::Neg(a) => Expr::Neg(Box::new(a.substitute(rules))),
            Expr::Pow(a, e) => Expr::Pow(Box::new(a.substitute(rules)), *e),
            Expr::Div(a, b) => Expr::Div(Box::new(a.substitute(rules)), Box::new(b.substitute(rules))),
        }
    }

    /// Exact evaluation directly on the tree.
    pub fn evaluate(&self, point: &BTreeMap<Symbol, BigRational>) -> Result<BigRational, SymbolicError> {
        self.evaluate_with(&|s| point.get(&s).cloned())
    }

    pub fn evaluate_with(
        &self,
        point: &dyn Fn(Symbol) -> Option<BigRational>,
    ) -> Result<BigRational, SymbolicError> {
        Ok(match self {
            Expr::Const(c) => c.clone(),
            Expr::Sym(s) => point(*s).ok_or_else(|| SymbolicError::UnassignedSymbol(format!("{s:?}")))?,
            Expr::Add(xs) => {
                let mut acc = BigRational::zero();
                for x in xs {
                    acc += x.evaluate_with(point)?;
                }
                acc
            }
            Expr::Mul(xs) => {
                let mut acc = BigRational::one();
                for x in xs {
                    acc *= x.evaluate_with(point)?;
                }
                acc
            }
            Expr::Neg(a) => -a.evaluate_with(point)?,
            Expr::Pow(a, e) => {
                let base = a.evaluate_with(point)?;
                if *e < 0 && base.is_zero() {
                    return Err(SymbolicError::DivisionByZero);
                }
                let p = num_traits::pow(base, e.unsigned_abs() as usize);
                if *e < 0 {
                    p.recip()
                } else {
                    p
                }
            }
            Expr::Div(a, b) => {
                let d = b.evaluate_with(point)?;
                if d.is_zero() {
                    return Err(SymbolicError::DivisionByZero);
                }
                a.evaluate_with(point)? / d
            }
        })
    }

    /// Floating-point evaluation; division by zero yields an IEEE
    /// infinity or NaN.
    pub fn eval_f64(&self, point: &dyn Fn(Symbol) -> f64) -> f64 {
        match self {
            Expr::Const(c) => rational_to_f64(c),
            Expr::Sym(s) => point(*s),
            Expr::Add(xs) => xs.iter().map(|x| x.eval_f64(point)).sum(),
            Expr::Mul(xs) => xs.iter().map(|x| x.eval_f64(point)).product(),
            Expr::Neg(a) => -a.eval_f64(point),
            Expr::Pow(a, e) => a.eval_f64(point).powi(*e as i32),
            Expr::Div(a, b) => a.eval_f64(point) / b.eval_f64(point),
        }
    }

    /// Convert to the canonical rational function.
    pub fn to_rational(&self) -> Result<RationalFunction, SymbolicError> {
        Ok(match self {
            Expr::Const(c) => RationalFunction::constant(c.clone()),
            Expr::Sym(s) => RationalFunction::var(*s),
            Expr::Add(xs) => {
                // sum polynomial parts without intermediate gcds
                let mut poly = Poly::zero();
                let mut acc = RationalFunction::zero();
                for x in xs {
                    let r = x.to_rational()?;
                    if r.is_polynomial() {
                        poly = poly.add(r.numerator());
                    } else {
                        acc = acc.add(&r);
                    }
                }
                acc.add(&RationalFunction::from_poly(poly))
            }
            Expr::Mul(xs) => {
                let mut acc = RationalFunction::one();
                for x in xs {
                    acc = acc.mul(&x.to_rational()?);
                }
                acc
            }
            Expr::Neg(a) => a.to_rational()?.neg(),
            Expr::Pow(a, e) => a.to_rational()?.powi(*e)?,
            Expr::Div(a, b) => a.to_rational()?.div(&b.to_rational()?)?,
        })
    }

    /// Rebuild the canonical tree of a rational function: terms in
    /// descending graded-lexicographic order, factors in variable order,
    /// unit coefficients elided, negative coefficients as `Neg`.
    pub fn from_rational(r: &RationalFunction) -> Expr {
        let num = poly_to_expr(r.numerator());
        if r.is_polynomial() {
            num
        } else {
            Expr::Div(Box::new(num), Box::new(poly_to_expr(r.denominator())))
        }
    }

    /// Render with the variable names of `bundle`.
    pub fn display<'a>(&'a self, bundle: &'a BundleSpec) -> super::print::Displayed<'a> {
        super::print::Displayed { expr: self, bundle }
    }

    pub fn to_text(&self, bundle: &BundleSpec) -> String {
        self.display(bundle).to_string()
    }
}

pub(crate) fn rational_to_f64(c: &BigRational) -> f64 {
    use num_traits::ToPrimitive;
    c.to_f64().unwrap_or(f64::NAN)
}

fn poly_to_expr(p: &Poly) -> Expr {
    let mut terms: Vec<Expr> = p
        .terms_desc()
        .map(|(m, c)| {
            let mut factors = Vec::new();
            let abs = c.abs();
            if !abs.is_one() || m.is_one() {
                factors.push(Expr::Const(abs));
            }
            for &(s, e) in m.powers() {
                let f = Expr::Sym(s);
                factors.push(if e == 1 { f } else { f.pow(i64::from(e)) });
            }
            let term = if factors.len() == 1 {
                factors.pop().expect("one factor")
            } else {
                Expr::Mul(factors)
            };
            if c.is_negative() {
                Expr::Neg(Box::new(term))
            } else {
                term
            }
        })
        .collect();
    match terms.len() {
        0 => Expr::zero(),
        1 => terms.pop().expect("one term"),
        _ => Expr::Add(terms),
    }
}

impl From<Symbol> for Expr {
    fn from(s: Symbol) -> Self {
        Expr::Sym(s)
    }
}

impl From<i64> for Expr {
    fn from(n: i64) -> Self {
        Expr::int(n)
    }
}

impl From<Independent> for Expr {
    fn from(i: Independent) -> Self {
        Expr::Sym(Symbol::Indep(i))
    }
}

impl ops::Add for Expr {
    type Output = Expr;
    fn add(self, rhs: Expr) -> Expr {
        Expr::Add(vec![self, rhs])
    }
}

impl ops::Sub for Expr {
    type Output = Expr;
    fn sub(self, rhs: Expr) -> Expr {
        Expr::Add(vec![self, Expr::Neg(Box::new(rhs))])
    }
}

impl ops::Mul for Expr {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        Expr::Mul(vec![self, rhs])
    }
}

impl ops::Div for Expr {
    type Output = Expr;
    fn div(self, rhs: Expr) -> Expr {
        Expr::Div(Box::new(self), Box::new(rhs))
    }
}

impl ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::Neg(Box::new(self))
    }
}
