//! Reduced rational functions `num / den` with a monic denominator.

use std::collections::{BTreeMap, BTreeSet};

use num_rational::BigRational;
use num_traits::Zero;

use super::bundle::{Independent, Symbol};
use super::poly::{gcd, Poly};
use super::SymbolicError;

/// Canonical rational function: `gcd(num, den) = 1`, `den` monic, and zero
/// is represented as `0 / 1`. Two rational functions are equal as elements
/// of the fraction field iff they are structurally equal.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RationalFunction {
    num: Poly,
    den: Poly,
}

impl RationalFunction {
    pub fn zero() -> Self {
        Self::from_poly(Poly::zero())
    }

    pub fn one() -> Self {
        Self::from_poly(Poly::one())
    }

    pub fn constant(c: BigRational) -> Self {
        Self::from_poly(Poly::constant(c))
    }

    pub fn var(s: Symbol) -> Self {
        Self::from_poly(Poly::var(s))
    }

    pub fn from_poly(p: Poly) -> Self {
        Self {
            num: p,
            den: Poly::one(),
        }
    }

    pub fn new(num: Poly, den: Poly) -> Result<Self, SymbolicError> {
        if den.is_zero() {
            return Err(SymbolicError::DivisionByZero);
        }
        if num.is_zero() {
            return Ok(Self::zero());
        }
        if let Some(c) = den.as_constant() {
            return Ok(Self {
                num: num.scale(&c.recip()),
                den: Poly::one(),
            });
        }
        let g = gcd(&num, &den);
        let (num, den) = if g.is_one() {
            (num, den)
        } else {
            (
                num.div_exact(&g).expect("gcd divides numerator"),
                den.div_exact(&g).expect("gcd divides denominator"),
            )
        };
        let lc = den.leading_coefficient().recip();
        Ok(Self {
            num: num.scale(&lc),
            den: den.scale(&lc),
        })
    }

    pub fn numerator(&self) -> &Poly {
        &self.num
    }

    pub fn denominator(&self) -> &Poly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.is_one()
    }

    pub fn as_constant(&self) -> Option<BigRational> {
        if self.is_polynomial() {
            self.num.as_constant()
        } else {
            None
        }
    }

    pub fn symbols(&self) -> BTreeSet<Symbol> {
        let mut s = self.num.symbols();
        s.extend(self.den.symbols());
        s
    }

    /// `num / den` for coprime parts, scaled to a monic denominator.
    fn monic_parts(num: Poly, den: Poly) -> Self {
        if num.is_zero() {
            return Self::zero();
        }
        let lc = den.leading_coefficient().recip();
        Self {
            num: num.scale(&lc),
            den: den.scale(&lc),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        if self.den == other.den {
            return Self::new(self.num.add(&other.num), self.den.clone())
                .expect("nonzero denominator");
        }
        // a/b + c/d with g = gcd(b, d): only factors of g can cancel.
        let g = gcd(&self.den, &other.den);
        if g.is_one() {
            let num = self.num.mul(&other.den).add(&other.num.mul(&self.den));
            return Self::monic_parts(num, self.den.mul(&other.den));
        }
        let b = self.den.div_exact(&g).expect("gcd divides");
        let d = other.den.div_exact(&g).expect("gcd divides");
        let num = self.num.mul(&d).add(&other.num.mul(&b));
        if num.is_zero() {
            return Self::zero();
        }
        let h = gcd(&num, &g);
        if h.is_one() {
            return Self::monic_parts(num, b.mul(&other.den));
        }
        let num = num.div_exact(&h).expect("gcd divides");
        let g = g.div_exact(&h).expect("gcd divides");
        Self::monic_parts(num, b.mul(&d).mul(&g))
    }

    pub fn neg(&self) -> Self {
        Self {
            num: self.num.neg(),
            den: self.den.clone(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        if self.is_polynomial() && other.is_polynomial() {
            return Self::from_poly(self.num.mul(&other.num));
        }
        let (an, ad) = cancel(&self.num, &other.den);
        let (bn, bd) = cancel(&other.num, &self.den);
        Self::monic_parts(an.mul(&bn), ad.mul(&bd))
    }

    pub fn recip(&self) -> Result<Self, SymbolicError> {
        Self::new(self.den.clone(), self.num.clone())
    }

    pub fn div(&self, other: &Self) -> Result<Self, SymbolicError> {
        Ok(self.mul(&other.recip()?))
    }

    pub fn powi(&self, e: i64) -> Result<Self, SymbolicError> {
        let base = if e < 0 { self.recip()? } else { self.clone() };
        let n = u32::try_from(e.unsigned_abs())
            .map_err(|_| SymbolicError::ExponentTooLarge(e))?;
        Ok(Self {
            num: base.num.pow(n),
            den: base.den.pow(n),
        })
    }

    pub fn scale(&self, k: &BigRational) -> Self {
        if k.is_zero() {
            return Self::zero();
        }
        Self {
            num: self.num.scale(k),
            den: self.den.clone(),
        }
    }

    /// Formal partial derivative, quotient rule.
    pub fn partial(&self, s: Symbol) -> Self {
        let dn = self.num.partial(s);
        if self.is_polynomial() {
            return Self::from_poly(dn);
        }
        let dd = self.den.partial(s);
        if dd.is_zero() {
            return Self::new(dn, self.den.clone()).expect("nonzero denominator");
        }
        self.quotient_rule(dn, dd)
    }

    /// Total derivative `D_dir = ∂_dir + Σ x^α_{J+dir} ∂/∂x^α_J`.
    pub fn total_derivative(&self, dir: Independent) -> Self {
        let dn = poly_total_derivative(&self.num, dir);
        if self.is_polynomial() {
            return Self::from_poly(dn);
        }
        let dd = poly_total_derivative(&self.den, dir);
        self.quotient_rule(dn, dd)
    }

    /// `(dn·d − n·dd) / d²` reduced. With `g = gcd(d, dd)` the numerator
    /// `dn·(d/g) − n·(dd/g)` can only share factors with `g`.
    fn quotient_rule(&self, dn: Poly, dd: Poly) -> Self {
        let g = gcd(&self.den, &dd);
        if g.is_one() {
            let num = dn.mul(&self.den).sub(&self.num.mul(&dd));
            return Self::monic_parts(num, self.den.mul(&self.den));
        }
        let d = self.den.div_exact(&g).expect("gcd divides");
        let dd = dd.div_exact(&g).expect("gcd divides");
        let num = dn.mul(&d).sub(&self.num.mul(&dd));
        if num.is_zero() {
            return Self::zero();
        }
        let h = gcd(&num, &g);
        if h.is_one() {
            return Self::monic_parts(num, self.den.mul(&d));
        }
        let num = num.div_exact(&h).expect("gcd divides");
        Self::monic_parts(num, self.den.div_exact(&h).expect("gcd divides").mul(&d))
    }

    /// Simultaneous substitution of symbols by rational functions.
    pub fn substitute(&self, rules: &BTreeMap<Symbol, RationalFunction>) -> Result<Self, SymbolicError> {
        if !self.symbols().iter().any(|s| rules.contains_key(s)) {
            return Ok(self.clone());
        }
        let num = substitute_poly(&self.num, rules)?;
        if self.is_polynomial() {
            return Ok(num);
        }
        let den = substitute_poly(&self.den, rules)?;
        num.div(&den)
    }

    pub fn eval_exact(
        &self,
        point: &dyn Fn(Symbol) -> Option<BigRational>,
    ) -> Result<BigRational, SymbolicError> {
        let name = |s: Symbol| SymbolicError::UnassignedSymbol(format!("{s:?}"));
        let n = self.num.eval_exact(point).map_err(name)?;
        let d = self.den.eval_exact(point).map_err(name)?;
        if d.is_zero() {
            return Err(SymbolicError::DivisionByZero);
        }
        Ok(n / d)
    }
}

/// Remove the common factor of `a` and `b`.
fn cancel(a: &Poly, b: &Poly) -> (Poly, Poly) {
    if b.is_one() {
        return (a.clone(), b.clone());
    }
    let g = gcd(a, b);
    if g.is_one() {
        return (a.clone(), b.clone());
    }
    (a.div_exact(&g).expect("gcd divides"), b.div_exact(&g).expect("gcd divides"))
}

fn poly_total_derivative(p: &Poly, dir: Independent) -> Poly {
    let mut acc = p.partial(Symbol::Indep(dir));
    for s in p.symbols() {
        if let Symbol::Jet(c) = s {
            acc = acc.add(&p.partial(s).mul(&Poly::var(Symbol::Jet(c.raised(dir)))));
        }
    }
    acc
}

fn substitute_poly(
    p: &Poly,
    rules: &BTreeMap<Symbol, RationalFunction>,
) -> Result<RationalFunction, SymbolicError> {
    // group terms whose substituted part is a pure polynomial to avoid a gcd
    // per term
    let mut poly_part = Poly::zero();
    let mut acc = RationalFunction::zero();
    for (m, c) in p.terms() {
        let mut kept = Poly::constant(c.clone());
        let mut replaced = RationalFunction::one();
        for &(s, e) in m.powers() {
            match rules.get(&s) {
                Some(r) => replaced = replaced.mul(&r.powi(i64::from(e))?),
                None => kept = kept.mul(&Poly::var(s).pow(e)),
            }
        }
        if replaced.is_polynomial() {
            poly_part = poly_part.add(&kept.mul(replaced.numerator()));
        } else {
            acc = acc.add(&replaced.mul(&RationalFunction::from_poly(kept)));
        }
    }
    Ok(acc.add(&RationalFunction::from_poly(poly_part)))
}

impl From<Poly> for RationalFunction {
    fn from(p: Poly) -> Self {
        Self::from_poly(p)
    }
}

impl Default for RationalFunction {
    fn default() -> Self {
        Self::zero()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x() -> RationalFunction {
        RationalFunction::var(Symbol::jet(0, 0, 0))
    }
    fn xz() -> RationalFunction {
        RationalFunction::var(Symbol::jet(0, 1, 0))
    }

    #[test]
    fn cancellation_is_canonical() {
        let a = xz().div(&x()).unwrap();
        assert!(a.sub(&a).is_zero());
        let b = x().mul(&xz()).div(&x().mul(&x())).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.denominator().leading_coefficient(), BigRational::from_integer(1.into()));
    }

    #[test]
    fn division_by_zero_is_an_error() {
        assert!(matches!(
            x().div(&RationalFunction::zero()),
            Err(SymbolicError::DivisionByZero)
        ));
    }

    #[test]
    fn total_derivative_of_quotient() {
        // D_z(x_z / x) = x_zz / x - x_z^2 / x^2
        let e = xz().div(&x()).unwrap();
        let d = e.total_derivative(Independent::Z);
        let xzz = RationalFunction::var(Symbol::jet(0, 2, 0));
        let expected = xzz
            .div(&x())
            .unwrap()
            .sub(&xz().mul(&xz()).div(&x().mul(&x())).unwrap());
        assert_eq!(d, expected);
    }

    #[test]
    fn repeated_derivatives_stay_reduced() {
        // D_t^k (x_t / (x+2)) has denominator (x+2)^(k+1)
        let two = RationalFunction::constant(BigRational::from_integer(2.into()));
        let xt = RationalFunction::var(Symbol::jet(0, 0, 1));
        let mut e = xt.div(&x().add(&two)).unwrap();
        for k in 1..=3u32 {
            e = e.total_derivative(Independent::T);
            let full = RationalFunction::new(e.numerator().clone(), e.denominator().clone()).unwrap();
            assert_eq!(full, e);
            assert_eq!(e.denominator().degree_in(Symbol::jet(0, 0, 0)), k + 1);
        }
        let sq = x().add(&two).powi(-2).unwrap();
        let sum = sq.add(&x().add(&two).recip().unwrap().neg());
        assert_eq!(sum, x().add(&RationalFunction::one()).neg().mul(&sq));
    }
}
