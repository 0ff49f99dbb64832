//! Sparse multivariate polynomials over ℚ with a graded-lexicographic
//! monomial order, exact division and gcd.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use num_rational::BigRational;
use num_traits::{One, Zero};

use super::bundle::Symbol;

/// A power product, stored as `(symbol, exponent)` pairs sorted by symbol
/// with positive exponents.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Monomial(Vec<(Symbol, u32)>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(Vec::new())
    }

    pub fn var(s: Symbol) -> Self {
        Monomial(vec![(s, 1)])
    }

    pub fn from_powers(powers: impl IntoIterator<Item = (Symbol, u32)>) -> Self {
        let mut m = Monomial::one();
        for (s, e) in powers {
            m = m.mul(&Monomial::pow_var(s, e));
        }
        m
    }

    fn pow_var(s: Symbol, e: u32) -> Self {
        if e == 0 {
            Monomial::one()
        } else {
            Monomial(vec![(s, e)])
        }
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|(_, e)| e).sum()
    }

    pub fn exponent(&self, s: Symbol) -> u32 {
        self.0
            .iter()
            .find(|(v, _)| *v == s)
            .map_or(0, |(_, e)| *e)
    }

    pub fn powers(&self) -> &[(Symbol, u32)] {
        &self.0
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let mut out = Vec::with_capacity(self.0.len() + other.0.len());
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() && j < other.0.len() {
            let (a, ea) = self.0[i];
            let (b, eb) = other.0[j];
            match a.cmp(&b) {
                Ordering::Less => {
                    out.push((a, ea));
                    i += 1;
                }
                Ordering::Greater => {
                    out.push((b, eb));
                    j += 1;
                }
                Ordering::Equal => {
                    out.push((a, ea + eb));
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&self.0[i..]);
        out.extend_from_slice(&other.0[j..]);
        Monomial(out)
    }

    /// `self / other` if `other` divides `self`.
    pub fn div(&self, other: &Monomial) -> Option<Monomial> {
        let mut out = Vec::with_capacity(self.0.len());
        let mut j = 0;
        for &(s, e) in &self.0 {
            if j < other.0.len() && other.0[j].0 < s {
                return None;
            }
            if j < other.0.len() && other.0[j].0 == s {
                let f = other.0[j].1;
                j += 1;
                match e.cmp(&f) {
                    Ordering::Less => return None,
                    Ordering::Equal => {}
                    Ordering::Greater => out.push((s, e - f)),
                }
            } else {
                out.push((s, e));
            }
        }
        if j < other.0.len() {
            return None;
        }
        Some(Monomial(out))
    }

    /// Remove `s` from the monomial, returning its exponent.
    fn split_off(&self, s: Symbol) -> (u32, Monomial) {
        let mut e = 0;
        let rest = self
            .0
            .iter()
            .filter(|(v, f)| {
                if *v == s {
                    e = *f;
                    false
                } else {
                    true
                }
            })
            .copied()
            .collect();
        (e, Monomial(rest))
    }
}

impl Ord for Monomial {
    /// Graded lexicographic: higher total degree is greater; ties are broken
    /// by the exponent of the earliest variable where the two differ.
    fn cmp(&self, other: &Self) -> Ordering {
        match self.degree().cmp(&other.degree()) {
            Ordering::Equal => {}
            ord => return ord,
        }
        for (a, b) in self.0.iter().zip(other.0.iter()) {
            if a.0 != b.0 {
                // the monomial containing the earlier variable is larger
                return if a.0 < b.0 {
                    Ordering::Greater
                } else {
                    Ordering::Less
                };
            }
            if a.1 != b.1 {
                return a.1.cmp(&b.1);
            }
        }
        self.0.len().cmp(&other.0.len())
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Polynomial with rational coefficients. Terms are kept in a `BTreeMap`
/// keyed by monomial, so iteration runs from the smallest to the leading
/// term.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Poly {
    terms: BTreeMap<Monomial, BigRational>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly::default()
    }

    pub fn one() -> Self {
        Poly::constant(BigRational::one())
    }

    pub fn constant(c: BigRational) -> Self {
        let mut p = Poly::zero();
        if !c.is_zero() {
            p.terms.insert(Monomial::one(), c);
        }
        p
    }

    pub fn var(s: Symbol) -> Self {
        Poly::term(BigRational::one(), Monomial::var(s))
    }

    pub fn term(c: BigRational, m: Monomial) -> Self {
        let mut p = Poly::zero();
        if !c.is_zero() {
            p.terms.insert(m, c);
        }
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1
            && self
                .terms
                .iter()
                .next()
                .is_some_and(|(m, c)| m.is_one() && c.is_one())
    }

    /// The constant value, if the polynomial has no variables.
    pub fn as_constant(&self) -> Option<BigRational> {
        match self.terms.len() {
            0 => Some(BigRational::zero()),
            1 => {
                let (m, c) = self.terms.iter().next()?;
                m.is_one().then(|| c.clone())
            }
            _ => None,
        }
    }

    pub fn is_constant(&self) -> bool {
        self.as_constant().is_some()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms from the leading (largest) monomial downwards.
    pub fn terms_desc(&self) -> impl Iterator<Item = (&Monomial, &BigRational)> {
        self.terms.iter().rev()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &BigRational)> {
        self.terms.iter()
    }

    pub fn leading(&self) -> Option<(&Monomial, &BigRational)> {
        self.terms.iter().next_back()
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    pub fn symbols(&self) -> BTreeSet<Symbol> {
        self.terms
            .keys()
            .flat_map(|m| m.0.iter().map(|(s, _)| *s))
            .collect()
    }

    fn add_term(&mut self, m: Monomial, c: BigRational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let sum = o.get() + c;
                if sum.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = sum;
                }
            }
        }
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), -c.clone());
        }
        out
    }

    pub fn neg(&self) -> Poly {
        Poly {
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.clone(), -c.clone()))
                .collect(),
        }
    }

    pub fn scale(&self, k: &BigRational) -> Poly {
        if k.is_zero() {
            return Poly::zero();
        }
        Poly {
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.clone(), c * k))
                .collect(),
        }
    }

    fn mul_term(&self, m: &Monomial, k: &BigRational) -> Poly {
        Poly {
            terms: self
                .terms
                .iter()
                .map(|(n, c)| (n.mul(m), c * k))
                .collect(),
        }
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let (small, large) = if self.len() <= other.len() {
            (self, other)
        } else {
            (other, self)
        };
        let mut out = Poly::zero();
        for (m, c) in &small.terms {
            for (n, d) in &large.terms {
                out.add_term(m.mul(n), c * d);
            }
        }
        out
    }

    pub fn pow(&self, mut e: u32) -> Poly {
        let mut base = self.clone();
        let mut acc = Poly::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// Formal partial derivative.
    pub fn partial(&self, s: Symbol) -> Poly {
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            let (e, rest) = m.split_off(s);
            if e > 0 {
                let m2 = rest.mul(&Monomial::pow_var(s, e - 1));
                out.add_term(m2, c * BigRational::from_integer(e.into()));
            }
        }
        out
    }

    pub fn degree_in(&self, s: Symbol) -> u32 {
        self.terms.keys().map(|m| m.exponent(s)).max().unwrap_or(0)
    }

    /// Coefficients of `self` viewed as a univariate polynomial in `s`,
    /// indexed by exponent.
    pub fn coefficients_in(&self, s: Symbol) -> Vec<Poly> {
        let mut out = vec![Poly::zero(); self.degree_in(s) as usize + 1];
        for (m, c) in &self.terms {
            let (e, rest) = m.split_off(s);
            out[e as usize].add_term(rest, c.clone());
        }
        out
    }

    pub fn coefficient_in(&self, s: Symbol, e: u32) -> Poly {
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            let (f, rest) = m.split_off(s);
            if f == e {
                out.add_term(rest, c.clone());
            }
        }
        out
    }

    /// Exact division; `None` when `divisor` does not divide `self`.
    pub fn div_exact(&self, divisor: &Poly) -> Option<Poly> {
        let (lm, lc) = divisor.leading()?;
        if let Some(c) = divisor.as_constant() {
            return Some(self.scale(&c.recip()));
        }
        let mut rem = self.clone();
        let mut quot = Poly::zero();
        while let Some((m, c)) = rem.leading() {
            let qm = m.div(lm)?;
            let qc = c / lc;
            rem = rem.sub(&divisor.mul_term(&qm, &qc));
            quot.add_term(qm, qc);
        }
        Some(quot)
    }

    /// Scale so that the leading coefficient is 1.
    pub fn monic(&self) -> Poly {
        match self.leading() {
            Some((_, c)) => self.scale(&c.recip()),
            None => Poly::zero(),
        }
    }

    pub fn leading_coefficient(&self) -> BigRational {
        self.leading()
            .map_or_else(BigRational::zero, |(_, c)| c.clone())
    }

    pub fn map_coefficients(&self, f: impl Fn(&BigRational) -> BigRational) -> Poly {
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            out.add_term(m.clone(), f(c));
        }
        out
    }

    /// Evaluate with an exact assignment; symbols missing from `point`
    /// produce `Err(symbol)`.
    pub fn eval_exact(
        &self,
        point: &dyn Fn(Symbol) -> Option<BigRational>,
    ) -> Result<BigRational, Symbol> {
        let mut acc = BigRational::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for &(s, e) in m.powers() {
                let v = point(s).ok_or(s)?;
                t *= num_traits::pow(v, e as usize);
            }
            acc += t;
        }
        Ok(acc)
    }
}

/// Greatest common divisor, normalized to be monic (and `0` only when both
/// inputs are zero).
pub fn gcd(a: &Poly, b: &Poly) -> Poly {
    if a.is_zero() {
        return b.monic();
    }
    if b.is_zero() {
        return a.monic();
    }
    if a.is_constant() || b.is_constant() {
        return Poly::one();
    }
    if a == b {
        return a.monic();
    }
    // degree bounds from univariate images; most gcds met in practice are
    // trivial and are settled here
    let sa = a.symbols();
    let sb = b.symbols();
    let mut main: Option<(Symbol, u32)> = None;
    for &v in sa.intersection(&sb) {
        let bound = degree_bound(a, b, v).unwrap_or_else(|| a.degree_in(v).min(b.degree_in(v)));
        if bound > 0 && main.is_none_or(|(_, d)| bound < d) {
            main = Some((v, bound));
        }
    }
    let Some((v, bound)) = main else {
        return Poly::one();
    };
    // a variable appearing in exactly one operand can be removed by taking
    // the content with respect to it
    if let Some(&w) = sa.symmetric_difference(&sb).next() {
        return if sa.contains(&w) {
            gcd(&content(a, w), b)
        } else {
            gcd(a, &content(b, w))
        };
    }
    let (small, large) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    if bound == small.degree_in(v) && large.div_exact(small).is_some() {
        return small.monic();
    }
    let (ca, pa) = content_and_primitive(a, v);
    let (cb, pb) = content_and_primitive(b, v);
    let c = gcd(&ca, &cb);
    let g = primitive_prs_gcd(pa, pb, v);
    c.mul(&g).monic()
}

/// Upper bound for `deg_v gcd(a, b)`: the degree of the gcd of univariate
/// images under an integer specialization of the other variables that keeps
/// both leading coefficients in `v`. `None` if no such point was found.
fn degree_bound(a: &Poly, b: &Poly, v: Symbol) -> Option<u32> {
    const VALUES: [i64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    let others: Vec<Symbol> = a.symbols().union(&b.symbols()).copied().filter(|s| *s != v).collect();
    for attempt in 0..4 {
        let point: BTreeMap<Symbol, BigRational> = others
            .iter()
            .enumerate()
            .map(|(i, s)| {
                let k = VALUES[(i * 5 + attempt * 7) % VALUES.len()];
                let sign = if (i + attempt) % 2 == 0 { 1 } else { -1 };
                (*s, BigRational::from_integer((sign * k).into()))
            })
            .collect();
        let ua = specialize(a, v, &point);
        let ub = specialize(b, v, &point);
        if ua.len() as u32 != a.degree_in(v) + 1 || ub.len() as u32 != b.degree_in(v) + 1 {
            continue;
        }
        return Some(univariate_gcd_degree(ua, ub));
    }
    None
}

/// Coefficients (by degree in `v`, trailing zeros trimmed) of `p` with every
/// other variable replaced by its value in `point`.
fn specialize(p: &Poly, v: Symbol, point: &BTreeMap<Symbol, BigRational>) -> Vec<BigRational> {
    let mut out = vec![BigRational::zero(); p.degree_in(v) as usize + 1];
    for (m, c) in &p.terms {
        let mut val = c.clone();
        let mut e_v = 0;
        for &(s, e) in m.powers() {
            if s == v {
                e_v = e;
            } else {
                val *= num_traits::pow(point[&s].clone(), e as usize);
            }
        }
        out[e_v as usize] += val;
    }
    trim(&mut out);
    out
}

fn trim(p: &mut Vec<BigRational>) {
    while p.last().is_some_and(Zero::is_zero) {
        p.pop();
    }
}

fn univariate_gcd_degree(mut a: Vec<BigRational>, mut b: Vec<BigRational>) -> u32 {
    if a.len() < b.len() {
        std::mem::swap(&mut a, &mut b);
    }
    while !b.is_empty() {
        // a mod b
        let lb = b.last().expect("nonempty").clone();
        while a.len() >= b.len() && !a.is_empty() {
            let shift = a.len() - b.len();
            let f = a.last().expect("nonempty").clone() / &lb;
            for (i, c) in b.iter().enumerate() {
                a[i + shift] -= &f * c;
            }
            a.pop();
            trim(&mut a);
        }
        std::mem::swap(&mut a, &mut b);
    }
    a.len().saturating_sub(1) as u32
}

/// Gcd of the coefficients of `p` viewed as a polynomial in `v`.
fn content(p: &Poly, v: Symbol) -> Poly {
    let mut acc = Poly::zero();
    for coeff in p.coefficients_in(v) {
        if coeff.is_zero() {
            continue;
        }
        acc = gcd(&acc, &coeff);
        if acc.is_one() {
            break;
        }
    }
    acc
}

fn content_and_primitive(p: &Poly, v: Symbol) -> (Poly, Poly) {
    let c = content(p, v);
    let pp = p.div_exact(&c).expect("content divides polynomial");
    (c, pp)
}

/// Pseudo-remainder of `a` by `b` as univariate polynomials in `v`.
fn pseudo_remainder(a: &Poly, b: &Poly, v: Symbol) -> Poly {
    let db = b.degree_in(v);
    let lb = b.coefficient_in(v, db);
    let mut r = a.clone();
    while !r.is_zero() {
        let dr = r.degree_in(v);
        if dr < db {
            break;
        }
        let lr = r.coefficient_in(v, dr);
        let shift = Poly::term(BigRational::one(), Monomial::pow_var(v, dr - db));
        r = r.mul(&lb).sub(&lr.mul(&shift).mul(b));
    }
    r
}

/// Gcd of two polynomials that are primitive with respect to `v`.
fn primitive_prs_gcd(a: Poly, b: Poly, v: Symbol) -> Poly {
    let (mut r0, mut r1) = if a.degree_in(v) >= b.degree_in(v) {
        (a, b)
    } else {
        (b, a)
    };
    loop {
        if r1.is_zero() {
            return r0.monic();
        }
        if r1.degree_in(v) == 0 {
            // primitive inputs share no factor free of `v`
            return Poly::one();
        }
        let r = pseudo_remainder(&r0, &r1, v);
        let r = if r.is_zero() {
            r
        } else {
            content_and_primitive(&r, v).1
        };
        r0 = r1;
        r1 = r;
    }
}
