//! Truncated bivariate power series in `σ = z − z0`, `τ = t − t0` with exact
//! rational coefficients. Used to build jets of genuine solutions and of
//! arbitrary functions without going through the library's own calculus.

use std::collections::BTreeMap;

use jetsym::symbolic::{Expr, JetCoordinate, Symbol};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

pub type Q = BigRational;

pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn qf(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

fn factorial(n: u32) -> Q {
    (1..=n as i64).fold(Q::one(), |acc, k| acc * q(k))
}

/// Coefficients `c[i][j]` of `σ^i τ^j` for `i ≤ ms`, `j ≤ mt`.
#[derive(Clone, Debug)]
pub struct Series {
    pub ms: usize,
    pub mt: usize,
    pub c: Vec<Vec<Q>>,
}

impl Series {
    pub fn zero(ms: usize, mt: usize) -> Self {
        Self {
            ms,
            mt,
            c: vec![vec![Q::zero(); mt + 1]; ms + 1],
        }
    }

    pub fn constant(v: Q, ms: usize, mt: usize) -> Self {
        let mut s = Self::zero(ms, mt);
        s.c[0][0] = v;
        s
    }

    /// `v0 + σ` (for `which = 0`) or `v0 + τ`.
    pub fn coordinate(v0: Q, which: usize, ms: usize, mt: usize) -> Self {
        let mut s = Self::constant(v0, ms, mt);
        if which == 0 && ms >= 1 {
            s.c[1][0] = Q::one();
        } else if which == 1 && mt >= 1 {
            s.c[0][1] = Q::one();
        }
        s
    }

    pub fn add(&self, o: &Series) -> Series {
        let mut s = self.clone();
        for i in 0..=self.ms {
            for j in 0..=self.mt {
                s.c[i][j] += &o.c[i][j];
            }
        }
        s
    }

    pub fn neg(&self) -> Series {
        let mut s = self.clone();
        for row in &mut s.c {
            for v in row {
                *v = -v.clone();
            }
        }
        s
    }

    pub fn mul(&self, o: &Series) -> Series {
        let mut s = Series::zero(self.ms, self.mt);
        for i in 0..=self.ms {
            for j in 0..=self.mt {
                if self.c[i][j].is_zero() {
                    continue;
                }
                for k in 0..=(self.ms - i) {
                    for l in 0..=(self.mt - j) {
                        if !o.c[k][l].is_zero() {
                            s.c[i + k][j + l] += &self.c[i][j] * &o.c[k][l];
                        }
                    }
                }
            }
        }
        s
    }

    /// Multiplicative inverse; `None` if the constant term vanishes.
    pub fn recip(&self) -> Option<Series> {
        let a0 = self.c[0][0].clone();
        if a0.is_zero() {
            return None;
        }
        // 1/(a0 + r) = (1/a0) Σ_k (−r/a0)^k; r has no constant term so the
        // sum is finite after truncation.
        let mut r = self.clone();
        r.c[0][0] = Q::zero();
        let u = r.scale(&(-Q::one() / &a0));
        let mut term = Series::constant(Q::one(), self.ms, self.mt);
        let mut acc = term.clone();
        for _ in 0..(self.ms + self.mt) {
            term = term.mul(&u);
            acc = acc.add(&term);
        }
        Some(acc.scale(&(Q::one() / a0)))
    }

    pub fn scale(&self, k: &Q) -> Series {
        let mut s = self.clone();
        for row in &mut s.c {
            for v in row {
                *v *= k;
            }
        }
        s
    }

    /// Partial derivative in `σ` (`dir = 0`) or `τ`; the top degree becomes 0.
    pub fn diff(&self, dir: usize) -> Series {
        let mut s = Series::zero(self.ms, self.mt);
        for i in 0..=self.ms {
            for j in 0..=self.mt {
                if dir == 0 && i < self.ms {
                    s.c[i][j] = &self.c[i + 1][j] * q(i as i64 + 1);
                } else if dir == 1 && j < self.mt {
                    s.c[i][j] = &self.c[i][j + 1] * q(j as i64 + 1);
                }
            }
        }
        s
    }

    /// `∂^{jz}_z ∂^{jt}_t` at the expansion point.
    pub fn derivative_at_origin(&self, jz: u32, jt: u32) -> Q {
        &self.c[jz as usize][jt as usize] * factorial(jz) * factorial(jt)
    }
}

/// Evaluate `e` on the series `x` (one per dependent variable); `z`, `t` map
/// to `z0 + σ`, `t0 + τ`. Returns `None` on division by a series with zero
/// constant term.
pub fn eval_series(e: &Expr, xs: &[Series], z0: &Q, t0: &Q) -> Option<Series> {
    let (ms, mt) = (xs[0].ms, xs[0].mt);
    Some(match e {
        Expr::Const(c) => Series::constant(c.clone(), ms, mt),
        Expr::Sym(Symbol::Z) => Series::coordinate(z0.clone(), 0, ms, mt),
        Expr::Sym(Symbol::T) => Series::coordinate(t0.clone(), 1, ms, mt),
        Expr::Sym(Symbol::Jet(c)) => {
            let mut s = xs[c.dep].clone();
            for _ in 0..c.index.j_z {
                s = s.diff(0);
            }
            for _ in 0..c.index.j_t {
                s = s.diff(1);
            }
            s
        }
        Expr::Add(v) => {
            let mut acc = Series::zero(ms, mt);
            for x in v {
                acc = acc.add(&eval_series(x, xs, z0, t0)?);
            }
            acc
        }
        Expr::Mul(v) => {
            let mut acc = Series::constant(Q::one(), ms, mt);
            for x in v {
                acc = acc.mul(&eval_series(x, xs, z0, t0)?);
            }
            acc
        }
        Expr::Neg(a) => eval_series(a, xs, z0, t0)?.neg(),
        Expr::Pow(a, k) => {
            let base = eval_series(a, xs, z0, t0)?;
            let base = if *k < 0 { base.recip()? } else { base };
            let mut acc = Series::constant(Q::one(), ms, mt);
            for _ in 0..k.unsigned_abs() {
                acc = acc.mul(&base);
            }
            acc
        }
        Expr::Div(a, b) => eval_series(a, xs, z0, t0)?.mul(&eval_series(b, xs, z0, t0)?.recip()?),
    })
}

/// Series solution of the evolution system `x^α_t = rhs[α]` through the
/// point `(z0, t0)` with `x^α(z, t0) = initial[α](z)` (polynomials in `z`),
/// exact for `τ`-degree ≤ `mt` and `σ`-degree ≤ `keep`.
///
/// Coefficients are generated order by order in `τ`: the `τ^m` coefficient
/// of the right-hand side depends only on `τ`-degrees ≤ `m` of `x`.
pub fn solve_evolution(
    rhs: &[Expr],
    initial: &[Expr],
    z0: &Q,
    t0: &Q,
    keep: usize,
    mt: usize,
    z_order: usize,
) -> Solution {
    let ms = keep + (mt + 1) * z_order.max(1);
    let mut xs: Vec<Series> = initial
        .iter()
        .map(|f| {
            let proto = vec![Series::zero(ms, 0)];
            let s = eval_series(f, &proto, z0, t0).expect("polynomial initial data");
            let mut full = Series::zero(ms, mt);
            for i in 0..=ms {
                full.c[i][0] = s.c[i][0].clone();
            }
            full
        })
        .collect();
    for m in 0..mt {
        let rates: Vec<Series> = rhs
            .iter()
            .map(|r| eval_series(r, &xs, z0, t0).expect("right-hand side defined at the point"))
            .collect();
        for (x, r) in xs.iter_mut().zip(&rates) {
            for i in 0..=ms {
                x.c[i][m + 1] = &r.c[i][m] / q(m as i64 + 1);
            }
        }
    }
    Solution { xs, keep, mt }
}

/// Solution series together with the range on which they are exact.
pub struct Solution {
    pub xs: Vec<Series>,
    pub keep: usize,
    pub mt: usize,
}

impl Solution {
    /// Jet values `x^α_J` for `j_z ≤ keep`, `j_t ≤ mt`, plus `z`, `t`.
    pub fn jet_point(&self, z0: &Q, t0: &Q) -> BTreeMap<Symbol, Q> {
        let mut m = BTreeMap::new();
        m.insert(Symbol::Z, z0.clone());
        m.insert(Symbol::T, t0.clone());
        for (dep, x) in self.xs.iter().enumerate() {
            for jz in 0..=self.keep as u32 {
                for jt in 0..=self.mt as u32 {
                    m.insert(
                        Symbol::Jet(JetCoordinate::new(dep, jz, jt)),
                        x.derivative_at_origin(jz, jt),
                    );
                }
            }
        }
        m
    }
}
