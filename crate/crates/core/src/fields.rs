//! Generalized vector fields, evolutionary forms, prolongations and Lie
//! derivatives of jet-space functions.
//!
//! A generalized vector field `v = v_z ∂_z + v_t ∂_t + v_x^α ∂_{x^α}` has the
//! evolutionary form `v_Q = Q^α ∂_{x^α}` with
//! `Q^α = v_x^α − v_z x^α_z − v_t x^α_t`. The prolongation of `v_Q` has
//! coefficient `D_J Q^α` at `x^α_J`, and the prolongation of `v` splits as
//! `pr v = pr v_Q + v_z D_z + v_t D_t`. Both Lie derivatives are computed
//! through that decomposition.

use std::collections::BTreeMap;

use crate::symbolic::{
    BundleSpec, Expr, Independent, JetCoordinate, MultiIndex, RationalFunction, Symbol,
    SymbolicError,
};

#[derive(Debug, Clone, PartialEq)]
pub struct GeneralizedVectorField {
    pub v_z: Expr,
    pub v_t: Expr,
    pub v_x: Vec<Expr>,
}

impl GeneralizedVectorField {
    pub fn new(v_z: Expr, v_t: Expr, v_x: Vec<Expr>) -> Self {
        Self { v_z, v_t, v_x }
    }

    pub fn vertical(v_x: Vec<Expr>) -> Self {
        Self::new(Expr::zero(), Expr::zero(), v_x)
    }

    pub fn zero(q: usize) -> Self {
        Self::vertical(vec![Expr::zero(); q])
    }

    pub fn is_vertical(&self) -> bool {
        crate::symbolic::is_identically_zero(&self.v_z) && crate::symbolic::is_identically_zero(&self.v_t)
    }

    /// True when every component vanishes identically.
    pub fn is_zero(&self) -> bool {
        self.is_vertical() && self.v_x.iter().all(crate::symbolic::is_identically_zero)
    }

    /// `Q^α = v_x^α − v_z x^α_z − v_t x^α_t`, normalized.
    pub fn evolutionary_form(&self) -> Result<EvolutionaryField, SymbolicError> {
        let characteristics = self
            .v_x
            .iter()
            .enumerate()
            .map(|(alpha, vx)| {
                let q = vx.clone()
                    - self.v_z.clone() * Expr::jet(alpha, 1, 0)
                    - self.v_t.clone() * Expr::jet(alpha, 0, 1);
                q.normalized()
            })
            .collect::<Result<_, _>>()?;
        Ok(EvolutionaryField { characteristics })
    }

    pub fn to_text(&self, bundle: &BundleSpec) -> String {
        let mut s = format!(
            "{} d/d{} + {} d/d{}",
            self.v_z.to_text(bundle),
            bundle.independent_name(Independent::Z),
            self.v_t.to_text(bundle),
            bundle.independent_name(Independent::T),
        );
        for (alpha, vx) in self.v_x.iter().enumerate() {
            s.push_str(&format!(" + {} d/d{}", vx.to_text(bundle), bundle.dependent_names()[alpha]));
        }
        s
    }
}

/// Vertical generalized vector field `Q^α ∂_{x^α}`.
#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionaryField {
    pub characteristics: Vec<Expr>,
}

impl EvolutionaryField {
    pub fn new(characteristics: Vec<Expr>) -> Self {
        Self { characteristics }
    }

    pub fn is_zero(&self) -> bool {
        self.characteristics.iter().all(crate::symbolic::is_identically_zero)
    }
}

/// Either kind of field, borrowed.
#[derive(Debug, Clone, Copy)]
pub enum FieldRef<'a> {
    Evolutionary(&'a EvolutionaryField),
    General(&'a GeneralizedVectorField),
}

impl<'a> From<&'a EvolutionaryField> for FieldRef<'a> {
    fn from(f: &'a EvolutionaryField) -> Self {
        FieldRef::Evolutionary(f)
    }
}

impl<'a> From<&'a GeneralizedVectorField> for FieldRef<'a> {
    fn from(f: &'a GeneralizedVectorField) -> Self {
        FieldRef::General(f)
    }
}

/// Rational-function form of a field, with memoized prolongation
/// coefficients.
pub(crate) struct Generator {
    characteristics: Vec<RationalFunction>,
    horizontal: Option<(RationalFunction, RationalFunction)>,
    coefficients: BTreeMap<JetCoordinate, RationalFunction>,
}

impl Generator {
    pub(crate) fn new(f: FieldRef<'_>) -> Result<Self, SymbolicError> {
        let (characteristics, horizontal) = match f {
            FieldRef::Evolutionary(e) => (e.characteristics.clone(), None),
            FieldRef::General(v) => {
                let h = if v.is_vertical() {
                    None
                } else {
                    Some((v.v_z.to_rational()?, v.v_t.to_rational()?))
                };
                (v.evolutionary_form()?.characteristics, h)
            }
        };
        Ok(Self {
            characteristics: characteristics
                .iter()
                .map(Expr::to_rational)
                .collect::<Result<_, _>>()?,
            horizontal,
            coefficients: BTreeMap::new(),
        })
    }

    /// `D_J Q^α`, built recursively from the next-lower coefficient.
    pub(crate) fn coefficient(&mut self, c: JetCoordinate) -> RationalFunction {
        if let Some(r) = self.coefficients.get(&c) {
            return r.clone();
        }
        let r = match (c.index.lowered(Independent::Z), c.index.lowered(Independent::T)) {
            (Some(lower), _) => self
                .coefficient(JetCoordinate { dep: c.dep, index: lower })
                .total_derivative(Independent::Z),
            (None, Some(lower)) => self
                .coefficient(JetCoordinate { dep: c.dep, index: lower })
                .total_derivative(Independent::T),
            (None, None) => self
                .characteristics
                .get(c.dep)
                .cloned()
                .unwrap_or_else(RationalFunction::zero),
        };
        self.coefficients.insert(c, r.clone());
        r
    }

    /// Lie derivative along the prolonged field.
    pub(crate) fn lie_derivative(&mut self, e: &RationalFunction) -> RationalFunction {
        let mut acc = RationalFunction::zero();
        for s in e.symbols() {
            if let Symbol::Jet(c) = s {
                let coeff = self.coefficient(c);
                if !coeff.is_zero() {
                    acc = acc.add(&coeff.mul(&e.partial(s)));
                }
            }
        }
        if let Some((vz, vt)) = &self.horizontal {
            if !vz.is_zero() {
                acc = acc.add(&vz.mul(&e.total_derivative(Independent::Z)));
            }
            if !vt.is_zero() {
                acc = acc.add(&vt.mul(&e.total_derivative(Independent::T)));
            }
        }
        acc
    }
}

/// A field prolonged to a finite jet order.
#[derive(Debug, Clone, PartialEq)]
pub struct ProlongedField {
    /// Characteristics of the evolutionary part.
    pub characteristics: Vec<Expr>,
    /// `(v_z, v_t)` for a non-vertical base; these act as `v_z D_z + v_t D_t`.
    pub horizontal: Option<(Expr, Expr)>,
    pub order: u32,
    /// Coefficient of `∂/∂x^α_J` in the evolutionary part, `|J| ≤ order`.
    pub coefficients: BTreeMap<JetCoordinate, Expr>,
}

impl ProlongedField {
    pub fn coefficient(&self, c: JetCoordinate) -> Option<&Expr> {
        self.coefficients.get(&c)
    }
}

/// Prolong to order `order`: the coefficient at `x^α_J` is `D_J Q^α`.
pub fn prolong<'a>(f: impl Into<FieldRef<'a>>, order: u32) -> Result<ProlongedField, SymbolicError> {
    let f = f.into();
    let mut g = Generator::new(f)?;
    let mut coefficients = BTreeMap::new();
    for alpha in 0..g.characteristics.len() {
        for index in MultiIndex::up_to(order) {
            let c = JetCoordinate { dep: alpha, index };
            coefficients.insert(c, g.coefficient(c).to_expr());
        }
    }
    Ok(ProlongedField {
        characteristics: g.characteristics.iter().map(RationalFunction::to_expr).collect(),
        horizontal: g
            .horizontal
            .as_ref()
            .map(|(a, b)| (a.to_expr(), b.to_expr())),
        order,
        coefficients,
    })
}

/// Lie derivative of `e` along the prolongation of `f`, normalized. The
/// prolongation order is the maximal derivative order occurring in `e`.
pub fn lie_derivative<'a>(f: impl Into<FieldRef<'a>>, e: &Expr) -> Result<Expr, SymbolicError> {
    let mut g = Generator::new(f.into())?;
    Ok(g.lie_derivative(&e.to_rational()?).to_expr())
}
