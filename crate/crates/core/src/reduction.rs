//! Reduction modulo a PDE system in solved form, and restriction to a
//! boundary point.
//!
//! A solved system `x^α_J = R` determines every total derivative of its
//! principal coordinates in terms of non-principal ones. Rewriting an
//! expression with these differential consequences yields a normal form
//! that is zero exactly when the expression vanishes on every formal
//! solution.

use std::collections::{BTreeMap, BTreeSet};

use num_rational::BigRational;
use thiserror::Error;

use crate::symbolic::{
    BundleSpec, Expr, Independent, JetCoordinate, MultiIndex, RationalFunction, Symbol,
    SymbolicError,
};

const MAX_PASSES: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReductionError {
    #[error(transparent)]
    Symbolic(#[from] SymbolicError),
    #[error("principal coordinate {0} is solved for more than once")]
    DuplicatePrincipal(String),
    #[error("circular dependency among principal coordinates at {0}")]
    CircularDependency(String),
    #[error("reduction did not reach a fixed point after {0} passes")]
    NonTermination(usize),
    #[error("boundary condition cannot be solved for {0}")]
    BoundaryNotSolvable(String),
    #[error("boundary conditions at different locations passed to one restriction")]
    MixedBoundaryLocations,
}

fn coord_label(c: JetCoordinate) -> String {
    format!("x{}_({},{})", c.dep + 1, c.index.j_z, c.index.j_t)
}

/// `principal = rhs`, i.e. `Δ = principal − rhs = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct SolvedPde {
    pub principal: JetCoordinate,
    pub rhs: Expr,
}

impl SolvedPde {
    pub fn new(principal: JetCoordinate, rhs: Expr) -> Self {
        Self { principal, rhs }
    }

    /// The function `Δ = principal − rhs` whose zero set is the equation.
    pub fn delta(&self) -> Expr {
        Expr::Sym(Symbol::Jet(self.principal)) - self.rhs.clone()
    }

    /// True when the principal is `x^α_t`, i.e. the equation is an evolution
    /// equation.
    pub fn is_evolution(&self) -> bool {
        self.principal.index == MultiIndex::new(0, 1)
    }
}

/// Spatial domain `(z_min, z_max)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DomainSpec {
    z_min: BigRational,
    z_max: BigRational,
}

impl DomainSpec {
    pub fn new(z_min: BigRational, z_max: BigRational) -> Option<Self> {
        (z_min < z_max).then_some(Self { z_min, z_max })
    }

    pub fn z_min(&self) -> &BigRational {
        &self.z_min
    }

    pub fn z_max(&self) -> &BigRational {
        &self.z_max
    }

    pub fn is_endpoint(&self, z: &BigRational) -> bool {
        *z == self.z_min || *z == self.z_max
    }

    pub fn contains_closed(&self, z: &BigRational) -> bool {
        self.z_min <= *z && *z <= self.z_max
    }
}

/// `Δ_BC = 0` on `z = location`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryCondition {
    pub location: BigRational,
    pub expr: Expr,
    /// Coordinate to solve for; `None` picks the lowest-order one possible.
    pub solve_for: Option<JetCoordinate>,
}

impl BoundaryCondition {
    pub fn new(location: BigRational, expr: Expr) -> Self {
        Self {
            location,
            expr,
            solve_for: None,
        }
    }
}

/// Memoized differential consequences of a solved system.
#[derive(Debug, Clone)]
pub struct SolutionReducer {
    principals: Vec<JetCoordinate>,
    rhs: Vec<RationalFunction>,
    memo: BTreeMap<JetCoordinate, RationalFunction>,
    in_progress: BTreeSet<JetCoordinate>,
}

impl SolutionReducer {
    pub fn new(sys: &[SolvedPde]) -> Result<Self, ReductionError> {
        let mut seen = BTreeSet::new();
        for pde in sys {
            if !seen.insert(pde.principal) {
                return Err(ReductionError::DuplicatePrincipal(coord_label(pde.principal)));
            }
        }
        Ok(Self {
            principals: sys.iter().map(|p| p.principal).collect(),
            rhs: sys
                .iter()
                .map(|p| p.rhs.to_rational())
                .collect::<Result<_, _>>()?,
            memo: BTreeMap::new(),
            in_progress: BTreeSet::new(),
        })
    }

    /// Index of the equation whose principal coordinate `c` descends from.
    fn owner(&self, c: JetCoordinate) -> Option<usize> {
        self.principals.iter().position(|p| p.is_ancestor_of(c))
    }

    pub fn is_principal_descendant(&self, c: JetCoordinate) -> bool {
        self.owner(c).is_some()
    }

    /// Fully reduced value of a principal coordinate or one of its
    /// descendants.
    fn entry(&mut self, c: JetCoordinate) -> Result<RationalFunction, ReductionError> {
        if let Some(r) = self.memo.get(&c) {
            return Ok(r.clone());
        }
        if !self.in_progress.insert(c) {
            return Err(ReductionError::CircularDependency(coord_label(c)));
        }
        let i = self.owner(c).expect("entry requested for a principal descendant");
        let p = self.principals[i];
        let raw = if c == p {
            self.rhs[i].clone()
        } else {
            let dir = if c.index.j_t > p.index.j_t {
                Independent::T
            } else {
                Independent::Z
            };
            let parent = JetCoordinate {
                dep: c.dep,
                index: c.index.lowered(dir).expect("strict descendant"),
            };
            self.entry(parent)?.total_derivative(dir)
        };
        let reduced = self.reduce_rational(&raw)?;
        self.in_progress.remove(&c);
        self.memo.insert(c, reduced.clone());
        Ok(reduced)
    }

    pub(crate) fn reduce_rational(
        &mut self,
        e: &RationalFunction,
    ) -> Result<RationalFunction, ReductionError> {
        let mut cur = e.clone();
        for _ in 0..MAX_PASSES {
            let targets: Vec<JetCoordinate> = cur
                .symbols()
                .into_iter()
                .filter_map(Symbol::as_jet)
                .filter(|c| self.owner(*c).is_some())
                .collect();
            if targets.is_empty() {
                return Ok(cur);
            }
            let mut rules = BTreeMap::new();
            for c in targets {
                rules.insert(Symbol::Jet(c), self.entry(c)?);
            }
            cur = cur.substitute(&rules)?;
        }
        Err(ReductionError::NonTermination(MAX_PASSES))
    }

    /// Normal form of `e` modulo the system and its differential
    /// consequences.
    pub fn reduce(&mut self, e: &Expr) -> Result<Expr, ReductionError> {
        Ok(self.reduce_rational(&e.to_rational()?)?.to_expr())
    }

    /// Make sure every descendant `principal + K` with `|K| ≤ k` is present.
    pub fn extend_to(&mut self, k: u32) -> Result<(), ReductionError> {
        for p in self.principals.clone() {
            for index in MultiIndex::up_to(k) {
                self.entry(JetCoordinate {
                    dep: p.dep,
                    index: p.index.add(index),
                })?;
            }
        }
        Ok(())
    }

    /// The rewrite map computed so far.
    pub fn consequences(&self) -> BTreeMap<JetCoordinate, Expr> {
        self.memo.iter().map(|(c, r)| (*c, r.to_expr())).collect()
    }
}

/// Rewrite map sending every descendant `x^α_{J+K}`, `|K| ≤ order`, of each
/// principal `x^α_J` to its fully reduced value.
pub fn differential_consequences(
    sys: &[SolvedPde],
    order: u32,
) -> Result<BTreeMap<JetCoordinate, Expr>, ReductionError> {
    let mut r = SolutionReducer::new(sys)?;
    r.extend_to(order)?;
    Ok(r.consequences())
}

/// Normal form of `e` on the solution manifold of `sys`.
pub fn reduce_to_normal_form(e: &Expr, sys: &[SolvedPde]) -> Result<Expr, ReductionError> {
    SolutionReducer::new(sys)?.reduce(e)
}

/// A solved boundary relation `coordinate = value` used during restriction.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryRelation {
    pub coordinate: JetCoordinate,
    pub value: Expr,
}

impl BoundaryRelation {
    pub fn to_text(&self, bundle: &BundleSpec) -> String {
        format!(
            "{} = {}",
            bundle.symbol_name(Symbol::Jet(self.coordinate)),
            self.value.to_text(bundle)
        )
    }
}

/// Result of restricting an expression to a boundary point.
#[derive(Debug, Clone, PartialEq)]
pub struct Restriction {
    pub residual: Expr,
    /// Every relation applied, including `D_t`-consequences.
    pub relations: Vec<BoundaryRelation>,
}

struct SolvedBoundary {
    coordinate: JetCoordinate,
    value: RationalFunction,
}

fn solve_linear(d: &RationalFunction, c: JetCoordinate) -> Option<RationalFunction> {
    let num = d.numerator();
    let s = Symbol::Jet(c);
    if num.degree_in(s) != 1 {
        return None;
    }
    let a = num.coefficient_in(s, 1);
    let b = num.coefficient_in(s, 0);
    RationalFunction::from_poly(b.neg())
        .div(&RationalFunction::from_poly(a))
        .ok()
}

fn substitute_location(e: &RationalFunction, z_b: &BigRational) -> Result<RationalFunction, SymbolicError> {
    e.substitute(&BTreeMap::from([(Symbol::Z, RationalFunction::constant(z_b.clone()))]))
}

/// Restrict `e` to `z = z_b` on solutions of `sys` satisfying `bcs`.
///
/// Steps: reduce modulo `sys`; set `z = z_b`; rewrite with each boundary
/// condition solved for one coordinate together with its `D_t`-consequences
/// (tangential derivatives along the boundary); repeat until stable.
pub fn restrict_to_boundary(
    e: &Expr,
    bcs: &[BoundaryCondition],
    sys: &[SolvedPde],
    z_b: &BigRational,
) -> Result<Expr, ReductionError> {
    let mut reducer = SolutionReducer::new(sys)?;
    Ok(restrict_with(&mut reducer, e, bcs, z_b)?.residual)
}

/// As [`restrict_to_boundary`], also returning the relations applied.
pub fn restrict_with(
    reducer: &mut SolutionReducer,
    e: &Expr,
    bcs: &[BoundaryCondition],
    z_b: &BigRational,
) -> Result<Restriction, ReductionError> {
    if bcs.iter().any(|bc| bc.location != *z_b) {
        return Err(ReductionError::MixedBoundaryLocations);
    }
    let solved = solve_boundary_conditions(reducer, bcs, z_b)?;

    let mut cur = substitute_location(&reducer.reduce_rational(&e.to_rational()?)?, z_b)?;
    let mut used: BTreeMap<JetCoordinate, RationalFunction> = BTreeMap::new();
    for _ in 0..MAX_PASSES {
        let mut rules = BTreeMap::new();
        for sb in &solved {
            for c in cur.symbols().into_iter().filter_map(Symbol::as_jet) {
                if c.dep != sb.coordinate.dep
                    || c.index.j_z != sb.coordinate.index.j_z
                    || c.index.j_t < sb.coordinate.index.j_t
                {
                    continue;
                }
                let m = c.index.j_t - sb.coordinate.index.j_t;
                let mut v = sb.value.clone();
                for _ in 0..m {
                    v = v.total_derivative(Independent::T);
                }
                used.insert(c, v.clone());
                rules.insert(Symbol::Jet(c), v);
            }
        }
        if rules.is_empty() {
            return Ok(Restriction {
                residual: cur.to_expr(),
                relations: relations_of(&used),
            });
        }
        let next = cur.substitute(&rules)?;
        cur = substitute_location(&reducer.reduce_rational(&next)?, z_b)?;
    }
    Err(ReductionError::NonTermination(MAX_PASSES))
}

fn relations_of(used: &BTreeMap<JetCoordinate, RationalFunction>) -> Vec<BoundaryRelation> {
    used.iter()
        .map(|(c, v)| BoundaryRelation {
            coordinate: *c,
            value: v.to_expr(),
        })
        .collect()
}

fn solve_boundary_conditions(
    reducer: &mut SolutionReducer,
    bcs: &[BoundaryCondition],
    z_b: &BigRational,
) -> Result<Vec<SolvedBoundary>, ReductionError> {
    let mut out: Vec<SolvedBoundary> = Vec::new();
    for bc in bcs {
        let d = substitute_location(&reducer.reduce_rational(&bc.expr.to_rational()?)?, z_b)?;
        if d.is_zero() {
            continue;
        }
        let taken: BTreeSet<JetCoordinate> = out.iter().map(|s| s.coordinate).collect();
        let candidates: Vec<JetCoordinate> = match bc.solve_for {
            Some(c) => vec![c],
            None => d
                .symbols()
                .into_iter()
                .filter_map(Symbol::as_jet)
                .filter(|c| !taken.contains(c))
                .collect(),
        };
        let found = candidates
            .iter()
            .find_map(|&c| solve_linear(&d, c).map(|value| SolvedBoundary { coordinate: c, value }));
        match found {
            Some(sb) => out.push(sb),
            None => {
                let what = match bc.solve_for {
                    Some(c) => coord_label(c),
                    None => "any jet coordinate".to_string(),
                };
                return Err(ReductionError::BoundaryNotSolvable(what));
            }
        }
    }
    Ok(out)
}

/// Solved relations of `bcs` at `z_b` (without `D_t`-consequences), for
/// reporting.
pub fn boundary_relations(
    bcs: &[BoundaryCondition],
    sys: &[SolvedPde],
    z_b: &BigRational,
) -> Result<Vec<BoundaryRelation>, ReductionError> {
    let mut reducer = SolutionReducer::new(sys)?;
    Ok(solve_boundary_conditions(&mut reducer, bcs, z_b)?
        .into_iter()
        .map(|s| BoundaryRelation {
            coordinate: s.coordinate,
            value: s.value.to_expr(),
        })
        .collect())
}
