//! Floating-point evaluation of expressions at grid nodes.

use super::grid::{first_derivative, second_derivative, Difference, FieldState, Grid};
use super::NumericError;
use crate::symbolic::{rational_to_f64, BundleSpec, Expr, RationalFunction, Symbol};

/// Highest `z`-derivative a compiled expression may reference.
pub(crate) const MAX_JZ: u32 = 2;
const SLOTS: usize = MAX_JZ as usize + 1;

/// Values of `z`, `t` and `x^α`, `x^α_z`, `x^α_zz` at one node.
#[derive(Debug, Clone)]
pub(crate) struct NodeJet {
    pub z: f64,
    pub t: f64,
    pub slots: Vec<f64>,
}

impl NodeJet {
    pub fn new(q: usize, z: f64, t: f64) -> Self {
        Self {
            z,
            t,
            slots: vec![0.0; q * SLOTS],
        }
    }

    pub fn set(&mut self, dep: usize, j_z: usize, v: f64) {
        self.slots[dep * SLOTS + j_z] = v;
    }

    /// Jet at node `i` of `state` with the given first-derivative stencil per
    /// dependent variable.
    pub fn at(state: &FieldState, grid: &Grid, i: usize, modes: &[Difference]) -> Self {
        let mut jet = NodeJet::new(state.values.len(), grid.z(i), state.time);
        jet.fill(&state.values, grid, i, modes);
        jet
    }

    pub fn fill(&mut self, values: &[Vec<f64>], grid: &Grid, i: usize, modes: &[Difference]) {
        let dz = grid.dz();
        self.z = grid.z(i);
        for (dep, u) in values.iter().enumerate() {
            self.set(dep, 0, u[i]);
            self.set(dep, 1, first_derivative(u, i, dz, modes[dep]));
            self.set(dep, 2, second_derivative(u, i, dz));
        }
    }
}

#[derive(Debug, Clone)]
enum Node {
    Const(f64),
    Z,
    T,
    Slot(usize),
    Add(Vec<Node>),
    Mul(Vec<Node>),
    Neg(Box<Node>),
    Pow(Box<Node>, i32),
    Div(Box<Node>, Box<Node>),
}

impl Node {
    fn eval(&self, jet: &NodeJet) -> f64 {
        match self {
            Node::Const(c) => *c,
            Node::Z => jet.z,
            Node::T => jet.t,
            Node::Slot(k) => jet.slots[*k],
            Node::Add(xs) => xs.iter().map(|x| x.eval(jet)).sum(),
            Node::Mul(xs) => xs.iter().map(|x| x.eval(jet)).product(),
            Node::Neg(a) => -a.eval(jet),
            Node::Pow(a, e) => a.eval(jet).powi(*e),
            Node::Div(a, b) => a.eval(jet) / b.eval(jet),
        }
    }
}

/// An expression in `z`, `t` and `z`-derivatives of order at most two.
#[derive(Debug, Clone)]
pub(crate) struct Compiled {
    root: Node,
}

impl Compiled {
    pub fn new(e: &Expr, bundle: &BundleSpec) -> Result<Self, NumericError> {
        Ok(Self {
            root: build(e, bundle)?,
        })
    }

    pub fn eval(&self, jet: &NodeJet) -> f64 {
        self.root.eval(jet)
    }
}

fn build(e: &Expr, bundle: &BundleSpec) -> Result<Node, NumericError> {
    let all = |xs: &[Expr]| xs.iter().map(|x| build(x, bundle)).collect::<Result<Vec<_>, _>>();
    Ok(match e {
        Expr::Const(c) => Node::Const(rational_to_f64(c)),
        Expr::Sym(Symbol::Z) => Node::Z,
        Expr::Sym(Symbol::T) => Node::T,
        Expr::Sym(s @ Symbol::Jet(c)) => {
            if c.index.j_t > 0 || c.index.j_z > MAX_JZ {
                return Err(NumericError::Unsupported(format!(
                    "{} cannot be evaluated on a grid state (only z-derivatives up to order {MAX_JZ})",
                    bundle.symbol_name(*s)
                )));
            }
            Node::Slot(c.dep * SLOTS + c.index.j_z as usize)
        }
        Expr::Add(xs) => Node::Add(all(xs)?),
        Expr::Mul(xs) => Node::Mul(all(xs)?),
        Expr::Neg(a) => Node::Neg(Box::new(build(a, bundle)?)),
        Expr::Pow(a, k) => {
            let k = i32::try_from(*k)
                .map_err(|_| NumericError::Unsupported(format!("exponent {k} out of range")))?;
            Node::Pow(Box::new(build(a, bundle)?), k)
        }
        Expr::Div(a, b) => Node::Div(Box::new(build(a, bundle)?), Box::new(build(b, bundle)?)),
    })
}

/// A rational expression compiled as numerator and denominator, so that a
/// vanishing denominator can be detected before dividing.
#[derive(Debug, Clone)]
pub(crate) struct CompiledFraction {
    pub num: Compiled,
    pub den: Compiled,
    pub constant_den: bool,
}

impl CompiledFraction {
    pub fn new(e: &Expr, bundle: &BundleSpec) -> Result<Self, NumericError> {
        let r = e.to_rational()?;
        let constant_den = r.denominator().is_constant();
        Ok(Self {
            num: Compiled::new(&Expr::from_rational(&RationalFunction::from_poly(r.numerator().clone())), bundle)?,
            den: Compiled::new(&Expr::from_rational(&RationalFunction::from_poly(r.denominator().clone())), bundle)?,
            constant_den,
        })
    }

    /// `None` when `|den| ≤ threshold` for a nonconstant denominator.
    pub fn eval_guarded(&self, jet: &NodeJet, threshold: f64) -> Option<f64> {
        let d = self.den.eval(jet);
        if !self.constant_den && d.abs() <= threshold {
            return None;
        }
        Some(self.num.eval(jet) / d)
    }
}
