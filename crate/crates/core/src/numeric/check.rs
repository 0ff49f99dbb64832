use num_rational::BigRational;
use serde::Serialize;

use super::compiled::{Compiled, NodeJet};
use super::flow::flow;
use super::grid::{Difference, FieldState, Grid};
use super::system::{check_state, reduced, CompiledSystem};
use super::NumericError;
use crate::analysis::{reduced_output_derivative, SystemDefinition};
use crate::fields::GeneralizedVectorField;
use crate::symbolic::Expr;

/// Where a finite-difference Lie derivative check is evaluated.
#[derive(Debug, Clone, PartialEq)]
pub enum CheckSite {
    /// Every interior grid node.
    Interior,
    /// A single node, e.g. an output location.
    At(BigRational),
}

/// Comparison of `(c(exp(εv)x) − c(exp(−εv)x)) / 2ε` with the reduced Lie
/// derivative `L_{pr v_Q} c` evaluated on the grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FdLieCheck {
    pub epsilon: f64,
    pub dz: f64,
    pub z_values: Vec<f64>,
    pub finite_difference: Vec<f64>,
    pub analytic: Vec<f64>,
    pub max_abs_error: f64,
    /// `max(1, max|analytic|)`.
    pub scale: f64,
    pub relative_error: f64,
}

#[allow(clippy::too_many_arguments)]
pub fn finite_difference_lie_check(
    sys: &SystemDefinition,
    v: &GeneralizedVectorField,
    c: &Expr,
    site: &CheckSite,
    state: &FieldState,
    grid: &Grid,
    epsilon: f64,
    d_eps: Option<f64>,
) -> Result<FdLieCheck, NumericError> {
    if !(epsilon > 0.0) {
        return Err(NumericError::InvalidArgument(format!("epsilon {epsilon} must be positive")));
    }
    let cs = CompiledSystem::new(sys)?;
    check_state(state, grid, cs.q())?;
    let value = Compiled::new(&reduced(sys, c)?, &cs.bundle)?;
    let lie = Compiled::new(&reduced_output_derivative(sys, v, c)?, &cs.bundle)?;

    let nodes: Vec<usize> = match site {
        CheckSite::Interior => (1..grid.n() - 1).collect(),
        CheckSite::At(z) => vec![grid
            .node_at(z)
            .ok_or_else(|| NumericError::InvalidGrid(format!("z = {z} is not a grid node")))?],
    };
    let plus = flow(sys, v, state, grid, epsilon, d_eps)?.transformed;
    let minus = flow(sys, v, state, grid, -epsilon, d_eps)?.transformed;

    let central = vec![Difference::Central; cs.q()];
    let mut out = FdLieCheck {
        epsilon,
        dz: grid.dz(),
        z_values: Vec::with_capacity(nodes.len()),
        finite_difference: Vec::with_capacity(nodes.len()),
        analytic: Vec::with_capacity(nodes.len()),
        max_abs_error: 0.0,
        scale: 1.0,
        relative_error: 0.0,
    };
    for &i in &nodes {
        let fd = (value.eval(&NodeJet::at(&plus, grid, i, &central))
            - value.eval(&NodeJet::at(&minus, grid, i, &central)))
            / (2.0 * epsilon);
        let exact = lie.eval(&NodeJet::at(state, grid, i, &central));
        out.z_values.push(grid.z(i));
        out.finite_difference.push(fd);
        out.analytic.push(exact);
        let err = (fd - exact).abs();
        out.max_abs_error = if err.is_nan() { f64::NAN } else { out.max_abs_error.max(err) };
        out.scale = out.scale.max(exact.abs());
    }
    out.relative_error = out.max_abs_error / out.scale;
    Ok(out)
}
