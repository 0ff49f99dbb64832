//! Finite-difference cross-checks: method-of-lines simulation, numerical
//! flow of a symmetry field, and the indistinguishability experiment.
//!
//! Supported systems are evolution equations `x^α_t = R^α` of first order
//! in `z` with boundary conditions at the ends of the interval.

mod check;
mod compiled;
mod experiment;
mod flow;
mod grid;
mod simulate;
mod system;

use thiserror::Error;

use crate::analysis::AnalysisError;
use crate::reduction::ReductionError;
use crate::symbolic::SymbolicError;

pub use check::{finite_difference_lie_check, CheckSite, FdLieCheck};
pub use experiment::{
    indistinguishability_experiment, round12, ExperimentConfig, ExperimentReport, ExperimentVerdict, GridRun,
    MIN_CONVERGENCE_RATIO, OUTPUT_NOISE_FLOOR,
};
pub use flow::{flow, FlowResult, DEFAULT_D_EPS};
pub use grid::{first_derivative, second_derivative, Difference, FieldState, Grid};
pub use simulate::{simulate, stable_time_step, OutputSeries, Trajectory, DENOMINATOR_GUARD};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NumericError {
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error(transparent)]
    Reduction(#[from] ReductionError),
    #[error(transparent)]
    Symbolic(#[from] SymbolicError),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("not an evolution system: {0}")]
    NotEvolutionForm(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("state has shape {found:?}, expected {expected:?} (components, nodes)")]
    ShapeMismatch {
        expected: (usize, usize),
        found: (usize, usize),
    },
    #[error("initial state violates the boundary conditions (residual {residual:e})")]
    InitialBoundaryMismatch { residual: f64 },
    #[error("time step {dt} exceeds the stability limit {max}")]
    StepTooLarge { dt: f64, max: f64 },
    #[error("numerical instability detected at t = {time}")]
    Instability { time: f64 },
    #[error("flow step rejected at epsilon = {epsilon}; try d_eps <= {suggested:e}")]
    StepRejected { epsilon: f64, suggested: f64 },
    #[error("boundary condition could not be imposed: {0}")]
    BoundaryNotSolvable(String),
}

