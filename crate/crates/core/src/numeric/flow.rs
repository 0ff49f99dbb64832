use super::compiled::{Compiled, NodeJet};
use super::grid::{Difference, FieldState, Grid};
use super::simulate::rk4;
use super::system::{check_state, max_speed, reduced, CompiledSystem};
use super::NumericError;
use crate::analysis::SystemDefinition;
use crate::fields::GeneralizedVectorField;
use crate::symbolic::{partial, Symbol};

/// Result of integrating `∂_ε x = Q(x)` over a grid state.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowResult {
    pub epsilon: f64,
    pub transformed: FieldState,
    pub steps: usize,
    /// Largest correction made when re-imposing the boundary conditions.
    pub bc_defect: f64,
}

/// Characteristics of `v_Q` compiled for the flow, reduced modulo the
/// equations so that only `z`-derivatives remain.
pub(crate) struct CompiledFlow {
    q: Vec<Compiled>,
    speed: Vec<Compiled>,
}

impl CompiledFlow {
    pub fn new(sys: &SystemDefinition, v: &GeneralizedVectorField, cs: &CompiledSystem) -> Result<Self, NumericError> {
        let qd = cs.q();
        if v.v_x.len() != qd {
            return Err(NumericError::InvalidArgument(format!(
                "field has {} dependent components, the system has {qd}",
                v.v_x.len()
            )));
        }
        let vq = v.evolutionary_form()?;
        let mut q = Vec::with_capacity(qd);
        let mut speed = Vec::with_capacity(qd);
        for (dep, ch) in vq.characteristics.iter().enumerate() {
            let r = reduced(sys, ch)?;
            if let Some(c) = r.jet_coordinates().into_iter().find(|c| c.index.j_z > 1 || c.index.j_t > 0) {
                return Err(NumericError::Unsupported(format!(
                    "the flow is only integrated for characteristics of first order in z; {} appears",
                    cs.bundle.symbol_name(Symbol::Jet(c))
                )));
            }
            let s = -partial(&r, Symbol::jet(dep, 1, 0))?;
            q.push(Compiled::new(&r, &cs.bundle)?);
            speed.push(Compiled::new(&s.normalized()?, &cs.bundle)?);
        }
        Ok(Self { q, speed })
    }

    fn rates(&self, values: &[Vec<f64>], grid: &Grid, t: f64) -> Vec<Vec<f64>> {
        let central = vec![Difference::Central; values.len()];
        let mut jet = NodeJet::new(values.len(), 0.0, t);
        let mut out = vec![vec![0.0; grid.n()]; values.len()];
        for i in 0..grid.n() {
            jet.fill(values, grid, i, &central);
            for (dep, q) in self.q.iter().enumerate() {
                out[dep][i] = q.eval(&jet);
            }
        }
        out
    }

    fn stable_step(&self, state: &FieldState, grid: &Grid) -> f64 {
        let s = max_speed(&self.speed, state, grid);
        if s > 0.0 {
            0.5 * grid.dz() / s
        } else if s.is_nan() {
            f64::NAN
        } else {
            f64::INFINITY
        }
    }
}

/// Default flow step when none is given.
pub const DEFAULT_D_EPS: f64 = 1e-3;

/// Approximate the finite transformation `exp(ε v_Q)` of a grid state by
/// integrating `∂_ε x = Q` with RK4 and second-order differences in `z`;
/// the boundary conditions are re-imposed after each step.
pub fn flow(
    sys: &SystemDefinition,
    v: &GeneralizedVectorField,
    state: &FieldState,
    grid: &Grid,
    epsilon: f64,
    d_eps: Option<f64>,
) -> Result<FlowResult, NumericError> {
    let cs = CompiledSystem::new(sys)?;
    check_state(state, grid, cs.q())?;
    let cf = CompiledFlow::new(sys, v, &cs)?;
    if !epsilon.is_finite() {
        return Err(NumericError::InvalidArgument(format!("flow parameter {epsilon} is not finite")));
    }
    if epsilon == 0.0 {
        return Ok(FlowResult {
            epsilon,
            transformed: state.clone(),
            steps: 0,
            bc_defect: 0.0,
        });
    }
    let stable = cf.stable_step(state, grid);
    let d_eps = match d_eps {
        Some(d) if !(d > 0.0) => {
            return Err(NumericError::InvalidArgument(format!("flow step {d} must be positive")))
        }
        Some(d) => d,
        None => DEFAULT_D_EPS.min(stable),
    };
    let steps = (epsilon.abs() / d_eps - 1e-9).ceil().max(1.0) as usize;
    let h = epsilon / steps as f64;

    let mut u = state.values.clone();
    let mut bc_defect: f64 = 0.0;
    let scale = 1.0 + state.max_norm();
    for k in 0..steps {
        let cur = FieldState::new(u.clone(), state.time);
        let limit = if k == 0 { stable } else { cf.stable_step(&cur, grid) };
        if !(h.abs() <= limit) {
            return Err(NumericError::StepRejected {
                epsilon: k as f64 * h,
                suggested: if limit.is_finite() { 0.9 * limit } else { 0.0 },
            });
        }
        u = rk4(&u, h, |w, _| cf.rates(w, grid, state.time));
        bc_defect = bc_defect.max(cs.project(&mut u, grid, state.time)?);
        let next = FieldState::new(u.clone(), state.time);
        if !next.is_finite() || next.max_norm() > 1e6 * scale {
            return Err(NumericError::StepRejected {
                epsilon: (k + 1) as f64 * h,
                suggested: 0.5 * h.abs(),
            });
        }
    }
    Ok(FlowResult {
        epsilon,
        transformed: FieldState::new(u, state.time),
        steps,
        bc_defect,
    })
}
