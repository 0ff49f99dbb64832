use num_rational::BigRational;

use super::compiled::NodeJet;
use super::grid::{Difference, FieldState, Grid};
use super::system::{check_state, CompiledSystem};
use super::NumericError;
use crate::analysis::SystemDefinition;

/// Relative threshold below which an output denominator counts as zero.
pub const DENOMINATOR_GUARD: f64 = 1e-6;

/// Values of one output functional along a trajectory; `NaN` marks times
/// where the output is undefined.
#[derive(Debug, Clone, PartialEq)]
pub struct OutputSeries {
    pub name: String,
    pub location: BigRational,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub grid: Grid,
    pub times: Vec<f64>,
    pub states: Vec<FieldState>,
    pub outputs: Vec<OutputSeries>,
    pub dt: f64,
}

impl Trajectory {
    pub fn final_state(&self) -> &FieldState {
        self.states.last().expect("a trajectory has at least one state")
    }

    pub fn output(&self, name: &str) -> Option<&OutputSeries> {
        self.outputs.iter().find(|o| o.name == name)
    }

    /// Maximal time intervals on which some output is undefined.
    pub fn undefined_intervals(&self) -> Vec<(f64, f64)> {
        let flags: Vec<bool> = (0..self.times.len())
            .map(|k| self.outputs.iter().any(|o| o.values[k].is_nan()))
            .collect();
        intervals(&self.times, &flags)
    }

    /// `t,<output>...` rows.
    pub fn outputs_csv(&self) -> String {
        let mut s = String::from("t");
        for o in &self.outputs {
            s.push(',');
            s.push_str(&o.name);
        }
        s.push('\n');
        for (k, t) in self.times.iter().enumerate() {
            s.push_str(&format!("{t}"));
            for o in &self.outputs {
                let v = o.values[k];
                if v.is_nan() {
                    s.push(',');
                } else {
                    s.push_str(&format!(",{v}"));
                }
            }
            s.push('\n');
        }
        s
    }

    /// `t,z,<dependent>...` rows for every stored state.
    pub fn states_csv(&self, dependent_names: &[String]) -> String {
        let mut s = String::from("t,z");
        for name in dependent_names {
            s.push(',');
            s.push_str(name);
        }
        s.push('\n');
        for st in &self.states {
            for i in 0..self.grid.n() {
                s.push_str(&format!("{},{}", st.time, self.grid.z(i)));
                for col in &st.values {
                    s.push_str(&format!(",{}", col[i]));
                }
                s.push('\n');
            }
        }
        s
    }
}

pub(crate) fn intervals(times: &[f64], flags: &[bool]) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    let mut start: Option<usize> = None;
    for (k, &f) in flags.iter().enumerate() {
        match (f, start) {
            (true, None) => start = Some(k),
            (false, Some(s)) => {
                out.push((times[s], times[k - 1]));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push((times[s], times[times.len() - 1]));
    }
    out
}

/// Largest stable time step for `state`, `0.5·dz / max|speed|`.
pub fn stable_time_step(sys: &SystemDefinition, state: &FieldState, grid: &Grid) -> Result<f64, NumericError> {
    let cs = CompiledSystem::new(sys)?;
    check_state(state, grid, cs.q())?;
    Ok(cs.stable_dt(state, grid))
}

/// Integrate the evolution system from `initial` to `t_end` by the method
/// of lines (first-order upwind in `z`, classical RK4 in `t`).
///
/// `dt` defaults to the stable step of the initial state; the step is then
/// shrunk so that `t_end` is hit exactly.
pub fn simulate(
    sys: &SystemDefinition,
    initial: &FieldState,
    grid: &Grid,
    t_end: f64,
    dt: Option<f64>,
) -> Result<Trajectory, NumericError> {
    let cs = CompiledSystem::new(sys)?;
    check_state(initial, grid, cs.q())?;
    if !initial.is_finite() {
        return Err(NumericError::Instability { time: initial.time });
    }
    let t0 = initial.time;
    if !(t_end >= t0) {
        return Err(NumericError::InvalidArgument(format!(
            "final time {t_end} precedes the initial time {t0}"
        )));
    }
    let scale = 1.0 + initial.max_norm();
    let defect = cs.boundary_defect(&initial.values, grid, t0)?;
    if defect > 1e-8 * scale {
        return Err(NumericError::InitialBoundaryMismatch { residual: defect });
    }

    let dt_max = cs.stable_dt(initial, grid);
    if dt_max.is_nan() {
        return Err(NumericError::Instability { time: t0 });
    }
    let dt = match dt {
        Some(dt) if !(dt > 0.0) => {
            return Err(NumericError::InvalidArgument(format!("time step {dt} must be positive")))
        }
        Some(dt) if dt > dt_max => return Err(NumericError::StepTooLarge { dt, max: dt_max }),
        Some(dt) => dt,
        None if dt_max.is_finite() => dt_max,
        None => (t_end - t0).max(f64::MIN_POSITIVE),
    };
    let span = t_end - t0;
    let steps = if span > 0.0 { (span / dt - 1e-9).ceil().max(1.0) as usize } else { 0 };
    let h = if steps > 0 { span / steps as f64 } else { 0.0 };

    let frozen = cs.frozen_nodes(grid)?;
    let output_nodes = cs
        .outputs
        .iter()
        .map(|o| {
            grid.node_at(&o.location).ok_or_else(|| {
                NumericError::InvalidGrid(format!("output {} at z = {} is not a grid node", o.name, o.location))
            })
        })
        .collect::<Result<Vec<_>, _>>()?;

    let mut traj = Trajectory {
        grid: grid.clone(),
        times: Vec::with_capacity(steps + 1),
        states: Vec::with_capacity(steps + 1),
        outputs: cs
            .outputs
            .iter()
            .map(|o| OutputSeries {
                name: o.name.clone(),
                location: o.location.clone(),
                values: Vec::with_capacity(steps + 1),
            })
            .collect(),
        dt: h,
    };
    let record = |traj: &mut Trajectory, state: FieldState| {
        let central = vec![Difference::Central; cs.q()];
        let threshold = DENOMINATOR_GUARD * state.max_norm();
        for (k, o) in cs.outputs.iter().enumerate() {
            let jet = NodeJet::at(&state, grid, output_nodes[k], &central);
            let y = o.value.eval_guarded(&jet, threshold).unwrap_or(f64::NAN);
            traj.outputs[k].values.push(y);
        }
        traj.times.push(state.time);
        traj.states.push(state);
    };

    let mut u = initial.values.clone();
    record(&mut traj, initial.clone());
    let blowup = 1e6 * scale;
    for k in 0..steps {
        let t = t0 + k as f64 * h;
        let state = FieldState::new(u.clone(), t);
        let s = cs.max_speed(&state, grid);
        if !(s * h <= grid.dz()) {
            return Err(NumericError::Instability { time: t });
        }
        u = rk4(&u, h, |v, dt| cs.rates(v, grid, t + dt, &frozen));
        let t_next = if k + 1 == steps { t_end } else { t0 + (k + 1) as f64 * h };
        cs.project(&mut u, grid, t_next)?;
        let next = FieldState::new(u.clone(), t_next);
        if !next.is_finite() || next.max_norm() > blowup {
            return Err(NumericError::Instability { time: t_next });
        }
        record(&mut traj, next);
    }
    Ok(traj)
}

/// One classical Runge–Kutta step; `f(v, τ)` is the rate at offset `τ`.
pub(crate) fn rk4(u: &[Vec<f64>], h: f64, f: impl Fn(&[Vec<f64>], f64) -> Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    let axpy = |a: &[Vec<f64>], s: f64, b: &[Vec<f64>]| -> Vec<Vec<f64>> {
        a.iter()
            .zip(b)
            .map(|(x, y)| x.iter().zip(y).map(|(p, q)| p + s * q).collect())
            .collect()
    };
    let k1 = f(u, 0.0);
    let k2 = f(&axpy(u, 0.5 * h, &k1), 0.5 * h);
    let k3 = f(&axpy(u, 0.5 * h, &k2), 0.5 * h);
    let k4 = f(&axpy(u, h, &k3), h);
    u.iter()
        .enumerate()
        .map(|(a, col)| {
            col.iter()
                .enumerate()
                .map(|(i, x)| x + h / 6.0 * (k1[a][i] + 2.0 * k2[a][i] + 2.0 * k3[a][i] + k4[a][i]))
                .collect()
        })
        .collect()
}
