use std::fmt;

use serde::Serialize;
use serde_json::{json, Value};

use super::flow::flow;
use super::grid::{FieldState, Grid};
use super::simulate::{intervals, simulate, Trajectory};
use super::system::CompiledSystem;
use super::NumericError;
use crate::analysis::{certify_nonobservability, SystemDefinition};
use crate::fields::GeneralizedVectorField;
use crate::symbolic::Expr;

/// Refinement ratio `d_out(n_k) / d_out(n_{k+1})` required for the
/// output difference to count as vanishing under refinement.
pub const MIN_CONVERGENCE_RATIO: f64 = 1.5;

/// Output differences at or below this multiple of `max(1, max|y|)` are
/// treated as roundoff.
pub const OUTPUT_NOISE_FLOOR: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub epsilon: f64,
    pub t_end: f64,
    /// Node counts, coarsest first.
    pub grids: Vec<usize>,
    pub dt: Option<f64>,
    pub d_eps: Option<f64>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            epsilon: 0.1,
            t_end: 0.5,
            grids: vec![101, 201, 401],
            dt: None,
            d_eps: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentVerdict {
    /// `d_init > 0` and the output difference decays under refinement.
    Supports,
    DoesNotSupport,
    /// Fewer than two grids, or identical initial states.
    Inconclusive,
}

impl fmt::Display for ExperimentVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ExperimentVerdict::Supports => "supports non-observability",
            ExperimentVerdict::DoesNotSupport => "does not support non-observability",
            ExperimentVerdict::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridRun {
    pub n: usize,
    pub dt: f64,
    pub d_init: f64,
    pub d_out: f64,
    pub undefined_intervals: Vec<(f64, f64)>,
    pub original: Trajectory,
    pub transformed: Trajectory,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub epsilon: f64,
    pub t_end: f64,
    pub runs: Vec<GridRun>,
    /// `d_init` on the finest grid.
    pub d_init: f64,
    pub d_out_per_grid: Vec<f64>,
    pub convergence_ratios: Vec<Option<f64>>,
    /// Absolute roundoff floor for `d_out`.
    pub noise_floor: f64,
    pub verdict: ExperimentVerdict,
    pub certificate_passed: bool,
    pub warnings: Vec<String>,
}

/// Simulate from `x0` and from `exp(εv)x0` on each grid and compare the
/// output trajectories.
pub fn indistinguishability_experiment(
    sys: &SystemDefinition,
    v: &GeneralizedVectorField,
    profiles: &[Expr],
    config: &ExperimentConfig,
) -> Result<ExperimentReport, NumericError> {
    if config.grids.is_empty() {
        return Err(NumericError::InvalidArgument("no grids given".into()));
    }
    let cs = CompiledSystem::new(sys)?;
    if profiles.len() != cs.q() {
        return Err(NumericError::InvalidArgument(format!(
            "{} initial profiles given, the system has {} dependent variables",
            profiles.len(),
            cs.q()
        )));
    }
    let mut warnings = Vec::new();
    let certificate_passed = match certify_nonobservability(sys, v) {
        Ok(r) => r.overall.is_pass(),
        Err(e) => {
            warnings.push(format!("symbolic certificate could not be computed: {e}"));
            false
        }
    };
    if !certificate_passed {
        warnings.push("the field is not certified symbolically; the experiment is a control".into());
    }

    let runs: Vec<Result<GridRun, NumericError>> = std::thread::scope(|scope| {
        let handles: Vec<_> = config
            .grids
            .iter()
            .map(|&n| scope.spawn(move || run_grid(sys, v, profiles, config, n)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().unwrap_or_else(|_| Err(NumericError::Instability { time: f64::NAN })))
            .collect()
    });
    let runs = runs.into_iter().collect::<Result<Vec<_>, _>>()?;

    let d_out_per_grid: Vec<f64> = runs.iter().map(|r| r.d_out).collect();
    let convergence_ratios: Vec<Option<f64>> = d_out_per_grid
        .windows(2)
        .map(|w| if w[1] > 0.0 { Some(w[0] / w[1]) } else { None })
        .collect();
    let d_init = runs.last().map_or(0.0, |r| r.d_init);
    let y_scale = runs
        .iter()
        .flat_map(|r| r.original.outputs.iter().flat_map(|o| o.values.iter()))
        .filter(|y| y.is_finite())
        .fold(1.0_f64, |m, y| m.max(y.abs()));
    let noise_floor = OUTPUT_NOISE_FLOOR * y_scale;
    let decays = d_out_per_grid
        .windows(2)
        .zip(&convergence_ratios)
        .all(|(w, r)| w[1] <= noise_floor || r.is_some_and(|r| r >= MIN_CONVERGENCE_RATIO));
    let verdict = if runs.len() < 2 || !(d_init > 0.0) {
        ExperimentVerdict::Inconclusive
    } else if decays {
        ExperimentVerdict::Supports
    } else {
        ExperimentVerdict::DoesNotSupport
    };
    if runs.iter().any(|r| !r.undefined_intervals.is_empty()) {
        warnings.push("some outputs are undefined on part of the time interval; those times were excluded".into());
    }
    Ok(ExperimentReport {
        epsilon: config.epsilon,
        t_end: config.t_end,
        runs,
        d_init,
        d_out_per_grid,
        convergence_ratios,
        noise_floor,
        verdict,
        certificate_passed,
        warnings,
    })
}

fn run_grid(
    sys: &SystemDefinition,
    v: &GeneralizedVectorField,
    profiles: &[Expr],
    config: &ExperimentConfig,
    n: usize,
) -> Result<GridRun, NumericError> {
    let grid = Grid::over(&sys.domain, n)?;
    let x0 = FieldState::from_profiles(profiles, &grid, 0.0)?;
    let x1 = flow(sys, v, &x0, &grid, config.epsilon, config.d_eps)?.transformed;
    let dt = match config.dt {
        Some(dt) => dt,
        None => {
            let cs = CompiledSystem::new(sys)?;
            cs.stable_dt(&x0, &grid).min(cs.stable_dt(&x1, &grid))
        }
    };
    let dt = if dt.is_finite() { Some(dt) } else { None };
    let original = simulate(sys, &x0, &grid, config.t_end, dt)?;
    let transformed = simulate(sys, &x1, &grid, config.t_end, dt)?;

    let mut d_out: f64 = 0.0;
    let mut flags = vec![false; original.times.len()];
    for (a, b) in original.outputs.iter().zip(&transformed.outputs) {
        for (k, (ya, yb)) in a.values.iter().zip(&b.values).enumerate() {
            if ya.is_nan() || yb.is_nan() {
                flags[k] = true;
            } else {
                d_out = d_out.max((ya - yb).abs());
            }
        }
    }
    Ok(GridRun {
        n,
        dt: original.dt,
        d_init: x0.max_distance(&x1),
        d_out,
        undefined_intervals: intervals(&original.times, &flags),
        original,
        transformed,
    })
}

/// Round to 12 significant digits; non-finite values become `null`.
pub fn round12(x: f64) -> Value {
    if !x.is_finite() {
        return Value::Null;
    }
    let r: f64 = format!("{x:.11e}").parse().unwrap_or(x);
    json!(r)
}

impl ExperimentReport {
    /// Deterministic JSON with floats rounded to 12 significant digits.
    pub fn to_json(&self) -> String {
        let grids: Vec<Value> = self
            .runs
            .iter()
            .map(|r| {
                json!({
                    "n": r.n,
                    "dt": round12(r.dt),
                    "d_init": round12(r.d_init),
                    "d_out": round12(r.d_out),
                    "undefined_intervals": r.undefined_intervals.iter()
                        .map(|(a, b)| json!([round12(*a), round12(*b)])).collect::<Vec<_>>(),
                })
            })
            .collect();
        let v = json!({
            "epsilon": round12(self.epsilon),
            "t_end": round12(self.t_end),
            "d_init": round12(self.d_init),
            "d_out_per_grid": self.d_out_per_grid.iter().map(|x| round12(*x)).collect::<Vec<_>>(),
            "convergence_ratios": self.convergence_ratios.iter()
                .map(|r| r.map_or(Value::Null, round12)).collect::<Vec<_>>(),
            "noise_floor": round12(self.noise_floor),
            "verdict": self.verdict,
            "certificate_passed": self.certificate_passed,
            "grids": grids,
            "warnings": self.warnings,
        });
        serde_json::to_string_pretty(&v).expect("report serializes")
    }

    /// `n,dt,d_init,d_out,ratio` rows.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("n,dt,d_init,d_out,ratio\n");
        for (k, r) in self.runs.iter().enumerate() {
            let ratio = match self.convergence_ratios.get(k.wrapping_sub(1)) {
                Some(Some(q)) if k > 0 => format!("{q}"),
                _ => String::new(),
            };
            s.push_str(&format!("{},{},{},{},{}\n", r.n, r.dt, r.d_init, r.d_out, ratio));
        }
        s
    }

    pub fn summary(&self) -> String {
        let mut s = format!(
            "indistinguishability experiment: epsilon = {}, t_end = {}\n",
            self.epsilon, self.t_end
        );
        s.push_str(&format!("  d_init = {:.6e}\n", self.d_init));
        for (k, r) in self.runs.iter().enumerate() {
            s.push_str(&format!("  n = {:>5}: d_out = {:.6e}", r.n, r.d_out));
            if k > 0 {
                match self.convergence_ratios[k - 1] {
                    Some(q) => s.push_str(&format!(", ratio = {q:.3}")),
                    None => s.push_str(", ratio = n/a"),
                }
            }
            s.push('\n');
        }
        s.push_str(&format!("  verdict: {}\n", self.verdict));
        for w in &self.warnings {
            s.push_str(&format!("  warning: {w}\n"));
        }
        s
    }
}
