use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use jetsym::analysis::certify_nonobservability;
use jetsym::fields::GeneralizedVectorField;
use jetsym::numeric::{
    flow, indistinguishability_experiment, round12, simulate, ExperimentConfig, ExperimentVerdict, FieldState, Grid,
    NumericError,
};
use jetsym::symbolic::Expr;
use serde_json::{json, Map, Value};

use crate::sysfile::{load, LoadError, SystemFile};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "jetsym", version, about = "Symmetry and non-observability checks for 1+1-dimensional PDE systems")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Certify that a field is a symmetry of the equations and boundary
    /// conditions that leaves the outputs invariant
    Check(CheckArgs),
    /// Integrate the system from an initial profile
    Simulate(SimulateArgs),
    /// Transform an initial profile by the flow of a field
    Flow(FlowArgs),
    /// Compare outputs from a profile and its transform across grids
    Experiment(ExperimentArgs),
    /// Print the system in normalized file form
    Print(PrintArgs),
}

#[derive(Debug, Args)]
pub struct Common {
    /// System-definition file
    pub file: PathBuf,
    /// Write a JSON report to this path
    #[arg(long, value_name = "PATH")]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[command(flatten)]
    pub common: Common,
    /// Field name; optional when the file declares exactly one
    #[arg(long)]
    pub field: Option<String>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub common: Common,
    /// Profile name; optional when the file declares exactly one
    #[arg(long)]
    pub profile: Option<String>,
    #[arg(long = "t-end", default_value_t = 0.5)]
    pub t_end: f64,
    /// Node counts, comma separated
    #[arg(long, value_delimiter = ',', default_value = "201")]
    pub grids: Vec<usize>,
    /// Fixed time step; defaults to the stable step
    #[arg(long)]
    pub dt: Option<f64>,
    /// Write the output trajectory of the finest grid as CSV
    #[arg(long, value_name = "PATH")]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FlowArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub field: Option<String>,
    #[arg(long)]
    pub profile: Option<String>,
    #[arg(long, default_value_t = 0.1, allow_negative_numbers = true)]
    pub eps: f64,
    #[arg(long, value_delimiter = ',', default_value = "201")]
    pub grids: Vec<usize>,
    /// Write original and transformed profiles on the finest grid as CSV
    #[arg(long, value_name = "PATH")]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub field: Option<String>,
    #[arg(long)]
    pub profile: Option<String>,
    #[arg(long, default_value_t = 0.1, allow_negative_numbers = true)]
    pub eps: f64,
    #[arg(long = "t-end", default_value_t = 0.5)]
    pub t_end: f64,
    #[arg(long, value_delimiter = ',', default_value = "101,201,401")]
    pub grids: Vec<usize>,
    #[arg(long)]
    pub dt: Option<f64>,
    /// Write the per-grid convergence table as CSV
    #[arg(long, value_name = "PATH")]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PrintArgs {
    pub file: PathBuf,
}

/// A failed command: message for stderr and exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }
}

/// Instabilities and failed boundary solves are numerical failures; every
/// other error means the inputs or flags were unusable.
pub fn numeric_exit_code(e: &NumericError) -> i32 {
    match e {
        NumericError::Instability { .. } | NumericError::StepRejected { .. } | NumericError::BoundaryNotSolvable(_) => {
            EXIT_NUMERIC
        }
        _ => EXIT_USAGE,
    }
}

impl From<NumericError> for Failure {
    fn from(e: NumericError) -> Self {
        Self {
            code: numeric_exit_code(&e),
            message: e.to_string(),
        }
    }
}

/// Parse `args` (including the program name) and run the command.
/// Reports go to `out`, diagnostics to `err`; the return value is the exit
/// code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(err, "{text}");
                EXIT_USAGE
            } else {
                let _ = write!(out, "{text}");
                EXIT_PASS
            };
        }
    };
    match execute(&cli.command, out) {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

pub fn execute(cmd: &Command, out: &mut dyn Write) -> Result<i32, Failure> {
    match cmd {
        Command::Check(a) => check(a, out),
        Command::Simulate(a) => run_simulate(a, out),
        Command::Flow(a) => run_flow(a, out),
        Command::Experiment(a) => run_experiment(a, out),
        Command::Print(a) => {
            let file = load_file(&a.file)?;
            emit(out, &file.to_text())?;
            Ok(EXIT_PASS)
        }
    }
}

fn load_file(path: &Path) -> Result<SystemFile, Failure> {
    load(path).map_err(|e| match e {
        LoadError::Io { .. } => Failure::usage(e.to_string()),
        _ => Failure::usage(format!("{}: {e}", path.display())),
    })
}

fn emit(out: &mut dyn Write, text: &str) -> Result<(), Failure> {
    out.write_all(text.as_bytes())
        .map_err(|e| Failure::usage(format!("cannot write report: {e}")))
}

fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text).map_err(|e| Failure::usage(format!("cannot write {}: {e}", path.display())))
}

/// Look up a named entry, or take the only one when no name is given.
fn pick<'a, T>(items: &'a [(String, T)], name: Option<&str>, kind: &str) -> Result<&'a T, Failure> {
    match name {
        Some(n) => items.iter().find(|(m, _)| m == n).map(|(_, x)| x).ok_or_else(|| {
            let known: Vec<&str> = items.iter().map(|(m, _)| m.as_str()).collect();
            Failure::usage(format!("no {kind} named `{n}` (declared: {})", list_or_none(&known)))
        }),
        None => match items {
            [(_, x)] => Ok(x),
            [] => Err(Failure::usage(format!("the file declares no {kind}"))),
            _ => Err(Failure::usage(format!("several {kind}s declared; choose one with --{kind}"))),
        },
    }
}

fn list_or_none(names: &[&str]) -> String {
    if names.is_empty() {
        "none".into()
    } else {
        names.join(", ")
    }
}

fn field<'a>(file: &'a SystemFile, name: Option<&str>) -> Result<&'a GeneralizedVectorField, Failure> {
    pick(&file.fields, name, "field")
}

fn profile<'a>(file: &'a SystemFile, name: Option<&str>) -> Result<&'a [Expr], Failure> {
    pick(&file.profiles, name, "profile").map(Vec::as_slice)
}

fn check_grids(grids: &[usize]) -> Result<(), Failure> {
    if grids.is_empty() {
        return Err(Failure::usage("--grids needs at least one node count"));
    }
    Ok(())
}

fn pretty(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("json value serializes")
}

fn check(a: &CheckArgs, out: &mut dyn Write) -> Result<i32, Failure> {
    let file = load_file(&a.common.file)?;
    let v = field(&file, a.field.as_deref())?;
    let report = certify_nonobservability(&file.system, v).map_err(|e| Failure::usage(e.to_string()))?;
    emit(out, &report.summary(&file.system.bundle))?;
    if let Some(p) = &a.common.json {
        write_file(p, &report.to_json(&file.system.bundle))?;
    }
    Ok(if report.overall.is_pass() { EXIT_PASS } else { EXIT_FAIL })
}

fn run_simulate(a: &SimulateArgs, out: &mut dyn Write) -> Result<i32, Failure> {
    let file = load_file(&a.common.file)?;
    let x0 = profile(&file, a.profile.as_deref())?;
    check_grids(&a.grids)?;
    let sys = &file.system;
    let mut text = format!("simulation to t = {}\n", a.t_end);
    let mut runs = Vec::new();
    let mut finest = None;
    for &n in &a.grids {
        let grid = Grid::over(&sys.domain, n)?;
        let state = FieldState::from_profiles(x0, &grid, 0.0)?;
        let traj = simulate(sys, &state, &grid, a.t_end, a.dt)?;
        let mut finals = Map::new();
        text.push_str(&format!("  n = {n:>5}: dt = {:.6e}", traj.dt));
        for o in &traj.outputs {
            let y = *o.values.last().expect("trajectory has a final time");
            text.push_str(&format!(", {} = {:.9}", o.name, y));
            finals.insert(o.name.clone(), round12(y));
        }
        text.push('\n');
        let undefined = traj.undefined_intervals();
        for (t0, t1) in &undefined {
            text.push_str(&format!("    outputs undefined on [{t0}, {t1}]\n"));
        }
        runs.push(json!({
            "n": n,
            "dt": round12(traj.dt),
            "steps": traj.times.len() - 1,
            "final_outputs": Value::Object(finals),
            "undefined_intervals": undefined.iter().map(|(a, b)| json!([round12(*a), round12(*b)])).collect::<Vec<_>>(),
        }));
        if finest.as_ref().map_or(true, |(m, _)| n > *m) {
            finest = Some((n, traj));
        }
    }
    emit(out, &text)?;
    if let Some(p) = &a.common.json {
        write_file(p, &pretty(&json!({ "t_end": round12(a.t_end), "grids": runs })))?;
    }
    if let (Some(p), Some((_, traj))) = (&a.csv, &finest) {
        write_file(p, &traj.outputs_csv())?;
    }
    Ok(EXIT_PASS)
}

fn run_flow(a: &FlowArgs, out: &mut dyn Write) -> Result<i32, Failure> {
    let file = load_file(&a.common.file)?;
    let v = field(&file, a.field.as_deref())?;
    let x0 = profile(&file, a.profile.as_deref())?;
    check_grids(&a.grids)?;
    let sys = &file.system;
    let names = sys.bundle.dependent_names();
    let mut text = format!("flow to epsilon = {}\n", a.eps);
    let mut runs = Vec::new();
    let mut finest: Option<(usize, Grid, FieldState, FieldState)> = None;
    for &n in &a.grids {
        let grid = Grid::over(&sys.domain, n)?;
        let state = FieldState::from_profiles(x0, &grid, 0.0)?;
        let r = flow(sys, v, &state, &grid, a.eps, None)?;
        let change = r.transformed.max_distance(&state);
        text.push_str(&format!(
            "  n = {n:>5}: steps = {}, max change = {:.6e}, boundary correction = {:.3e}\n",
            r.steps, change, r.bc_defect
        ));
        runs.push(json!({
            "n": n,
            "steps": r.steps,
            "max_change": round12(change),
            "bc_defect": round12(r.bc_defect),
        }));
        if finest.as_ref().map_or(true, |(m, ..)| n > *m) {
            finest = Some((n, grid, state, r.transformed));
        }
    }
    emit(out, &text)?;
    if let Some(p) = &a.common.json {
        write_file(p, &pretty(&json!({ "epsilon": round12(a.eps), "grids": runs })))?;
    }
    if let (Some(p), Some((_, grid, before, after))) = (&a.csv, &finest) {
        let mut s = String::from("z");
        for name in names {
            s.push_str(&format!(",{name},{name}_flowed"));
        }
        s.push('\n');
        for i in 0..grid.n() {
            s.push_str(&format!("{}", grid.z(i)));
            for (b, t) in before.values.iter().zip(&after.values) {
                s.push_str(&format!(",{},{}", b[i], t[i]));
            }
            s.push('\n');
        }
        write_file(p, &s)?;
    }
    Ok(EXIT_PASS)
}

fn run_experiment(a: &ExperimentArgs, out: &mut dyn Write) -> Result<i32, Failure> {
    let file = load_file(&a.common.file)?;
    let v = field(&file, a.field.as_deref())?;
    let x0 = profile(&file, a.profile.as_deref())?;
    check_grids(&a.grids)?;
    let config = ExperimentConfig {
        epsilon: a.eps,
        t_end: a.t_end,
        grids: a.grids.clone(),
        dt: a.dt,
        d_eps: None,
    };
    let report = indistinguishability_experiment(&file.system, v, x0, &config)?;
    emit(out, &report.summary())?;
    if let Some(p) = &a.common.json {
        write_file(p, &report.to_json())?;
    }
    if let Some(p) = &a.csv {
        write_file(p, &report.to_csv())?;
    }
    Ok(match report.verdict {
        ExperimentVerdict::Supports => EXIT_PASS,
        ExperimentVerdict::DoesNotSupport | ExperimentVerdict::Inconclusive => EXIT_FAIL,
    })
}
