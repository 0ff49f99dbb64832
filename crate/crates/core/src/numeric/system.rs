//! Compiled form of an evolution system for the method of lines.

use num_rational::BigRational;

use super::compiled::{Compiled, CompiledFraction, NodeJet};
use super::grid::{Difference, FieldState, Grid};
use super::NumericError;
use crate::analysis::SystemDefinition;
use crate::reduction::SolutionReducer;
use crate::symbolic::{partial, BundleSpec, Expr, JetCoordinate, Symbol};

pub(crate) struct CompiledBoundary {
    pub location: BigRational,
    pub dep: usize,
    pub residual: Compiled,
    pub label: String,
}

pub(crate) struct CompiledOutput {
    pub name: String,
    pub location: BigRational,
    pub value: CompiledFraction,
}

/// `x^α_t = R^α` for every `α`, with upwind speeds `−∂R^α/∂x^α_z`.
pub(crate) struct CompiledSystem {
    pub bundle: BundleSpec,
    pub rhs: Vec<Compiled>,
    pub speed: Vec<Compiled>,
    pub boundaries: Vec<CompiledBoundary>,
    pub outputs: Vec<CompiledOutput>,
}

impl CompiledSystem {
    pub fn new(sys: &SystemDefinition) -> Result<Self, NumericError> {
        sys.validate()?;
        let bundle = sys.bundle.clone();
        let q = bundle.dependent_count();
        let mut reducer = SolutionReducer::new(&sys.pdes)?;

        let mut rhs = Vec::with_capacity(q);
        let mut speed = Vec::with_capacity(q);
        for dep in 0..q {
            let principal = JetCoordinate::new(dep, 0, 1);
            let pde = sys.pdes.iter().find(|p| p.principal == principal).ok_or_else(|| {
                NumericError::NotEvolutionForm(format!(
                    "no equation of the form {} = ...",
                    bundle.symbol_name(Symbol::Jet(principal))
                ))
            })?;
            let r = reducer.reduce(&pde.rhs)?;
            let s = -partial(&r, Symbol::jet(dep, 1, 0))?;
            rhs.push(Compiled::new(&r, &bundle)?);
            speed.push(Compiled::new(&s.normalized()?, &bundle)?);
        }
        if let Some(p) = sys.pdes.iter().find(|p| !p.is_evolution()) {
            return Err(NumericError::NotEvolutionForm(format!(
                "principal coordinate {} is not a first time derivative",
                bundle.symbol_name(Symbol::Jet(p.principal))
            )));
        }

        let mut boundaries = Vec::new();
        for (i, bc) in sys.bcs.iter().enumerate() {
            let r = reducer.reduce(&bc.expr)?;
            let dep = match bc.solve_for {
                Some(c) => c.dep,
                None => match r.jet_coordinates().into_iter().next() {
                    Some(c) => c.dep,
                    None if r.is_literal_zero() => continue,
                    None => {
                        return Err(NumericError::BoundaryNotSolvable(format!(
                            "boundary condition {} does not involve any dependent variable",
                            i + 1
                        )))
                    }
                },
            };
            boundaries.push(CompiledBoundary {
                location: bc.location.clone(),
                dep,
                residual: Compiled::new(&r, &bundle)?,
                label: format!("bc{}", i + 1),
            });
        }

        let mut outputs = Vec::new();
        for out in &sys.outputs {
            let r = reducer.reduce(&out.expr)?;
            outputs.push(CompiledOutput {
                name: out.name.clone(),
                location: out.location.clone(),
                value: CompiledFraction::new(&r, &bundle)?,
            });
        }

        Ok(Self {
            bundle,
            rhs,
            speed,
            boundaries,
            outputs,
        })
    }

    pub fn q(&self) -> usize {
        self.rhs.len()
    }

    /// Largest `|speed|` over all nodes and components.
    pub fn max_speed(&self, state: &FieldState, grid: &Grid) -> f64 {
        max_speed(&self.speed, state, grid)
    }

    /// Largest stable time step, `0.5·dz / max|speed|`.
    pub fn stable_dt(&self, state: &FieldState, grid: &Grid) -> f64 {
        let s = self.max_speed(state, grid);
        if s > 0.0 {
            0.5 * grid.dz() / s
        } else {
            f64::INFINITY
        }
    }

    /// Method-of-lines right-hand side with first-order upwind
    /// `z`-derivatives. Nodes carrying a boundary condition are frozen; the
    /// condition is imposed by projection after each step.
    pub fn rates(&self, values: &[Vec<f64>], grid: &Grid, t: f64, frozen: &[(usize, usize)]) -> Vec<Vec<f64>> {
        let q = self.q();
        let n = grid.n();
        let central = vec![Difference::Central; q];
        let mut modes = vec![Difference::Central; q];
        let mut jet = NodeJet::new(q, 0.0, t);
        let mut out = vec![vec![0.0; n]; q];
        for i in 0..n {
            jet.fill(values, grid, i, &central);
            for (dep, m) in modes.iter_mut().enumerate() {
                let s = self.speed[dep].eval(&jet);
                *m = if s > 0.0 {
                    Difference::Backward
                } else if s < 0.0 {
                    Difference::Forward
                } else {
                    Difference::Central
                };
            }
            jet.fill(values, grid, i, &modes);
            for dep in 0..q {
                out[dep][i] = self.rhs[dep].eval(&jet);
            }
        }
        for &(dep, i) in frozen {
            out[dep][i] = 0.0;
        }
        out
    }

    /// `(dep, node)` pairs fixed by boundary conditions.
    pub fn frozen_nodes(&self, grid: &Grid) -> Result<Vec<(usize, usize)>, NumericError> {
        self.boundaries
            .iter()
            .map(|b| Ok((b.dep, boundary_node(grid, &b.location)?)))
            .collect()
    }

    /// Largest boundary residual.
    pub fn boundary_defect(&self, values: &[Vec<f64>], grid: &Grid, t: f64) -> Result<f64, NumericError> {
        let central = vec![Difference::Central; self.q()];
        let mut worst: f64 = 0.0;
        for b in &self.boundaries {
            let i = boundary_node(grid, &b.location)?;
            let mut jet = NodeJet::new(self.q(), grid.z(i), t);
            jet.fill(values, grid, i, &central);
            worst = worst.max(b.residual.eval(&jet).abs());
        }
        Ok(worst)
    }

    /// Re-impose the boundary conditions by adjusting the boundary node
    /// value of each condition's dependent variable (Newton iteration).
    /// Returns the largest change made.
    pub fn project(&self, values: &mut [Vec<f64>], grid: &Grid, t: f64) -> Result<f64, NumericError> {
        let central = vec![Difference::Central; self.q()];
        let mut jet = NodeJet::new(self.q(), 0.0, t);
        let mut change: f64 = 0.0;
        for _sweep in 0..8 {
            let mut settled = true;
            for b in &self.boundaries {
                let i = boundary_node(grid, &b.location)?;
                let start = values[b.dep][i];
                let scale = 1.0 + start.abs();
                let mut g = |values: &mut [Vec<f64>], u: f64| {
                    values[b.dep][i] = u;
                    jet.fill(values, grid, i, &central);
                    b.residual.eval(&jet)
                };
                let mut u = start;
                let mut r = g(values, u);
                if r == 0.0 {
                    continue;
                }
                let mut converged = false;
                for _ in 0..50 {
                    let h = 1e-7 * (1.0 + u.abs());
                    let slope = (g(values, u + h) - r) / h;
                    if slope == 0.0 || !slope.is_finite() {
                        break;
                    }
                    u -= r / slope;
                    r = g(values, u);
                    if !r.is_finite() {
                        break;
                    }
                    if r.abs() <= 1e-13 * scale {
                        converged = true;
                        break;
                    }
                }
                values[b.dep][i] = u;
                if !converged {
                    values[b.dep][i] = start;
                    return Err(NumericError::BoundaryNotSolvable(format!(
                        "{} could not be imposed at z = {} (Newton iteration failed)",
                        b.label,
                        grid.z(i)
                    )));
                }
                if (u - start).abs() > 0.0 {
                    settled = false;
                }
                change = change.max((u - start).abs());
            }
            if settled {
                break;
            }
        }
        Ok(change)
    }
}

pub(crate) fn max_speed(speed: &[Compiled], state: &FieldState, grid: &Grid) -> f64 {
    let central = vec![Difference::Central; state.values.len()];
    let mut jet = NodeJet::new(state.values.len(), 0.0, state.time);
    let mut worst: f64 = 0.0;
    for i in 0..grid.n() {
        jet.fill(&state.values, grid, i, &central);
        for s in speed {
            let v = s.eval(&jet).abs();
            worst = if v.is_nan() { f64::NAN } else { worst.max(v) };
        }
    }
    worst
}

pub(crate) fn boundary_node(grid: &Grid, location: &BigRational) -> Result<usize, NumericError> {
    match grid.node_at(location) {
        Some(i) if grid.is_boundary(i) => Ok(i),
        _ => Err(NumericError::InvalidGrid(format!(
            "boundary location z = {location} is not an end of the grid"
        ))),
    }
}

pub(crate) fn check_state(state: &FieldState, grid: &Grid, q: usize) -> Result<(), NumericError> {
    if state.values.len() != q || state.values.iter().any(|v| v.len() != grid.n()) {
        return Err(NumericError::ShapeMismatch {
            expected: (q, grid.n()),
            found: (state.values.len(), state.n()),
        });
    }
    Ok(())
}

/// Reduce `e` modulo the system so that only `z`-derivatives remain.
pub(crate) fn reduced(sys: &SystemDefinition, e: &Expr) -> Result<Expr, NumericError> {
    Ok(SolutionReducer::new(&sys.pdes)?.reduce(e)?)
}
