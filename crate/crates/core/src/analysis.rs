//! Symmetry checks for a PDE system with boundary conditions and point
//! outputs, and the resulting non-observability certificate.
//!
//! A field passes when
//! - the Lie derivative of every equation vanishes on solutions,
//! - the Lie derivative of every boundary condition along the evolutionary
//!   form vanishes on solutions satisfying the boundary conditions,
//! - the Lie derivative of every output along the evolutionary form vanishes
//!   at the output location.
//!
//! Such a field maps solutions to solutions with the same output
//! trajectory, so distinct initial conditions become indistinguishable. The
//! verdict is infinitesimal: existence of the group action is not checked.

use std::collections::BTreeMap;

use num_rational::BigRational;
use serde::Serialize;
use thiserror::Error;

use crate::fields::{lie_derivative, EvolutionaryField, Generator, GeneralizedVectorField};
use crate::reduction::{
    restrict_with, BoundaryCondition, BoundaryRelation, DomainSpec, ReductionError, SolutionReducer,
    SolvedPde,
};
use crate::symbolic::{BundleSpec, Expr, Independent, SymbolicError};

pub const CERTIFICATE_LABEL: &str = "non-observability certificate (infinitesimal)";

pub const CAVEAT: &str = "Infinitesimal verdict: only the infinitesimal symmetry conditions were \
verified. Concluding that the system is not observable additionally assumes that the group action \
generated by the field exists; that assumption is not checked.";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AnalysisError {
    #[error(transparent)]
    Reduction(#[from] ReductionError),
    #[error(transparent)]
    Symbolic(#[from] SymbolicError),
    #[error("invalid system: {0}")]
    InvalidSystem(String),
    #[error("field has {found} dependent components, the bundle has {expected}")]
    ComponentMismatch { expected: usize, found: usize },
    #[error("equation {0}: verdicts along pr v and pr v_Q disagree")]
    InconsistentVerdicts(usize),
}

/// Point output `y = c` evaluated at `z = location`.
#[derive(Debug, Clone, PartialEq)]
pub struct OutputFunctional {
    pub name: String,
    pub expr: Expr,
    pub location: BigRational,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SystemDefinition {
    pub bundle: BundleSpec,
    pub domain: DomainSpec,
    pub pdes: Vec<SolvedPde>,
    pub bcs: Vec<BoundaryCondition>,
    pub outputs: Vec<OutputFunctional>,
}

impl SystemDefinition {
    /// Structural checks: symbols belong to the bundle, boundary conditions
    /// sit at domain endpoints, outputs lie in the closed domain, and the
    /// solved form is acyclic.
    pub fn validate(&self) -> Result<(), AnalysisError> {
        let q = self.bundle.dependent_count();
        let in_bundle = |e: &Expr| e.jet_coordinates().iter().all(|c| c.dep < q);
        for (i, pde) in self.pdes.iter().enumerate() {
            if pde.principal.dep >= q || !in_bundle(&pde.rhs) {
                return Err(AnalysisError::InvalidSystem(format!(
                    "equation {} refers to an undeclared dependent variable",
                    i + 1
                )));
            }
        }
        for (i, bc) in self.bcs.iter().enumerate() {
            if !self.domain.is_endpoint(&bc.location) {
                return Err(AnalysisError::InvalidSystem(format!(
                    "boundary condition {} at z = {} is not at a domain endpoint",
                    i + 1,
                    bc.location
                )));
            }
            if !in_bundle(&bc.expr) {
                return Err(AnalysisError::InvalidSystem(format!(
                    "boundary condition {} refers to an undeclared dependent variable",
                    i + 1
                )));
            }
        }
        for out in &self.outputs {
            if !self.domain.contains_closed(&out.location) {
                return Err(AnalysisError::InvalidSystem(format!(
                    "output {} at z = {} lies outside the domain",
                    out.name, out.location
                )));
            }
            if !in_bundle(&out.expr) {
                return Err(AnalysisError::InvalidSystem(format!(
                    "output {} refers to an undeclared dependent variable",
                    out.name
                )));
            }
        }
        let mut reducer = SolutionReducer::new(&self.pdes)?;
        reducer.extend_to(1)?;
        Ok(())
    }

    pub fn bcs_at(&self, z: &BigRational) -> Vec<BoundaryCondition> {
        self.bcs.iter().filter(|bc| bc.location == *z).cloned().collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

impl Verdict {
    pub fn from_zero(residual: &Expr) -> Verdict {
        if residual.is_literal_zero() {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    pub fn is_pass(self) -> bool {
        self == Verdict::Pass
    }
}

/// Outcome of the equation check, computed along both `pr v` and `pr v_Q`.
#[derive(Debug, Clone, PartialEq)]
pub struct PdeCheck {
    pub verdict: Verdict,
    /// Reduced `L_{pr v_Q} Δ^ν`.
    pub residuals: Vec<Expr>,
    /// Reduced `L_{pr v} Δ^ν`.
    pub general_residuals: Vec<Expr>,
}

/// Outcome of a boundary-condition or output check.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: String,
    pub location: BigRational,
    pub expr: Expr,
    /// Lie derivative along `pr v_Q` before restriction.
    pub lie_derivative: Expr,
    pub residual: Expr,
    pub verdict: Verdict,
    /// Boundary relations (with `D_t`-consequences) used in the restriction.
    pub relations: Vec<BoundaryRelation>,
    /// The expression has a nonconstant denominator, so the verdict holds at
    /// points where it does not vanish.
    pub generic_point: bool,
}

fn check_components(sys: &SystemDefinition, v: &GeneralizedVectorField) -> Result<(), AnalysisError> {
    let expected = sys.bundle.dependent_count();
    if v.v_x.len() != expected {
        return Err(AnalysisError::ComponentMismatch {
            expected,
            found: v.v_x.len(),
        });
    }
    Ok(())
}

/// `L_{pr v} Δ^ν` reduced modulo the system, for both `v` and `v_Q`.
pub fn check_pde_symmetry(sys: &SystemDefinition, v: &GeneralizedVectorField) -> Result<PdeCheck, AnalysisError> {
    check_components(sys, v)?;
    let vq = v.evolutionary_form()?;
    let mut reducer = SolutionReducer::new(&sys.pdes)?;
    let mut along_q = Generator::new((&vq).into())?;
    let mut along_v = Generator::new(v.into())?;
    let mut residuals = Vec::new();
    let mut general_residuals = Vec::new();
    for (i, pde) in sys.pdes.iter().enumerate() {
        let delta = pde.delta().to_rational()?;
        let rq = reducer.reduce_rational(&along_q.lie_derivative(&delta))?.to_expr();
        let rv = reducer.reduce_rational(&along_v.lie_derivative(&delta))?.to_expr();
        if Verdict::from_zero(&rq) != Verdict::from_zero(&rv) {
            return Err(AnalysisError::InconsistentVerdicts(i + 1));
        }
        residuals.push(rq);
        general_residuals.push(rv);
    }
    let verdict = if residuals.iter().all(Expr::is_literal_zero) {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    Ok(PdeCheck {
        verdict,
        residuals,
        general_residuals,
    })
}

fn restricted_check(
    sys: &SystemDefinition,
    reducer: &mut SolutionReducer,
    vq: &EvolutionaryField,
    name: String,
    expr: &Expr,
    location: &BigRational,
) -> Result<CheckResult, AnalysisError> {
    let lie = lie_derivative(vq, expr)?;
    let restriction = restrict_with(reducer, &lie, &sys.bcs_at(location), location)?;
    let generic_point = !expr.to_rational()?.denominator().is_constant();
    Ok(CheckResult {
        name,
        location: location.clone(),
        expr: expr.clone(),
        lie_derivative: lie,
        verdict: Verdict::from_zero(&restriction.residual),
        residual: restriction.residual,
        relations: restriction.relations,
        generic_point,
    })
}

/// `L_{pr v_Q} Δ_BC^λ` restricted to the boundary. The evolutionary form is
/// used even for non-vertical `v`.
pub fn check_bc_symmetry(
    sys: &SystemDefinition,
    v: &GeneralizedVectorField,
) -> Result<Vec<CheckResult>, AnalysisError> {
    check_components(sys, v)?;
    let vq = v.evolutionary_form()?;
    let mut reducer = SolutionReducer::new(&sys.pdes)?;
    sys.bcs
        .iter()
        .enumerate()
        .map(|(i, bc)| restricted_check(sys, &mut reducer, &vq, format!("bc{}", i + 1), &bc.expr, &bc.location))
        .collect()
}

/// `L_{pr v_Q} c` restricted to the output location.
pub fn check_output_invariance(
    sys: &SystemDefinition,
    v: &GeneralizedVectorField,
) -> Result<Vec<CheckResult>, AnalysisError> {
    check_components(sys, v)?;
    let vq = v.evolutionary_form()?;
    let mut reducer = SolutionReducer::new(&sys.pdes)?;
    sys.outputs
        .iter()
        .map(|out| restricted_check(sys, &mut reducer, &vq, out.name.clone(), &out.expr, &out.location))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct CertificateReport {
    pub field: GeneralizedVectorField,
    pub characteristics: Vec<Expr>,
    pub pde_check: PdeCheck,
    pub bc_checks: Vec<CheckResult>,
    pub output_checks: Vec<CheckResult>,
    pub overall: Verdict,
    /// Why `overall` is `Fail`; empty on a pass.
    pub reasons: Vec<String>,
    pub caveat: &'static str,
}

/// Run all three checks. A pass additionally requires the field to act
/// nontrivially on solutions.
pub fn certify_nonobservability(
    sys: &SystemDefinition,
    v: &GeneralizedVectorField,
) -> Result<CertificateReport, AnalysisError> {
    sys.validate()?;
    let pde_check = check_pde_symmetry(sys, v)?;
    let bc_checks = check_bc_symmetry(sys, v)?;
    let output_checks = check_output_invariance(sys, v)?;
    let vq = v.evolutionary_form()?;

    let mut reasons = Vec::new();
    if v.is_zero() {
        reasons.push("zero field".to_string());
    } else {
        let mut reducer = SolutionReducer::new(&sys.pdes)?;
        let mut trivial = true;
        for q in &vq.characteristics {
            if !reducer.reduce(q)?.is_literal_zero() {
                trivial = false;
            }
        }
        if trivial {
            reasons.push("trivial symmetry: the characteristics vanish on solutions".to_string());
        }
    }
    if !pde_check.verdict.is_pass() {
        reasons.push("not a symmetry of the equations".to_string());
    }
    for c in bc_checks.iter().filter(|c| !c.verdict.is_pass()) {
        reasons.push(format!("boundary condition {} is not preserved", c.name));
    }
    for c in output_checks.iter().filter(|c| !c.verdict.is_pass()) {
        reasons.push(format!("output {} is not invariant", c.name));
    }
    let overall = if reasons.is_empty() {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    Ok(CertificateReport {
        field: v.clone(),
        characteristics: vq.characteristics,
        pde_check,
        bc_checks,
        output_checks,
        overall,
        reasons,
        caveat: CAVEAT,
    })
}

#[derive(Serialize)]
struct PdeCheckJson {
    verdict: Verdict,
    residuals: Vec<String>,
    general_residuals: Vec<String>,
}

#[derive(Serialize)]
struct CheckJson {
    name: String,
    location: String,
    expr: String,
    lie_derivative: String,
    verdict: Verdict,
    residual: String,
    relations: Vec<String>,
    generic_point: bool,
}

#[derive(Serialize)]
struct ReportJson {
    label: &'static str,
    field: String,
    characteristics: Vec<String>,
    pde_check: PdeCheckJson,
    bc_checks: Vec<CheckJson>,
    output_checks: Vec<CheckJson>,
    overall: Verdict,
    reasons: Vec<String>,
    caveat: &'static str,
    residuals: BTreeMap<String, String>,
}

fn check_json(c: &CheckResult, b: &BundleSpec) -> CheckJson {
    CheckJson {
        name: c.name.clone(),
        location: c.location.to_string(),
        expr: c.expr.to_text(b),
        lie_derivative: c.lie_derivative.to_text(b),
        verdict: c.verdict,
        residual: c.residual.to_text(b),
        relations: c.relations.iter().map(|r| r.to_text(b)).collect(),
        generic_point: c.generic_point,
    }
}

impl CertificateReport {
    /// Deterministic JSON rendering with expressions in canonical text form
    /// and a fixed field order.
    pub fn to_json(&self, bundle: &BundleSpec) -> String {
        let b = bundle;
        let mut residuals = BTreeMap::new();
        for (i, r) in self.pde_check.residuals.iter().enumerate() {
            residuals.insert(format!("pde{}", i + 1), r.to_text(b));
        }
        for c in self.bc_checks.iter().chain(&self.output_checks) {
            residuals.insert(format!("{}@{}={}", c.name, b.independent_name(Independent::Z), c.location), c.residual.to_text(b));
        }
        let report = ReportJson {
            label: CERTIFICATE_LABEL,
            field: self.field.to_text(b),
            characteristics: self.characteristics.iter().map(|q| q.to_text(b)).collect(),
            pde_check: PdeCheckJson {
                verdict: self.pde_check.verdict,
                residuals: self.pde_check.residuals.iter().map(|r| r.to_text(b)).collect(),
                general_residuals: self.pde_check.general_residuals.iter().map(|r| r.to_text(b)).collect(),
            },
            bc_checks: self.bc_checks.iter().map(|c| check_json(c, b)).collect(),
            output_checks: self.output_checks.iter().map(|c| check_json(c, b)).collect(),
            overall: self.overall,
            reasons: self.reasons.clone(),
            caveat: self.caveat,
            residuals,
        };
        serde_json::to_string_pretty(&report).expect("report serializes")
    }

    /// Human-readable summary.
    pub fn summary(&self, bundle: &BundleSpec) -> String {
        let b = bundle;
        let mut s = String::new();
        let mark = |v: Verdict| if v.is_pass() { "pass" } else { "FAIL" };
        s.push_str(&format!("field: {}\n", self.field.to_text(b)));
        for (i, q) in self.characteristics.iter().enumerate() {
            s.push_str(&format!("characteristic Q{}: {}\n", i + 1, q.to_text(b)));
        }
        s.push_str(&format!("equations: {}\n", mark(self.pde_check.verdict)));
        for (i, r) in self.pde_check.residuals.iter().enumerate() {
            s.push_str(&format!("  pde{} residual: {}\n", i + 1, r.to_text(b)));
        }
        for (title, checks) in [("boundary", &self.bc_checks), ("output", &self.output_checks)] {
            for c in checks.iter() {
                s.push_str(&format!(
                    "{title} {} at z = {}: {} (Lie derivative {}, residual {}){}\n",
                    c.name,
                    c.location,
                    mark(c.verdict),
                    c.lie_derivative.to_text(b),
                    c.residual.to_text(b),
                    if c.generic_point { " [generic-point verdict]" } else { "" }
                ));
            }
        }
        match self.overall {
            Verdict::Pass => s.push_str(&format!("overall: pass, {CERTIFICATE_LABEL}\n")),
            Verdict::Fail => s.push_str(&format!("overall: FAIL ({})\n", self.reasons.join("; "))),
        }
        s.push_str(&format!("note: {}\n", self.caveat));
        s
    }
}

/// Lie derivative `L_{pr v_Q} c` reduced modulo the equations, for use by
/// numeric cross-checks.
pub fn reduced_output_derivative(
    sys: &SystemDefinition,
    v: &GeneralizedVectorField,
    c: &Expr,
) -> Result<Expr, AnalysisError> {
    let vq = v.evolutionary_form()?;
    let lie = lie_derivative(&vq, c)?;
    Ok(SolutionReducer::new(&sys.pdes)?.reduce(&lie)?)
}
