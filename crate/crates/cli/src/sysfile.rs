//! Line-oriented system-definition files.
//!
//! ```text
//! # comments start with '#'
//! independent z t
//! dependent x
//! domain 0 1
//! pde x_t = (x+1)*x_z
//! boundary z=1 : x = 0
//! output y @ z=0 : x_z / x
//! field v : z*x d/dz + 0 d/dt + (x+1)*x d/dx
//! profile p0 : (1/2)*(1-z)
//! ```
//!
//! `independent`, `dependent` and `domain` may appear anywhere in the file.
//! In a `field` line the coefficient of `d/d<var>` is the text between the
//! previous marker and this one, minus a single leading `+`. Components that
//! are not mentioned are zero. A profile lists one expression in `z` per
//! dependent variable, separated by commas.

use std::fmt;
use std::path::{Path, PathBuf};

use jetsym::analysis::{OutputFunctional, SystemDefinition};
use jetsym::fields::GeneralizedVectorField;
use jetsym::reduction::{BoundaryCondition, DomainSpec, SolvedPde};
use jetsym::symbolic::{parse, BundleSpec, Expr, Independent, Symbol, SymbolicError};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

#[derive(Debug)]
pub enum LoadError {
    Io { path: PathBuf, source: std::io::Error },
    Syntax { line: usize, message: String },
    /// Well-formed input that does not describe a valid system; `line` is
    /// absent for whole-file problems.
    Semantic { line: Option<usize>, message: String },
}

impl fmt::Display for LoadError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LoadError::Io { path, source } => write!(f, "{}: {source}", path.display()),
            LoadError::Syntax { line, message } => write!(f, "line {line}: syntax error: {message}"),
            LoadError::Semantic { line: Some(line), message } => write!(f, "line {line}: {message}"),
            LoadError::Semantic { line: None, message } => f.write_str(message),
        }
    }
}

impl std::error::Error for LoadError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            LoadError::Io { source, .. } => Some(source),
            _ => None,
        }
    }
}

impl LoadError {
    pub fn line(&self) -> Option<usize> {
        match self {
            LoadError::Io { .. } => None,
            LoadError::Syntax { line, .. } => Some(*line),
            LoadError::Semantic { line, .. } => *line,
        }
    }
}

/// A loaded and validated system together with its named fields and
/// initial profiles, in file order.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemFile {
    pub path: Option<PathBuf>,
    pub system: SystemDefinition,
    pub fields: Vec<(String, GeneralizedVectorField)>,
    pub profiles: Vec<(String, Vec<Expr>)>,
}

impl SystemFile {
    pub fn field(&self, name: &str) -> Option<&GeneralizedVectorField> {
        self.fields.iter().find(|(n, _)| n == name).map(|(_, v)| v)
    }

    pub fn profile(&self, name: &str) -> Option<&[Expr]> {
        self.profiles.iter().find(|(n, _)| n == name).map(|(_, p)| p.as_slice())
    }

    /// Render in the file format; loading the result gives an equivalent
    /// system.
    pub fn to_text(&self) -> String {
        let sys = &self.system;
        let b = &sys.bundle;
        let zname = b.independent_name(Independent::Z);
        let mut s = format!(
            "independent {} {}\ndependent {}\ndomain {} {}\n",
            zname,
            b.independent_name(Independent::T),
            b.dependent_names().join(" "),
            sys.domain.z_min(),
            sys.domain.z_max()
        );
        for pde in &sys.pdes {
            s.push_str(&format!(
                "pde {} = {}\n",
                b.symbol_name(Symbol::Jet(pde.principal)),
                pde.rhs.to_text(b)
            ));
        }
        for bc in &sys.bcs {
            s.push_str(&format!("boundary {zname}={} : {} = 0\n", bc.location, bc.expr.to_text(b)));
        }
        for out in &sys.outputs {
            s.push_str(&format!("output {} @ {zname}={} : {}\n", out.name, out.location, out.expr.to_text(b)));
        }
        for (name, v) in &self.fields {
            s.push_str(&format!("field {name} : {}\n", v.to_text(b)));
        }
        for (name, p) in &self.profiles {
            let parts: Vec<String> = p.iter().map(|e| e.to_text(b)).collect();
            s.push_str(&format!("profile {name} : {}\n", parts.join(", ")));
        }
        s
    }
}

pub fn load(path: &Path) -> Result<SystemFile, LoadError> {
    let src = std::fs::read_to_string(path).map_err(|source| LoadError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut file = parse_system(&src)?;
    file.path = Some(path.to_path_buf());
    Ok(file)
}

fn syntax(line: usize, message: impl Into<String>) -> LoadError {
    LoadError::Syntax { line, message: message.into() }
}

fn semantic(line: usize, message: impl Into<String>) -> LoadError {
    LoadError::Semantic {
        line: Some(line),
        message: message.into(),
    }
}

/// Expression errors are syntax errors unless the text parsed but named
/// something undeclared.
fn expr_error(line: usize, what: &str, e: SymbolicError) -> LoadError {
    match e {
        SymbolicError::Syntax { .. } => syntax(line, format!("{what}: {e}")),
        _ => semantic(line, format!("{what}: {e}")),
    }
}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic()) && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Integers, fractions `p/q` and decimals `-0.25`.
pub fn parse_rational(s: &str) -> Option<BigRational> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().ok()?;
        let d: BigInt = d.trim().parse().ok()?;
        return (!d.is_zero()).then(|| BigRational::new(n, d));
    }
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    if int.is_empty() && frac.is_empty() {
        return None;
    }
    if !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits: BigInt = format!("0{int}{frac}").parse().ok()?;
    let r = BigRational::new(digits, num_traits::pow(BigInt::from(10), frac.len()));
    Some(if neg { -r } else { r })
}

struct Line<'a> {
    no: usize,
    keyword: &'a str,
    rest: &'a str,
}

fn lines(src: &str) -> Vec<Line<'_>> {
    src.lines()
        .enumerate()
        .filter_map(|(i, raw)| {
            let text = raw.split_once('#').map_or(raw, |(a, _)| a).trim();
            if text.is_empty() {
                return None;
            }
            let (keyword, rest) = text.split_once(char::is_whitespace).unwrap_or((text, ""));
            Some(Line {
                no: i + 1,
                keyword,
                rest: rest.trim(),
            })
        })
        .collect()
}

/// `<name> <sep> <body>` with `name` an identifier.
fn split_named<'a>(l: &Line<'a>, sep: char) -> Result<(&'a str, &'a str), LoadError> {
    let (name, body) = l
        .rest
        .split_once(sep)
        .ok_or_else(|| syntax(l.no, format!("expected `<name> {sep} ...` after `{}`", l.keyword)))?;
    let name = name.trim();
    if !is_identifier(name) {
        return Err(syntax(l.no, format!("`{name}` is not a valid name")));
    }
    Ok((name, body.trim()))
}

struct Context {
    bundle: BundleSpec,
    domain: DomainSpec,
}

impl Context {
    fn expr(&self, line: usize, what: &str, text: &str) -> Result<Expr, LoadError> {
        if text.trim().is_empty() {
            return Err(syntax(line, format!("{what}: missing expression")));
        }
        parse(text, &self.bundle).map_err(|e| expr_error(line, what, e))
    }

    /// `z=<value>` with the spatial variable on the left.
    fn location(&self, line: usize, text: &str) -> Result<BigRational, LoadError> {
        let zname = self.bundle.independent_name(Independent::Z);
        let (var, value) = text
            .split_once('=')
            .ok_or_else(|| syntax(line, format!("expected `{zname}=<value>`, found `{}`", text.trim())))?;
        if var.trim() != zname {
            return Err(semantic(
                line,
                format!("location must be given in the spatial variable `{zname}`, found `{}`", var.trim()),
            ));
        }
        parse_rational(value).ok_or_else(|| syntax(line, format!("`{}` is not a number", value.trim())))
    }
}

fn header(lines: &[Line<'_>]) -> Result<Context, LoadError> {
    let mut independent: Option<(usize, Vec<&str>)> = None;
    let mut dependent: Option<(usize, Vec<&str>)> = None;
    let mut domain: Option<(usize, DomainSpec)> = None;
    for l in lines {
        let words: Vec<&str> = l.rest.split_whitespace().collect();
        let slot_line = match l.keyword {
            "independent" => {
                if words.len() != 2 {
                    return Err(syntax(l.no, "`independent` takes exactly two names, space then time"));
                }
                independent.replace((l.no, words)).map(|(n, _)| n)
            }
            "dependent" => {
                if words.is_empty() {
                    return Err(syntax(l.no, "`dependent` needs at least one name"));
                }
                dependent.replace((l.no, words)).map(|(n, _)| n)
            }
            "domain" => {
                if words.len() != 2 {
                    return Err(syntax(l.no, "`domain` takes two numbers"));
                }
                let ends: Vec<BigRational> = words
                    .iter()
                    .map(|w| parse_rational(w).ok_or_else(|| syntax(l.no, format!("`{w}` is not a number"))))
                    .collect::<Result<_, _>>()?;
                let d = DomainSpec::new(ends[0].clone(), ends[1].clone())
                    .ok_or_else(|| semantic(l.no, "domain must satisfy z_min < z_max"))?;
                domain.replace((l.no, d)).map(|(n, _)| n)
            }
            _ => None,
        };
        if let Some(first) = slot_line {
            return Err(semantic(l.no, format!("`{}` already declared on line {first}", l.keyword)));
        }
    }
    let (ind_line, ind) = independent.unwrap_or((0, vec!["z", "t"]));
    let (dep_line, dep) = dependent.ok_or_else(|| LoadError::Semantic {
        line: None,
        message: "no dependent variables declared".into(),
    })?;
    let bundle = BundleSpec::new(ind[0], ind[1], dep.iter().copied()).map_err(|e| {
        let line = if ind_line > 0 { ind_line.max(dep_line) } else { dep_line };
        semantic(line, e.to_string())
    })?;
    let (_, domain) = domain.ok_or_else(|| LoadError::Semantic {
        line: None,
        message: "no domain declared".into(),
    })?;
    Ok(Context { bundle, domain })
}

/// Split a field body into `(variable, coefficient)` pairs at the `d/d<var>`
/// markers.
fn field_terms<'a>(line: usize, body: &'a str, ctx: &Context) -> Result<Vec<(&'a str, &'a str)>, LoadError> {
    let b = &ctx.bundle;
    let is_var = |name: &str| b.independent_by_name(name).is_some() || b.dependent_index(name).is_some();
    let bytes = body.as_bytes();
    let mut terms = Vec::new();
    let mut seg_start = 0;
    let mut i = 0;
    while let Some(off) = body[i..].find("d/d") {
        let at = i + off;
        let name_start = at + 3;
        let name_end = body[name_start..]
            .find(|c: char| !(c.is_ascii_alphanumeric() || c == '_'))
            .map_or(body.len(), |k| name_start + k);
        let name = &body[name_start..name_end];
        let starts_term = at == 0 || bytes[at - 1].is_ascii_whitespace();
        if starts_term && is_var(name) {
            let coeff = body[seg_start..at].trim();
            let coeff = if terms.is_empty() { coeff } else { coeff.strip_prefix('+').unwrap_or(coeff).trim() };
            if coeff.is_empty() {
                return Err(syntax(line, format!("missing coefficient before `d/d{name}`")));
            }
            terms.push((name, coeff));
            seg_start = name_end;
        }
        i = name_end.max(at + 1);
    }
    let tail = body[seg_start..].trim();
    if terms.is_empty() {
        return Err(syntax(line, "a field needs at least one `<coefficient> d/d<var>` term"));
    }
    if !tail.is_empty() {
        return Err(syntax(line, format!("unexpected text `{tail}` after the last `d/d` term")));
    }
    Ok(terms)
}

fn field(line: usize, body: &str, ctx: &Context) -> Result<GeneralizedVectorField, LoadError> {
    let b = &ctx.bundle;
    let mut v = GeneralizedVectorField::zero(b.dependent_count());
    let mut seen: Vec<&str> = Vec::new();
    for (name, coeff) in field_terms(line, body, ctx)? {
        if seen.contains(&name) {
            return Err(semantic(line, format!("`d/d{name}` appears twice")));
        }
        seen.push(name);
        let e = ctx.expr(line, &format!("coefficient of d/d{name}"), coeff)?;
        match b.independent_by_name(name) {
            Some(Independent::Z) => v.v_z = e,
            Some(Independent::T) => v.v_t = e,
            None => v.v_x[b.dependent_index(name).expect("checked by field_terms")] = e,
        }
    }
    Ok(v)
}

/// Parse and validate the contents of a system file.
pub fn parse_system(src: &str) -> Result<SystemFile, LoadError> {
    let lines = lines(src);
    for l in &lines {
        if !matches!(
            l.keyword,
            "independent" | "dependent" | "domain" | "pde" | "boundary" | "output" | "field" | "profile"
        ) {
            return Err(syntax(l.no, format!("unknown declaration `{}`", l.keyword)));
        }
    }
    if !lines.iter().any(|l| l.keyword == "pde") {
        return Err(LoadError::Semantic {
            line: None,
            message: "no PDE declared".into(),
        });
    }
    let ctx = header(&lines)?;
    let b = &ctx.bundle;
    let mut pdes: Vec<(usize, SolvedPde)> = Vec::new();
    let mut bcs = Vec::new();
    let mut outputs: Vec<(usize, OutputFunctional)> = Vec::new();
    let mut fields: Vec<(usize, String, GeneralizedVectorField)> = Vec::new();
    let mut profiles: Vec<(usize, String, Vec<Expr>)> = Vec::new();

    for l in &lines {
        match l.keyword {
            "pde" => {
                let (lhs, rhs) = l
                    .rest
                    .split_once('=')
                    .ok_or_else(|| syntax(l.no, "expected `<derivative> = <expression>`"))?;
                let principal = match b.resolve(lhs.trim()) {
                    Ok(Symbol::Jet(c)) if c.order() > 0 => c,
                    Ok(_) => {
                        return Err(semantic(
                            l.no,
                            format!("left-hand side `{}` must be a derivative of a dependent variable", lhs.trim()),
                        ))
                    }
                    Err(e) => return Err(expr_error(l.no, "left-hand side", e)),
                };
                if let Some((first, _)) = pdes.iter().find(|(_, p)| p.principal == principal) {
                    return Err(semantic(
                        l.no,
                        format!(
                            "principal derivative {} is already solved for on line {first}",
                            b.symbol_name(Symbol::Jet(principal))
                        ),
                    ));
                }
                let rhs = ctx.expr(l.no, "right-hand side", rhs)?;
                pdes.push((l.no, SolvedPde::new(principal, rhs)));
            }
            "boundary" => {
                let (loc, eq) = l
                    .rest
                    .split_once(':')
                    .ok_or_else(|| syntax(l.no, "expected `z=<value> : <lhs> = <rhs>`"))?;
                let location = ctx.location(l.no, loc)?;
                if !ctx.domain.is_endpoint(&location) {
                    return Err(semantic(
                        l.no,
                        format!(
                            "boundary location {location} is not a domain endpoint ({} or {})",
                            ctx.domain.z_min(),
                            ctx.domain.z_max()
                        ),
                    ));
                }
                let expr = match eq.split_once('=') {
                    Some((lhs, rhs)) => {
                        let (lhs, rhs) = (ctx.expr(l.no, "boundary condition", lhs)?, ctx.expr(l.no, "boundary condition", rhs)?);
                        if rhs.is_literal_zero() {
                            lhs
                        } else {
                            lhs - rhs
                        }
                    }
                    None => ctx.expr(l.no, "boundary condition", eq)?,
                };
                bcs.push(BoundaryCondition::new(location, expr));
            }
            "output" => {
                let (name, rest) = split_named(l, '@')?;
                let (loc, body) = rest
                    .split_once(':')
                    .ok_or_else(|| syntax(l.no, "expected `<name> @ z=<value> : <expression>`"))?;
                let location = ctx.location(l.no, loc)?;
                if !ctx.domain.contains_closed(&location) {
                    return Err(semantic(l.no, format!("output location {location} lies outside the domain")));
                }
                if let Some((first, _)) = outputs.iter().find(|(_, o)| o.name == name) {
                    return Err(semantic(l.no, format!("output `{name}` already declared on line {first}")));
                }
                let expr = ctx.expr(l.no, "output", body)?;
                outputs.push((
                    l.no,
                    OutputFunctional {
                        name: name.to_string(),
                        expr,
                        location,
                    },
                ));
            }
            "field" => {
                let (name, body) = split_named(l, ':')?;
                if let Some((first, ..)) = fields.iter().find(|(_, n, _)| n == name) {
                    return Err(semantic(l.no, format!("field `{name}` already declared on line {first}")));
                }
                fields.push((l.no, name.to_string(), field(l.no, body, &ctx)?));
            }
            "profile" => {
                let (name, body) = split_named(l, ':')?;
                if let Some((first, ..)) = profiles.iter().find(|(_, n, _)| n == name) {
                    return Err(semantic(l.no, format!("profile `{name}` already declared on line {first}")));
                }
                let parts: Vec<Expr> = body
                    .split(',')
                    .map(|part| ctx.expr(l.no, "profile", part))
                    .collect::<Result<_, _>>()?;
                if parts.len() != b.dependent_count() {
                    return Err(semantic(
                        l.no,
                        format!(
                            "profile `{name}` has {} components, expected one per dependent variable ({})",
                            parts.len(),
                            b.dependent_count()
                        ),
                    ));
                }
                if parts.iter().any(|e| e.symbols().iter().any(|s| *s != Symbol::Z)) {
                    return Err(semantic(
                        l.no,
                        format!(
                            "profile `{name}` may only depend on `{}`",
                            b.independent_name(Independent::Z)
                        ),
                    ));
                }
                profiles.push((l.no, name.to_string(), parts));
            }
            _ => {}
        }
    }

    let system = SystemDefinition {
        bundle: ctx.bundle.clone(),
        domain: ctx.domain.clone(),
        pdes: pdes.into_iter().map(|(_, p)| p).collect(),
        bcs,
        outputs: outputs.into_iter().map(|(_, o)| o).collect(),
    };
    system.validate().map_err(|e| LoadError::Semantic {
        line: None,
        message: e.to_string(),
    })?;
    Ok(SystemFile {
        path: None,
        system,
        fields: fields.into_iter().map(|(_, n, v)| (n, v)).collect(),
        profiles: profiles.into_iter().map(|(_, n, p)| (n, p)).collect(),
    })
}

/// Exact comparison up to equivalence of the expressions.
pub fn equivalent(a: &SystemFile, b: &SystemFile) -> bool {
    let eq = |x: &Expr, y: &Expr| x.equivalent(y);
    let (s, t) = (&a.system, &b.system);
    s.bundle == t.bundle
        && s.domain == t.domain
        && s.pdes.len() == t.pdes.len()
        && s.pdes.iter().zip(&t.pdes).all(|(p, q)| p.principal == q.principal && eq(&p.rhs, &q.rhs))
        && s.bcs.len() == t.bcs.len()
        && s.bcs.iter().zip(&t.bcs).all(|(p, q)| p.location == q.location && eq(&p.expr, &q.expr))
        && s.outputs.len() == t.outputs.len()
        && s.outputs
            .iter()
            .zip(&t.outputs)
            .all(|(p, q)| p.name == q.name && p.location == q.location && eq(&p.expr, &q.expr))
        && a.fields.len() == b.fields.len()
        && a.fields.iter().zip(&b.fields).all(|((n, v), (m, w))| {
            n == m
                && eq(&v.v_z, &w.v_z)
                && eq(&v.v_t, &w.v_t)
                && v.v_x.len() == w.v_x.len()
                && v.v_x.iter().zip(&w.v_x).all(|(x, y)| eq(x, y))
        })
        && a.profiles.len() == b.profiles.len()
        && a
            .profiles
            .iter()
            .zip(&b.profiles)
            .all(|((n, p), (m, q))| n == m && p.len() == q.len() && p.iter().zip(q).all(|(x, y)| eq(x, y)))
}
