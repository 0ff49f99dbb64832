//! Bundle and jet-space coordinates.
//!
//! The base is two-dimensional with a spatial variable `z` and a temporal
//! variable `t`; the fibre carries `q` dependent variables. A jet coordinate
//! `x^α_J` names the derivative `∂^{j_z}_z ∂^{j_t}_t x^α` and is treated as an
//! algebraically independent symbol.

use std::cmp::Ordering;
use std::fmt;

use super::SymbolicError;

/// The independent variables of the base.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Independent {
    Z,
    T,
}

impl Independent {
    pub fn index(self) -> usize {
        match self {
            Independent::Z => 0,
            Independent::T => 1,
        }
    }
}

/// Order of differentiation with respect to `z` and `t`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct MultiIndex {
    pub j_z: u32,
    pub j_t: u32,
}

impl MultiIndex {
    pub const ZERO: MultiIndex = MultiIndex { j_z: 0, j_t: 0 };

    pub fn new(j_z: u32, j_t: u32) -> Self {
        Self { j_z, j_t }
    }

    pub fn order(self) -> u32 {
        self.j_z + self.j_t
    }

    /// The multi-index one order higher in direction `dir`.
    pub fn raised(self, dir: Independent) -> Self {
        match dir {
            Independent::Z => Self::new(self.j_z + 1, self.j_t),
            Independent::T => Self::new(self.j_z, self.j_t + 1),
        }
    }

    /// The multi-index one order lower in direction `dir`, if any.
    pub fn lowered(self, dir: Independent) -> Option<Self> {
        match dir {
            Independent::Z if self.j_z > 0 => Some(Self::new(self.j_z - 1, self.j_t)),
            Independent::T if self.j_t > 0 => Some(Self::new(self.j_z, self.j_t - 1)),
            _ => None,
        }
    }

    /// Componentwise `self <= other`.
    pub fn divides(self, other: MultiIndex) -> bool {
        self.j_z <= other.j_z && self.j_t <= other.j_t
    }

    pub fn checked_sub(self, other: MultiIndex) -> Option<MultiIndex> {
        if other.divides(self) {
            Some(Self::new(self.j_z - other.j_z, self.j_t - other.j_t))
        } else {
            None
        }
    }

    pub fn add(self, other: MultiIndex) -> MultiIndex {
        Self::new(self.j_z + other.j_z, self.j_t + other.j_t)
    }

    /// All multi-indices with total order at most `k`, in increasing order.
    pub fn up_to(k: u32) -> impl Iterator<Item = MultiIndex> {
        (0..=k).flat_map(|n| (0..=n).map(move |j_z| MultiIndex::new(j_z, n - j_z)))
    }
}

/// The symbol `x^α_J`; `dep` is zero-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct JetCoordinate {
    pub dep: usize,
    pub index: MultiIndex,
}

impl JetCoordinate {
    pub fn new(dep: usize, j_z: u32, j_t: u32) -> Self {
        Self {
            dep,
            index: MultiIndex::new(j_z, j_t),
        }
    }

    pub fn base(dep: usize) -> Self {
        Self::new(dep, 0, 0)
    }

    pub fn order(self) -> u32 {
        self.index.order()
    }

    pub fn raised(self, dir: Independent) -> Self {
        Self {
            dep: self.dep,
            index: self.index.raised(dir),
        }
    }

    /// True if `other` is obtained from `self` by total differentiation.
    pub fn is_ancestor_of(self, other: JetCoordinate) -> bool {
        self.dep == other.dep && self.index.divides(other.index)
    }

    fn sort_key(self) -> (usize, u32, u32) {
        (self.dep, self.order(), self.index.j_z)
    }
}

impl Ord for JetCoordinate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.sort_key().cmp(&other.sort_key())
    }
}

impl PartialOrd for JetCoordinate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// A variable of an expression. The derived order (independent variables
/// first, `z` before `t`, then jet coordinates by `(α, |J|, j_z)`) is the
/// variable order used by the canonical form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Symbol {
    Indep(Independent),
    Jet(JetCoordinate),
}

impl Symbol {
    pub const Z: Symbol = Symbol::Indep(Independent::Z);
    pub const T: Symbol = Symbol::Indep(Independent::T);

    pub fn jet(dep: usize, j_z: u32, j_t: u32) -> Symbol {
        Symbol::Jet(JetCoordinate::new(dep, j_z, j_t))
    }

    pub fn as_jet(self) -> Option<JetCoordinate> {
        match self {
            Symbol::Jet(c) => Some(c),
            Symbol::Indep(_) => None,
        }
    }
}

impl From<JetCoordinate> for Symbol {
    fn from(c: JetCoordinate) -> Self {
        Symbol::Jet(c)
    }
}

impl From<Independent> for Symbol {
    fn from(i: Independent) -> Self {
        Symbol::Indep(i)
    }
}

/// Names of the variables of the bundle `(z, t, x^α) → (z, t)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BundleSpec {
    independent: [String; 2],
    dependent: Vec<String>,
}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic())
        && chars.all(|c| c.is_ascii_alphanumeric())
}

impl BundleSpec {
    /// Names must be plain identifiers (`[A-Za-z][A-Za-z0-9]*`) and pairwise
    /// distinct. Underscores are reserved for derivative suffixes.
    pub fn new<S: Into<String>>(
        spatial: S,
        temporal: S,
        dependent: impl IntoIterator<Item = S>,
    ) -> Result<Self, SymbolicError> {
        let independent = [spatial.into(), temporal.into()];
        let dependent: Vec<String> = dependent.into_iter().map(Into::into).collect();
        if dependent.is_empty() {
            return Err(SymbolicError::InvalidBundle(
                "at least one dependent variable is required".into(),
            ));
        }
        let all: Vec<&String> = independent.iter().chain(dependent.iter()).collect();
        for (i, name) in all.iter().enumerate() {
            if !is_identifier(name) {
                return Err(SymbolicError::InvalidBundle(format!(
                    "`{name}` is not a valid variable name"
                )));
            }
            if all[..i].contains(name) {
                return Err(SymbolicError::InvalidBundle(format!(
                    "variable `{name}` declared twice"
                )));
            }
        }
        Ok(Self {
            independent,
            dependent,
        })
    }

    /// The bundle `(z, t, x)` used throughout the examples.
    pub fn scalar() -> Self {
        Self::new("z", "t", ["x"]).expect("valid names")
    }

    pub fn independent_name(&self, i: Independent) -> &str {
        &self.independent[i.index()]
    }

    pub fn dependent_names(&self) -> &[String] {
        &self.dependent
    }

    pub fn dependent_count(&self) -> usize {
        self.dependent.len()
    }

    pub fn dependent_index(&self, name: &str) -> Option<usize> {
        self.dependent.iter().position(|d| d == name)
    }

    pub fn independent_by_name(&self, name: &str) -> Option<Independent> {
        if self.independent[0] == name {
            Some(Independent::Z)
        } else if self.independent[1] == name {
            Some(Independent::T)
        } else {
            None
        }
    }

    pub fn contains(&self, s: Symbol) -> bool {
        match s {
            Symbol::Indep(_) => true,
            Symbol::Jet(c) => c.dep < self.dependent.len(),
        }
    }

    /// Canonical spelling: `x`, `x_z`, `x_zzt` (z before t).
    pub fn symbol_name(&self, s: Symbol) -> String {
        match s {
            Symbol::Indep(i) => self.independent_name(i).to_string(),
            Symbol::Jet(c) => {
                let mut name = self.dependent[c.dep].clone();
                if c.order() > 0 {
                    name.push('_');
                    for _ in 0..c.index.j_z {
                        name.push_str(&self.independent[0]);
                    }
                    for _ in 0..c.index.j_t {
                        name.push_str(&self.independent[1]);
                    }
                }
                name
            }
        }
    }

    /// Resolve an identifier to a symbol.
    pub fn resolve(&self, ident: &str) -> Result<Symbol, SymbolicError> {
        if let Some(i) = self.independent_by_name(ident) {
            return Ok(Symbol::Indep(i));
        }
        if let Some(dep) = self.dependent_index(ident) {
            return Ok(Symbol::Jet(JetCoordinate::base(dep)));
        }
        if let Some((head, suffix)) = ident.split_once('_') {
            if let Some(dep) = self.dependent_index(head) {
                let index = self.parse_suffix(suffix).ok_or_else(|| {
                    SymbolicError::MalformedSuffix(ident.to_string())
                })?;
                return Ok(Symbol::Jet(JetCoordinate { dep, index }));
            }
        }
        Err(SymbolicError::UnknownIdentifier(ident.to_string()))
    }

    fn parse_suffix(&self, mut suffix: &str) -> Option<MultiIndex> {
        if suffix.is_empty() {
            return None;
        }
        // longest name first so that e.g. `tt` is not read as `t`,`t` when a
        // variable is literally called `tt`
        let mut names = [
            (self.independent[0].as_str(), Independent::Z),
            (self.independent[1].as_str(), Independent::T),
        ];
        names.sort_by_key(|(n, _)| std::cmp::Reverse(n.len()));
        let mut index = MultiIndex::ZERO;
        while !suffix.is_empty() {
            let (name, dir) = names.iter().find(|(n, _)| suffix.starts_with(n))?;
            index = index.raised(*dir);
            suffix = &suffix[name.len()..];
        }
        Some(index)
    }
}

impl fmt::Display for BundleSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({}, {}, {})",
            self.independent[0],
            self.independent[1],
            self.dependent.join(", ")
        )
    }
}
