#![allow(dead_code)]

pub mod props;
pub mod series;

use jetsym::analysis::{OutputFunctional, SystemDefinition};
use jetsym::fields::GeneralizedVectorField;
use jetsym::reduction::{BoundaryCondition, DomainSpec, SolvedPde};
use jetsym::symbolic::{parse, BundleSpec, Expr, JetCoordinate};
use num_rational::BigRational;
use num_traits::{One, Zero};

pub fn p(s: &str) -> Expr {
    parse(s, &BundleSpec::scalar()).unwrap()
}

/// `x_t = (x+1)·x_z` on `[0, 1]`, `x = 0` at `z = 1`, output `y = x_z/x` at `z = 0`.
pub fn example_system() -> SystemDefinition {
    SystemDefinition {
        bundle: BundleSpec::scalar(),
        domain: DomainSpec::new(BigRational::zero(), BigRational::one()).unwrap(),
        pdes: vec![SolvedPde::new(JetCoordinate::new(0, 0, 1), p("(x+1)*x_z"))],
        bcs: vec![BoundaryCondition::new(BigRational::one(), p("x"))],
        outputs: vec![OutputFunctional {
            name: "y".into(),
            expr: p("x_z/x"),
            location: BigRational::zero(),
        }],
    }
}

/// `z·x ∂_z + (x+1)·x ∂_x`.
pub fn example_field() -> GeneralizedVectorField {
    GeneralizedVectorField::new(p("z*x"), p("0"), vec![p("(x+1)*x")])
}

pub const EXAMPLE_PROFILE: &str = "1/2*(1-z)";

/// Exact solution for the initial profile `a(1−z)`: `x` is constant along
/// `dz/dt = −(x+1)`. Characteristics leaving the line give
/// `x = a(1−t−z)/(1+at)` for `z ≤ 1−t`; those entering through `z = 1`
/// carry the boundary value `0`.
pub fn characteristics_x(a: f64, z: f64, t: f64) -> f64 {
    if z <= 1.0 - t {
        a * (1.0 - t - z) / (1.0 + a * t)
    } else {
        0.0
    }
}

/// `y = x_z/x` at `z = 0` along the same solution; independent of `a`.
pub fn characteristics_y(t: f64) -> f64 {
    -1.0 / (1.0 - t)
}
