//! Property checks shared by the regular test suite and the acceptance run.

use std::collections::BTreeMap;

use jetsym::analysis::SystemDefinition;
use jetsym::fields::{lie_derivative, EvolutionaryField};
use jetsym::numeric::{flow, FieldState, Grid};
use jetsym::reduction::{reduce_to_normal_form, SolvedPde};
use jetsym::symbolic::{
    gcd, is_identically_zero, normalize, parse, total_derivative, BundleSpec, Expr, Independent, JetCoordinate,
    Poly, Symbol,
};
use num_traits::Zero;
use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestRunner};

use super::series::{eval_series, qf, solve_evolution, Series, Q};
use super::{example_field, example_system, p};

type Check = Result<(), TestCaseError>;

fn jet_leaf(max_order: u32) -> BoxedStrategy<Expr> {
    let mut coords = Vec::new();
    for jz in 0..=max_order {
        for jt in 0..=(max_order - jz) {
            coords.push(Expr::jet(0, jz, jt));
        }
    }
    prop::sample::select(coords).boxed()
}

fn leaf(max_order: u32) -> BoxedStrategy<Expr> {
    prop_oneof![
        2 => (-3i64..=3).prop_map(Expr::int),
        1 => (-4i64..=4, 2i64..=3).prop_map(|(n, d)| Expr::rational(n, d)),
        1 => Just(Expr::z()),
        1 => Just(Expr::t()),
        5 => jet_leaf(max_order),
    ]
    .boxed()
}

/// Polynomial expression trees over `z`, `t` and jet coordinates of order
/// at most `max_order`.
pub fn poly_expr(max_order: u32) -> BoxedStrategy<Expr> {
    leaf(max_order)
        .prop_recursive(3, 12, 3, |inner| {
            prop_oneof![
                prop::collection::vec(inner.clone(), 2..4).prop_map(Expr::Add),
                prop::collection::vec(inner.clone(), 2..3).prop_map(Expr::Mul),
                inner.clone().prop_map(|a| Expr::Neg(Box::new(a))),
                (inner.clone(), 0i64..=2).prop_map(|(a, k)| Expr::Pow(Box::new(a), k)),
                (inner.clone(), inner).prop_map(|(a, b)| a - b),
            ]
        })
        .boxed()
}

/// Polynomials or quotients by a denominator `1 + b²` that never vanishes.
pub fn rat_expr(max_order: u32) -> BoxedStrategy<Expr> {
    prop_oneof![
        2 => poly_expr(max_order),
        1 => (poly_expr(max_order), poly_expr(max_order))
            .prop_map(|(a, b)| Expr::Div(Box::new(a), Box::new(Expr::one() + b.clone() * b))),
    ]
    .boxed()
}

fn rational() -> BoxedStrategy<Q> {
    (-9i64..=9, 1i64..=5).prop_map(|(n, d)| qf(n, d)).boxed()
}

/// Values for `z`, `t` and every scalar jet coordinate of order ≤ 6.
pub fn point() -> BoxedStrategy<BTreeMap<Symbol, Q>> {
    let mut symbols = vec![Symbol::Z, Symbol::T];
    for k in 0..=6u32 {
        for jt in 0..=k {
            symbols.push(Symbol::jet(0, k - jt, jt));
        }
    }
    prop::collection::vec(rational(), symbols.len())
        .prop_map(move |vals| symbols.iter().copied().zip(vals).collect())
        .boxed()
}

/// Random polynomial series of degree ≤ 3 in `σ` and `τ`.
fn series(ms: usize, mt: usize) -> BoxedStrategy<Series> {
    prop::collection::vec(rational(), 16)
        .prop_map(move |vals| {
            let mut s = Series::zero(ms, mt);
            for (k, v) in vals.into_iter().enumerate() {
                s.c[k / 4][k % 4] = v;
            }
            s
        })
        .boxed()
}

fn dir() -> BoxedStrategy<Independent> {
    prop_oneof![Just(Independent::Z), Just(Independent::T)].boxed()
}

fn eval(e: &Expr, pt: &BTreeMap<Symbol, Q>) -> Option<Q> {
    e.evaluate(pt).ok()
}

fn d(e: &Expr, dir: Independent) -> Expr {
    total_derivative(e, dir, 1).unwrap()
}

/// Equivalent as rational functions, and equal at `pt` under plain tree
/// evaluation whenever both sides are defined there.
fn same(a: &Expr, b: &Expr, pt: &BTreeMap<Symbol, Q>) -> Check {
    prop_assert!(a.equivalent(b), "not equivalent:\n  {a:?}\n  {b:?}");
    if let (Some(x), Some(y)) = (eval(a, pt), eval(b, pt)) {
        prop_assert_eq!(x, y);
    }
    Ok(())
}

pub fn total_derivative_linearity(cases: u32) -> Result<(), String> {
    run(cases, (rat_expr(2), rat_expr(2), -3i64..=3, dir(), point()), |(a, b, k, dir, pt)| {
        let lhs = d(&(a.clone() + Expr::int(k) * b.clone()), dir);
        let rhs = d(&a, dir) + Expr::int(k) * d(&b, dir);
        same(&lhs, &rhs, &pt)
    })
}

pub fn total_derivative_leibniz(cases: u32) -> Result<(), String> {
    run(cases, (rat_expr(2), rat_expr(2), dir(), point()), |(a, b, dir, pt)| {
        let lhs = d(&(a.clone() * b.clone()), dir);
        let rhs = d(&a, dir) * b.clone() + a.clone() * d(&b, dir);
        same(&lhs, &rhs, &pt)
    })
}

pub fn total_derivatives_commute(cases: u32) -> Result<(), String> {
    run(cases, (rat_expr(2), point()), |(a, pt)| {
        let zt = d(&d(&a, Independent::Z), Independent::T);
        let tz = d(&d(&a, Independent::T), Independent::Z);
        same(&zt, &tz, &pt)
    })
}

/// `D_z e` and `D_t e` on the jet of an arbitrary function agree with the
/// first-order Taylor coefficients of `e` composed with that function.
pub fn total_derivative_chain_rule(cases: u32) -> Result<(), String> {
    run(cases, (rat_expr(2), series(8, 8), rational(), rational()), |(a, s, z0, t0)| {
        let Some(composed) = eval_series(&a, &[s.clone()], &z0, &t0) else {
            return Ok(());
        };
        let mut pt = BTreeMap::from([(Symbol::Z, z0.clone()), (Symbol::T, t0.clone())]);
        for jz in 0..=4u32 {
            for jt in 0..=(4 - jz) {
                pt.insert(Symbol::jet(0, jz, jt), s.derivative_at_origin(jz, jt));
            }
        }
        let dz = eval(&d(&a, Independent::Z), &pt);
        let dt = eval(&d(&a, Independent::T), &pt);
        prop_assert_eq!(dz, Some(composed.derivative_at_origin(1, 0)));
        prop_assert_eq!(dt, Some(composed.derivative_at_origin(0, 1)));
        Ok(())
    })
}

fn field(qx: Expr) -> EvolutionaryField {
    EvolutionaryField::new(vec![qx])
}

fn lie(v: &EvolutionaryField, e: &Expr) -> Expr {
    lie_derivative(v, e).unwrap()
}

pub fn lie_derivative_linearity(cases: u32) -> Result<(), String> {
    run(
        cases,
        (poly_expr(1), poly_expr(1), rat_expr(2), rat_expr(2), -3i64..=3, point()),
        |(q1, q2, a, b, k, pt)| {
            let v1 = field(q1.clone());
            let v2 = field(q2.clone());
            same(
                &lie(&v1, &(a.clone() + Expr::int(k) * b.clone())),
                &(lie(&v1, &a) + Expr::int(k) * lie(&v1, &b)),
                &pt,
            )?;
            same(&lie(&field(q1 + q2), &a), &(lie(&v1, &a) + lie(&v2, &a)), &pt)
        },
    )
}

pub fn lie_derivative_leibniz(cases: u32) -> Result<(), String> {
    run(cases, (poly_expr(1), rat_expr(2), rat_expr(2), point()), |(qx, a, b, pt)| {
        let v = field(qx);
        same(
            &lie(&v, &(a.clone() * b.clone())),
            &(lie(&v, &a) * b.clone() + a.clone() * lie(&v, &b)),
            &pt,
        )
    })
}

/// Evolutionary fields commute with total derivatives, and their prolongation
/// coefficient at `x_J` is `D_J Q`.
pub fn lie_derivative_commutes_with_total_derivatives(cases: u32) -> Result<(), String> {
    run(cases, (poly_expr(1), rat_expr(2), dir(), point()), |(qx, a, dir, pt)| {
        let v = field(qx.clone());
        same(&lie(&v, &d(&a, dir)), &d(&lie(&v, &a), dir), &pt)?;
        same(
            &lie(&v, &Expr::jet(0, 1, 1)),
            &d(&d(&qx, Independent::Z), Independent::T),
            &pt,
        )
    })
}

pub fn normalize_idempotent(cases: u32) -> Result<(), String> {
    run(cases, (rat_expr(3), point()), |(a, pt)| {
        let n1 = normalize(&a).unwrap();
        let n2 = normalize(&n1).unwrap();
        prop_assert_eq!(&n1, &n2);
        if let (Some(x), Some(y)) = (eval(&a, &pt), eval(&n1, &pt)) {
            prop_assert_eq!(x, y);
        }
        Ok(())
    })
}

pub fn print_parse_round_trip(cases: u32) -> Result<(), String> {
    let b = BundleSpec::scalar();
    run(cases, rat_expr(3), move |a| {
        let text = a.to_text(&b);
        let back = parse(&text, &b).map_err(|e| TestCaseError::fail(format!("{text}: {e}")))?;
        prop_assert!(back.equivalent(&a), "{text}");
        prop_assert_eq!(back.to_text(&b), text.clone());
        let n = normalize(&a).unwrap();
        let reparsed = normalize(&parse(&n.to_text(&b), &b).unwrap()).unwrap();
        prop_assert_eq!(reparsed, n);
        Ok(())
    })
}

/// Second example system: `x_t = z·x_zz + x²`.
fn diffusion_system() -> Vec<SolvedPde> {
    vec![SolvedPde::new(JetCoordinate::new(0, 0, 1), p("z*x_zz + x^2"))]
}

fn check_reduction(sys: &[SolvedPde], z_order: usize, e: &Expr, init: &[Q], z0: &Q, t0: &Q) -> Check {
    let r = reduce_to_normal_form(e, sys).unwrap();
    prop_assert!(
        r.jet_coordinates().iter().all(|c| c.index.j_t == 0),
        "time derivative left after reduction: {r:?}"
    );
    prop_assert_eq!(&reduce_to_normal_form(&r, sys).unwrap(), &r);
    if e.jet_coordinates().iter().all(|c| c.index.j_t == 0) {
        prop_assert!(r.equivalent(e));
    }
    // on a genuine solution the two agree
    let poly = init
        .iter()
        .enumerate()
        .fold(Expr::zero(), |acc, (k, c)| acc + Expr::Const(c.clone()) * Expr::z().pow(k as i64));
    let sol = solve_evolution(&[sys[0].rhs.clone()], &[poly], z0, t0, 4, 4, z_order);
    let pt = sol.jet_point(z0, t0);
    prop_assert_eq!(eval(e, &pt), eval(&r, &pt));
    Ok(())
}

pub fn reduce_idempotent_and_conservative(cases: u32) -> Result<(), String> {
    let coeffs = prop::collection::vec(rational(), 4);
    run(cases, (rat_expr(2), coeffs, rational(), rational()), |(e, init, z0, t0)| {
        check_reduction(&example_system().pdes, 1, &e, &init, &z0, &t0)?;
        check_reduction(&diffusion_system(), 2, &e, &init, &z0, &t0)
    })
}

pub fn zero_test_sound(cases: u32) -> Result<(), String> {
    run(cases, (rat_expr(2), rat_expr(2), point()), |(a, b, pt)| {
        // algebraically zero by construction
        let z = (a.clone() + b.clone()) * (a.clone() - b.clone()) - (a.clone() * a.clone() - b.clone() * b.clone());
        prop_assert!(is_identically_zero(&z));
        let diff = a.clone() - b.clone();
        match eval(&diff, &pt) {
            Some(v) if !v.is_zero() => prop_assert!(!is_identically_zero(&diff)),
            Some(_) | None => {}
        }
        if is_identically_zero(&diff) {
            if let Some(v) = eval(&diff, &pt) {
                prop_assert!(v.is_zero());
            }
        }
        Ok(())
    })
}

/// Flowing by `ε₁` then `ε₂` matches flowing by `ε₁ + ε₂`.
pub fn flow_group_property(cases: u32) -> Result<(), String> {
    let sys: SystemDefinition = example_system();
    let v = example_field();
    let grid = Grid::new(0.0, 1.0, 41).unwrap();
    run(
        cases,
        (0.1f64..0.8, -0.2f64..0.2, -0.05f64..0.05, -0.05f64..0.05),
        move |(a, b, e1, e2)| {
            let x0 = FieldState::new(
                vec![grid.z_values().iter().map(|z| a * (1.0 - z) + b * z * (1.0 - z)).collect()],
                0.0,
            );
            let d_eps = Some(1e-3);
            let one = flow(&sys, &v, &x0, &grid, e1 + e2, d_eps).unwrap().transformed;
            let mid = flow(&sys, &v, &x0, &grid, e1, d_eps).unwrap().transformed;
            let two = flow(&sys, &v, &mid, &grid, e2, d_eps).unwrap().transformed;
            prop_assert!(one.max_distance(&two) <= 1e-6, "{}", one.max_distance(&two));
            Ok(())
        },
    )
}

fn poly(e: &Expr) -> Poly {
    e.to_rational().unwrap().numerator().clone()
}

/// `gcd(f·g, f·h)` is a multiple of `f` and divides both products.
pub fn gcd_divisibility(cases: u32) -> Result<(), String> {
    run(cases, (poly_expr(1), poly_expr(1), poly_expr(1)), |(f, g, h)| {
        let (f, g, h) = (poly(&f), poly(&g), poly(&h));
        let (a, b) = (f.mul(&g), f.mul(&h));
        let d = gcd(&a, &b);
        if a.is_zero() && b.is_zero() {
            prop_assert!(d.is_zero());
            return Ok(());
        }
        prop_assert!(a.div_exact(&d).is_some(), "gcd does not divide f*g");
        prop_assert!(b.div_exact(&d).is_some(), "gcd does not divide f*h");
        if !f.is_zero() {
            prop_assert!(d.div_exact(&f).is_some(), "f does not divide the gcd");
        }
        Ok(())
    })
}

/// All suites with their names, for the acceptance run.
pub fn suites() -> Vec<(&'static str, fn(u32) -> Result<(), String>)> {
    vec![
        ("total derivative linearity", total_derivative_linearity),
        ("total derivative Leibniz rule", total_derivative_leibniz),
        ("D_z D_t commutation", total_derivatives_commute),
        ("total derivative chain rule vs series", total_derivative_chain_rule),
        ("Lie derivative linearity", lie_derivative_linearity),
        ("Lie derivative Leibniz rule", lie_derivative_leibniz),
        ("Lie derivative commutes with D", lie_derivative_commutes_with_total_derivatives),
        ("normalize idempotence", normalize_idempotent),
        ("print/parse round trip", print_parse_round_trip),
        ("reduce idempotence and conservativity", reduce_idempotent_and_conservative),
        ("zero test soundness", zero_test_sound),
        ("flow group property", flow_group_property),
        ("gcd divisibility", gcd_divisibility),
    ]
}

fn run<S: Strategy>(cases: u32, strategy: S, test: impl Fn(S::Value) -> Check) -> Result<(), String> {
    let mut runner = TestRunner::new(Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    });
    runner.run(&strategy, test).map_err(|e| e.to_string())
}
