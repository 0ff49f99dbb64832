//! Symmetry checks against jets of genuine series solutions, computed
//! without the reducer.

mod common;

use common::series::{q, qf, solve_evolution, Q};
use common::{example_field, example_system, p};
use jetsym::analysis::{certify_nonobservability, check_pde_symmetry};
use jetsym::fields::{lie_derivative, GeneralizedVectorField};
use jetsym::symbolic::{Expr, Symbol};
use num_traits::Zero;

fn initial_data() -> Vec<Vec<Q>> {
    vec![
        vec![qf(1, 2), qf(-1, 2)],
        vec![qf(1, 3), q(1), qf(-2, 5)],
        vec![q(2), qf(-3, 4), qf(1, 7), qf(1, 9)],
    ]
}

fn poly_in_z(c: &[Q]) -> Expr {
    c.iter()
        .enumerate()
        .fold(Expr::zero(), |acc, (k, c)| acc + Expr::Const(c.clone()) * Expr::z().pow(k as i64))
}

/// Values of `e` on the jets of several solutions of `x_t = (x+1)·x_z`.
fn on_solutions(e: &Expr) -> Vec<Q> {
    let rhs = example_system().pdes[0].rhs.clone();
    let mut out = Vec::new();
    for init in initial_data() {
        for (z0, t0) in [(qf(1, 5), qf(1, 10)), (qf(-1, 3), qf(2, 7))] {
            let sol = solve_evolution(&[rhs.clone()], &[poly_in_z(&init)], &z0, &t0, 3, 3, 1);
            out.push(e.evaluate(&sol.jet_point(&z0, &t0)).expect("defined on the jet"));
        }
    }
    out
}

fn delta() -> Expr {
    example_system().pdes[0].delta()
}

#[test]
fn series_solutions_satisfy_the_equation() {
    assert!(on_solutions(&delta()).iter().all(Zero::is_zero));
    assert!(on_solutions(&p("x_zt - (x+1)*x_zz - x_z^2")).iter().all(Zero::is_zero));
}

#[test]
fn example_field_preserves_the_equation_on_solutions() {
    let v = example_field();
    let general = lie_derivative(&v, &delta()).unwrap();
    let evolutionary = lie_derivative(&v.evolutionary_form().unwrap(), &delta()).unwrap();
    // neither side is zero before restricting to solutions
    assert!(!general.equivalent(&Expr::zero()));
    assert!(!evolutionary.equivalent(&Expr::zero()));
    assert!(on_solutions(&general).iter().all(Zero::is_zero));
    assert!(on_solutions(&evolutionary).iter().all(Zero::is_zero));
}

#[test]
fn non_symmetries_do_not_vanish_on_solutions() {
    for v in [
        GeneralizedVectorField::new(p("0"), p("0"), vec![p("1")]),
        GeneralizedVectorField::new(p("0"), p("0"), vec![p("x_z*x_z")]),
        GeneralizedVectorField::new(p("0"), p("0"), vec![p("z*x")]),
    ] {
        let l = lie_derivative(&v, &delta()).unwrap();
        assert!(on_solutions(&l).iter().any(|x| !x.is_zero()), "{v:?}");
        let check = check_pde_symmetry(&example_system(), &v).unwrap();
        assert!(!check.verdict.is_pass());
    }
}

#[test]
fn reduced_residuals_agree_with_the_series_oracle() {
    for (v, symmetric) in [
        (example_field(), true),
        (GeneralizedVectorField::new(p("0"), p("1"), vec![p("0")]), true),
        (GeneralizedVectorField::new(p("1"), p("0"), vec![p("0")]), true),
        (GeneralizedVectorField::new(p("z"), p("t"), vec![p("0")]), true),
        (GeneralizedVectorField::new(p("z"), p("0"), vec![p("0")]), false),
        (GeneralizedVectorField::new(p("0"), p("0"), vec![p("x")]), false),
    ] {
        let oracle = on_solutions(&lie_derivative(&v, &delta()).unwrap()).iter().all(Zero::is_zero);
        assert_eq!(oracle, symmetric, "{v:?}");
        let check = check_pde_symmetry(&example_system(), &v).unwrap();
        assert_eq!(check.verdict.is_pass(), symmetric, "{v:?}");
        assert!(check.residuals.iter().all(|r| r.jet_coordinates().iter().all(|c| c.index.j_t == 0)));
    }
}

#[test]
fn boundary_and_output_lie_derivatives_vanish_on_constrained_solutions() {
    // exact family x = a(1-t-z)/(1+at); it vanishes along z = 1-t and has
    // x_zz = 0
    let vq = example_field().evolutionary_form().unwrap();
    let lx = lie_derivative(&vq, &p("x")).unwrap();
    let ly = lie_derivative(&vq, &p("x_z/x")).unwrap();
    for (a, t0) in [(qf(1, 2), qf(1, 4)), (q(2), qf(1, 3)), (qf(1, 5), qf(1, 2))] {
        let jet = |z: Q| {
            let den = q(1) + &a * &t0;
            let s = q(1) - &t0 - &z;
            let mut m = std::collections::BTreeMap::new();
            m.insert(Symbol::Z, z.clone());
            m.insert(Symbol::T, t0.clone());
            m.insert(Symbol::jet(0, 0, 0), &a * &s / &den);
            m.insert(Symbol::jet(0, 1, 0), -&a / &den);
            m.insert(Symbol::jet(0, 2, 0), Q::zero());
            m.insert(Symbol::jet(0, 0, 1), -&a * (q(1) + &a * &s / &den) / &den);
            m
        };
        // at the moving zero z = 1 - t the boundary value stays 0
        let lx_at = lx.evaluate(&jet(q(1) - &t0)).unwrap();
        assert!(lx_at.is_zero());
        // the output derivative is -z·x_zz, zero on this family everywhere
        let ly_at = ly.evaluate(&jet(qf(1, 10))).unwrap();
        assert!(ly_at.is_zero());
    }
}

#[test]
fn certificate_of_the_example() {
    let r = certify_nonobservability(&example_system(), &example_field()).unwrap();
    assert!(r.overall.is_pass(), "{:?}", r.reasons);
    assert_eq!(r.characteristics, vec![p("(x+1-z*x_z)*x").normalized().unwrap()]);
    let shift = GeneralizedVectorField::new(p("0"), p("0"), vec![p("1")]);
    let r = certify_nonobservability(&example_system(), &shift).unwrap();
    assert!(!r.overall.is_pass());
}
