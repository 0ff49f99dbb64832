mod common;

use common::props;

const CASES: u32 = 128;

fn check(r: Result<(), String>) {
    if let Err(e) = r {
        panic!("{e}");
    }
}

#[test]
fn total_derivative_is_linear() {
    check(props::total_derivative_linearity(CASES));
}

#[test]
fn total_derivative_satisfies_leibniz() {
    check(props::total_derivative_leibniz(CASES));
}

#[test]
fn total_derivatives_commute() {
    check(props::total_derivatives_commute(CASES));
}

#[test]
fn total_derivative_matches_series_chain_rule() {
    check(props::total_derivative_chain_rule(CASES));
}

#[test]
fn lie_derivative_is_linear() {
    check(props::lie_derivative_linearity(CASES));
}

#[test]
fn lie_derivative_satisfies_leibniz() {
    check(props::lie_derivative_leibniz(CASES));
}

#[test]
fn lie_derivative_commutes_with_total_derivatives() {
    check(props::lie_derivative_commutes_with_total_derivatives(CASES));
}

#[test]
fn normalize_is_idempotent() {
    check(props::normalize_idempotent(CASES));
}

#[test]
fn printing_round_trips_through_the_parser() {
    check(props::print_parse_round_trip(CASES));
}

#[test]
fn reduction_is_idempotent_and_conservative() {
    check(props::reduce_idempotent_and_conservative(CASES));
}

#[test]
fn zero_test_is_sound() {
    check(props::zero_test_sound(CASES));
}

#[test]
fn flow_composes() {
    check(props::flow_group_property(CASES));
}

#[test]
fn gcd_is_a_common_divisor_containing_the_common_factor() {
    check(props::gcd_divisibility(CASES));
}
