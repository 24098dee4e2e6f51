//! The ten acceptance criteria, one test each. Every test prints a single
//! PASS/FAIL line with the measured values and the tolerance applied.

use bzwave::acceptance::{run_criterion, CriterionRow};

fn check(id: u8) {
    let row: CriterionRow = run_criterion(id);
    println!("{}", row.line());
    assert!(row.passed, "{}", row.line());
}

#[test]
fn criterion_01_speed_window() {
    check(1);
}

#[test]
fn criterion_02_monotone_and_ordered_profiles() {
    check(2);
}

#[test]
fn criterion_03_epsilon_continuation() {
    check(3);
}

#[test]
fn criterion_04_spreading_speeds() {
    check(4);
}

#[test]
fn criterion_05_counter_propagation_signs() {
    check(5);
}

#[test]
fn criterion_06_comparison_certificates() {
    check(6);
}

#[test]
fn criterion_07_contraction_bound() {
    check(7);
}

#[test]
fn criterion_08_kernel_mass() {
    check(8);
}

#[test]
fn criterion_09_stability_box() {
    check(9);
}

#[test]
fn criterion_10_monotone_semiflow() {
    check(10);
}
