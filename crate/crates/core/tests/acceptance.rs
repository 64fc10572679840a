//! Acceptance suite: one test per criterion, each printing its pass/fail
//! line (run with `--nocapture` to see them all).

use packing_core::report::run_criterion;

const SEED: u64 = 20240817;

fn check(id: usize) {
    let report = run_criterion(id, SEED);
    println!("{}", report.line());
    assert!(report.passed, "{}", report.line());
}

#[test]
fn criterion_01_closed_form_moments() {
    check(1);
}

#[test]
fn criterion_02_weyl_norm_identities() {
    check(2);
}

#[test]
fn criterion_03_bombieri_sandwich_and_sharpness() {
    check(3);
}

#[test]
fn criterion_04_jensen_lower_bound() {
    check(4);
}

#[test]
fn criterion_05_coalescence_upper_bound() {
    check(5);
}

#[test]
fn criterion_06_beta2_identity() {
    check(6);
}

#[test]
fn criterion_07_lattice_machinery() {
    check(7);
}

#[test]
fn criterion_08_refinement() {
    check(8);
}

#[test]
fn criterion_09_torus_uniformity() {
    check(9);
}

#[test]
fn criterion_10_pseudopolynomials() {
    check(10);
}

#[test]
fn criterion_11_oracle_honesty() {
    check(11);
}
