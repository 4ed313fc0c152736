//! The independent oracles reproduce their frozen values.

mod common;

use common::*;

#[test]
fn gauss_legendre_integrates_polynomials_exactly() {
    let v = integrate(|x| x.powi(9) + 3.0 * x.powi(4), &[0.0, 2.0], 5);
    assert!((v - (1024.0 / 10.0 + 3.0 * 32.0 / 5.0)).abs() < 1e-12);
}

#[test]
fn circle_oracle_matches_closed_form_at_alpha_2() {
    assert!((circle_energy(2.0) - 4.0).abs() < 1e-13);
}

#[test]
fn circle_oracle_frozen_values() {
    for (alpha, frozen) in [(2.25, CIRCLE_ENERGY_2_25), (2.5, CIRCLE_ENERGY_2_5), (2.9, CIRCLE_ENERGY_2_9)] {
        let v = circle_energy(alpha);
        assert!(rel(v, frozen) < 1e-12, "alpha {alpha}: {v} vs {frozen}");
    }
}

#[test]
fn ellipse_and_trefoil_frozen_values() {
    assert!(rel(ellipse_perimeter(2.0, 1.0), ELLIPSE_2_1_PERIMETER) < 1e-14);
    assert!(rel(trefoil_chord_length(2.0, 1.0, 1 << 16), TREFOIL_CHORD_LENGTH_2_16) < 1e-13);
}
