mod common;

use std::f64::consts::PI;

use common::rel;
use knot_energy::curve::parametric_length;
use knot_energy::kernel::KernelSpec;
use knot_energy::minimize::{circle_reference, minimize_under_length, DescentOptions, DescentStatus, FourierCurve};
use knot_energy::mobius::plane_rotation;
use knot_energy::Error;

fn small(iterations: usize) -> DescentOptions {
    DescentOptions { n: 64, max_iterations: iterations, ..DescentOptions::default() }
}

#[test]
fn circle_start_is_stationary() {
    let k = KernelSpec::power(2.0).unwrap();
    let start = FourierCurve::circle(1.0, 3);
    let out = minimize_under_length(&start, &k, 2.0 * PI, &small(5)).unwrap();
    assert_eq!(out.status, DescentStatus::Converged);
    assert_eq!(out.trace.records.len(), 1);
    let (circle_total, _) = circle_reference(&k, 2.0 * PI, &small(5)).unwrap();
    assert!(rel(out.trace.records[0].energy, circle_total) < 1e-12);
}

#[test]
fn descent_decreases_energy_and_keeps_length() {
    for alpha in [2.0, 2.5] {
        let k = KernelSpec::power(alpha).unwrap();
        let start = FourierCurve::perturbed_circle(1.0, 0.05, 3, 4).unwrap();
        let target = parametric_length(&start);
        let out = minimize_under_length(&start, &k, target, &small(4)).unwrap();
        let r = &out.trace.records;
        assert!(r.len() >= 2, "no accepted step at alpha {alpha}");
        for w in r.windows(2) {
            assert!(w[1].energy < w[0].energy);
        }
        for rec in r {
            assert!((rec.length - target).abs() <= 1e-10 * target);
            assert!(rec.e3 >= -1e-10);
        }
        assert!((out.sampled.length() - target).abs() <= 1e-10 * target);
    }
}

#[test]
fn descent_commutes_with_rotations() {
    let k = KernelSpec::power(2.0).unwrap();
    let start = FourierCurve::perturbed_circle(1.0, 0.05, 3, 4).unwrap();
    let q = plane_rotation(3, 0, 2, 0.9);
    let turned = start.rotated(&q).unwrap();
    let target = parametric_length(&start);
    let a = minimize_under_length(&start, &k, target, &small(2)).unwrap();
    let b = minimize_under_length(&turned, &k, target, &small(2)).unwrap();
    assert_eq!(a.trace.records.len(), b.trace.records.len());
    for (x, y) in a.trace.records.iter().zip(&b.trace.records) {
        assert!(rel(x.energy, y.energy) < 1e-9, "{} vs {}", x.energy, y.energy);
    }
    let expect = a.curve.rotated(&q).unwrap();
    let gap = expect.coefficients().iter().zip(b.curve.coefficients()).map(|(u, v)| (u - v).abs()).fold(0.0, f64::max);
    assert!(gap < 1e-6, "{gap}");
}

#[test]
fn invalid_inputs_are_rejected() {
    let k = KernelSpec::power(2.0).unwrap();
    let start = FourierCurve::perturbed_circle(1.0, 0.05, 3, 4).unwrap();
    assert!(matches!(minimize_under_length(&start, &k, -1.0, &small(1)), Err(Error::Minimize(_))));
    let bad = KernelSpec::power_unchecked(1.5);
    assert!(matches!(minimize_under_length(&start, &bad, 6.0, &small(1)), Err(Error::Minimize(_))));
    assert!(FourierCurve::perturbed_circle(1.0, 0.05, 3, 3).is_err());
    assert!(matches!(minimize_under_length(&FourierCurve::zeros(3, 2), &k, 6.0, &small(1)), Err(Error::Minimize(_))));
}
