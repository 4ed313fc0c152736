mod common;

use std::f64::consts::PI;

use common::*;
use knot_energy::curve::make_named_curve;
use knot_energy::energy::{energy_cosine, normalized_energy, QuadratureSpec};
use knot_energy::kernel::KernelSpec;
use knot_energy::mobius::{plane_rotation, MobiusFactor, MobiusMap};
use knot_energy::run::random_inversion_centers;
use knot_energy::Error;

#[test]
fn identity_map_reproduces_the_curve() {
    let c = make_named_curve("trefoil", &[], 256).unwrap();
    let image = MobiusMap::identity().transform_curve(&c, 256).unwrap();
    assert!(max_abs_diff(image.positions(), c.positions()) <= 1e-10);
    assert!(rel(image.length(), c.length()) < 1e-9, "{} vs {}", image.length(), c.length());
}

#[test]
fn inversion_maps_circle_to_circle() {
    // |x - c| ranges over [2, 4]; the image meets the axis at 2.5 and 2.75
    let c = make_named_curve("circle", &[1.0], 256).unwrap();
    let map = MobiusMap::inversion(&[3.0, 0.0, 0.0], 1.0).unwrap();
    let image = map.transform_curve(&c, 256).unwrap();
    let center = [2.625, 0.0, 0.0];
    for p in image.positions().chunks(3) {
        let r = ((p[0] - center[0]).powi(2) + p[1].powi(2) + p[2].powi(2)).sqrt();
        assert!((r - 0.125).abs() < 1e-8, "{r}");
    }
    assert!((image.length() - 0.25 * PI).abs() < 1e-8);
}

#[test]
fn inversion_is_an_involution() {
    let map = MobiusMap::inversion(&[0.5, -1.0, 2.0], 1.7).unwrap();
    for x in [[1.0, 2.0, 3.0], [-0.3, 0.1, 0.0], [10.0, -4.0, 2.5]] {
        let y = map.apply_point(&map.apply_point(&x).unwrap()).unwrap();
        assert!(max_abs_diff(&x, &y) < 1e-13);
    }
    assert!(matches!(map.apply_point(&[0.5, -1.0, 2.0]), Err(Error::PointAtInfinity(_))));
}

#[test]
fn inversions_preserve_the_moebius_energy() {
    let t = make_named_curve("trefoil", &[2.0, 1.0], 1024).unwrap();
    let k = KernelSpec::power(2.0).unwrap();
    let q = QuadratureSpec::default();
    let before = energy_cosine(&t, &k, &q).unwrap().total;
    for center in random_inversion_centers(&t, 3, 5) {
        let image = MobiusMap::inversion(&center, 1.0).unwrap().transform_curve(&t, 1024).unwrap();
        let after = energy_cosine(&image, &k, &q).unwrap().total;
        assert!(rel(after, before) <= 1e-2, "center {center:?}: {after} vs {before}");
    }
}

#[test]
fn random_centers_respect_the_distance_band() {
    let t = make_named_curve("trefoil", &[], 256).unwrap();
    let centers = random_inversion_centers(&t, 8, 42);
    assert_eq!(centers, random_inversion_centers(&t, 8, 42));
    for c in centers {
        let d = t
            .positions()
            .chunks(3)
            .map(|p| ((p[0] - c[0]).powi(2) + (p[1] - c[1]).powi(2) + (p[2] - c[2]).powi(2)).sqrt())
            .fold(f64::INFINITY, f64::min);
        assert!((1.0..=2.0).contains(&d));
    }
}

#[test]
fn scaling_changes_energy_by_the_homogeneity_factor() {
    let t = make_named_curve("trefoil", &[], 512).unwrap();
    let k = KernelSpec::power(2.5).unwrap();
    let q = QuadratureSpec::default();
    let image = MobiusMap::parse("scale:2", 3).unwrap().transform_curve(&t, 512).unwrap();
    let before = energy_cosine(&t, &k, &q).unwrap().total;
    let after = energy_cosine(&image, &k, &q).unwrap().total;
    assert!(rel(after, before * 2f64.powf(-0.5)) <= 1e-10, "{after} vs {before}");
    let n0 = normalized_energy(&t, 2.5, &q).unwrap();
    let n1 = normalized_energy(&image, 2.5, &q).unwrap();
    assert!(rel(n0, n1) <= 1e-10);
}

#[test]
fn rigid_motions_preserve_energy() {
    let t = make_named_curve("trefoil", &[], 256).unwrap();
    let k = KernelSpec::power(2.9).unwrap();
    let q = QuadratureSpec::default();
    let map = MobiusMap::new(vec![
        MobiusFactor::Rotation { matrix: plane_rotation(3, 0, 2, 0.7) },
        MobiusFactor::Translation { shift: vec![1.0, -2.0, 0.5] },
    ])
    .unwrap();
    let image = map.transform_curve(&t, 256).unwrap();
    let a = energy_cosine(&t, &k, &q).unwrap().total;
    let b = energy_cosine(&image, &k, &q).unwrap().total;
    assert!(rel(a, b) < 1e-10, "{a} vs {b}");
}

#[test]
fn center_on_the_curve_is_ill_conditioned() {
    let c = make_named_curve("circle", &[1.0], 128).unwrap();
    let map = MobiusMap::inversion(&[1.0, 0.0, 0.0], 1.0).unwrap();
    assert!(matches!(map.transform_curve(&c, 128), Err(Error::IllConditioned { .. })));
}

#[test]
fn invalid_maps_are_rejected() {
    assert!(MobiusMap::parse("scale:0", 3).is_err());
    assert!(MobiusMap::parse("inv:1,2,0", 3).is_err());
    assert!(MobiusMap::parse("spin:1", 3).is_err());
    assert!(MobiusMap::new(vec![MobiusFactor::Rotation { matrix: vec![1.0, 0.1, 0.0, 1.0] }]).is_err());
}
