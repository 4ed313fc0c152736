use knot_energy::angles::{cos_phi_algebraic, cos_phi_blend, cos_phi_geometric, cos_psi, PairGeometry, TangentCircle};
use knot_energy::Error;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn unit(v: [f64; 3]) -> [f64; 3] {
    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    [v[0] / n, v[1] / n, v[2] / n]
}

fn sub(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn random_unit(rng: &mut ChaCha8Rng) -> [f64; 3] {
    loop {
        let v = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
        let n2 = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
        if n2 > 1e-4 && n2 <= 1.0 {
            return unit(v);
        }
    }
}

#[test]
fn algebraic_and_geometric_conformal_angles_agree() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    let mut tested = 0;
    while tested < 10_000 {
        let f1 = [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)];
        let f2 = [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)];
        let (t1, t2) = (random_unit(&mut rng), random_unit(&mut rng));
        let d = sub(&f1, &f2);
        let g = PairGeometry::new(&d, &t1, &t2).unwrap();
        let geo = cos_phi_geometric(&f1, &f2, &t1, &t2).unwrap();
        if geo.line_limit || g.chord_len() < 1e-3 {
            continue;
        }
        let alg = cos_phi_algebraic(&g).unwrap();
        worst = worst.max((alg - geo.at_first).abs()).max((alg - geo.at_second).abs());
        tested += 1;
    }
    assert!(worst < 1e-8, "worst deviation {worst}");
}

#[test]
fn tangent_circle_passes_through_both_points() {
    let f1 = [0.3, -0.2, 1.0];
    let f2 = [1.1, 0.4, -0.5];
    let t1 = unit([0.2, 1.0, 0.3]);
    match TangentCircle::construct(&f1, &t1, &f2) {
        TangentCircle::Circle { center, radius, .. } => {
            let r1 = sub(&f1, &[center[0], center[1], center[2]]);
            let r2 = sub(&f2, &[center[0], center[1], center[2]]);
            let n = |v: [f64; 3]| (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
            assert!((n(r1) - radius).abs() < 1e-13);
            assert!((n(r2) - radius).abs() < 1e-13);
        }
        TangentCircle::Line { .. } => panic!("generic configuration gave a line"),
    }
}

#[test]
fn circle_pairs_and_collinear_pairs_give_one() {
    for k in 1..40 {
        let (a, b) = (0.1 * k as f64, 0.1 * k as f64 + 0.37 * k as f64);
        let f1 = [a.cos(), a.sin(), 0.0];
        let f2 = [b.cos(), b.sin(), 0.0];
        let t1 = [-a.sin(), a.cos(), 0.0];
        let t2 = [-b.sin(), b.cos(), 0.0];
        let d = sub(&f1, &f2);
        let alg = cos_phi_algebraic(&PairGeometry::new(&d, &t1, &t2).unwrap()).unwrap();
        let geo = cos_phi_geometric(&f1, &f2, &t1, &t2).unwrap();
        assert!((alg - 1.0).abs() < 1e-12);
        assert!((geo.at_first - 1.0).abs() < 1e-8 && (geo.at_second - 1.0).abs() < 1e-8);
    }
    let u = unit([1.0, 2.0, -0.5]);
    let f2 = [3.0 * u[0], 3.0 * u[1], 3.0 * u[2]];
    let geo = cos_phi_geometric(&[0.0; 3], &f2, &u, &u).unwrap();
    assert!(geo.line_limit);
    assert_eq!(geo.at_first, 1.0);
    assert_eq!(cos_phi_algebraic(&PairGeometry::new(&sub(&[0.0; 3], &f2), &u, &u).unwrap()).unwrap(), 1.0);
}

#[test]
fn coincident_points_are_an_error() {
    let u = [1.0, 0.0, 0.0];
    assert!(matches!(cos_phi_geometric(&[1.0, 1.0, 1.0], &[1.0, 1.0, 1.0], &u, &u), Err(Error::CoincidentPoints)));
}

#[test]
fn tangent_gap_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let d = [1.0, 0.0, 0.0];
    for _ in 0..100_000 {
        let (t1, t2) = (random_unit(&mut rng), random_unit(&mut rng));
        let gap: f64 = t1.iter().zip(&t2).map(|(a, b)| (a - b) * (a - b)).sum();
        let psi = cos_psi(&PairGeometry::new(&d, &t1, &t2).unwrap());
        assert!((gap - 2.0 * (1.0 - psi)).abs() < 1e-14);
    }
}

proptest! {
    #[test]
    fn blend_is_convex(cphi in -1.0f64..=1.0, cpsi in -1.0f64..=1.0, theta in 0.0f64..=0.5) {
        let b = cos_phi_blend(cphi, cpsi, theta).unwrap();
        prop_assert!(b >= cphi.min(cpsi) - 1e-15 && b <= cphi.max(cpsi) + 1e-15);
    }

    #[test]
    fn conformal_angle_is_symmetric(
        x in prop::array::uniform3(-2.0f64..2.0),
        y in prop::array::uniform3(-2.0f64..2.0),
        a in prop::array::uniform3(-1.0f64..1.0),
        b in prop::array::uniform3(-1.0f64..1.0),
    ) {
        let na = (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt();
        let nb = (b[0] * b[0] + b[1] * b[1] + b[2] * b[2]).sqrt();
        let d = sub(&x, &y);
        let dn = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
        prop_assume!(na > 1e-2 && nb > 1e-2 && dn > 1e-3);
        let (t1, t2) = (unit(a), unit(b));
        let fwd = cos_phi_algebraic(&PairGeometry::new(&d, &t1, &t2).unwrap()).unwrap();
        let back = cos_phi_algebraic(&PairGeometry::new(&sub(&y, &x), &t2, &t1).unwrap()).unwrap();
        prop_assert!((fwd - back).abs() < 1e-14);
    }
}
