//! Independent oracles shared by the integration tests. Nothing here calls
//! into the crate's numerics.

#![allow(dead_code)]

use std::f64::consts::PI;

/// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration on P_n.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..(n + 1) / 2 {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// Composite Gauss-Legendre over the given breakpoints.
pub fn integrate(f: impl Fn(f64) -> f64, breaks: &[f64], order: usize) -> f64 {
    let (x, w) = gauss_legendre(order);
    breaks
        .windows(2)
        .map(|ab| {
            let (a, b) = (ab[0], ab[1]);
            let (m, r) = (0.5 * (a + b), 0.5 * (b - a));
            x.iter().zip(&w).map(|(xi, wi)| wi * f(m + r * xi)).sum::<f64>() * r
        })
        .sum()
}

/// Geometric breakpoints accumulating at `lo` on `[lo, hi]`.
pub fn graded_breaks(lo: f64, hi: f64, levels: usize) -> Vec<f64> {
    let mut b: Vec<f64> = (0..levels).map(|k| lo + (hi - lo) * 0.5f64.powi((levels - k) as i32)).collect();
    b.insert(0, lo);
    b.push(hi);
    b
}

// sin(x)/x - 1 without cancellation.
fn sinc_minus_one(x: f64) -> f64 {
    if x.abs() < 0.1 {
        let x2 = x * x;
        let mut term = -x2 / 6.0;
        let mut sum = term;
        for k in 2..12 {
            term *= -x2 / ((2 * k) as f64 * (2 * k + 1) as f64);
            sum += term;
        }
        sum
    } else {
        x.sin() / x - 1.0
    }
}

/// Unit-circle energy `E_{t^α}` by the one-dimensional reduction
/// `2L ∫_0^{L/2} (|2 sin(u/2)|^{-α} - u^{-α}) du`, `L = 2π`.
/// The singular `(α/24) u^{2-α}` part is integrated in closed form.
pub fn circle_energy(alpha: f64) -> f64 {
    let c0 = alpha / 24.0;
    // u^{-α} ((sinc)^{-α} - 1) - c0 u^{2-α}
    let rem = |u: f64| {
        let g = (-alpha * sinc_minus_one(0.5 * u).ln_1p()).exp_m1();
        u.powf(-alpha) * g - c0 * u.powf(2.0 - alpha)
    };
    let body = integrate(rem, &graded_breaks(0.0, PI, 60), 20);
    let singular = c0 * PI.powf(3.0 - alpha) / (3.0 - alpha);
    4.0 * PI * (body + singular)
}

/// Perimeter of the ellipse with semi-axes `a`, `b`.
pub fn ellipse_perimeter(a: f64, b: f64) -> f64 {
    let speed = |t: f64| (a * a * t.sin().powi(2) + b * b * t.cos().powi(2)).sqrt();
    let breaks: Vec<f64> = (0..=64).map(|k| 2.0 * PI * k as f64 / 64.0).collect();
    integrate(speed, &breaks, 20)
}

/// Cumulative chord length of the (2,3) torus knot sampled uniformly in
/// its parameter.
pub fn trefoil_chord_length(major: f64, minor: f64, m: usize) -> f64 {
    let p = |t: f64| {
        let rho = major + minor * (3.0 * t).cos();
        [rho * (2.0 * t).cos(), rho * (2.0 * t).sin(), minor * (3.0 * t).sin()]
    };
    (0..m)
        .map(|i| {
            let a = p(2.0 * PI * i as f64 / m as f64);
            let b = p(2.0 * PI * (i + 1) as f64 / m as f64);
            ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
        })
        .sum()
}

/// Frozen oracle values (computed by the functions above).
pub const CIRCLE_ENERGY_2_25: f64 = 4.4408202405899014;
pub const CIRCLE_ENERGY_2_5: f64 = 5.3876704797385878;
pub const CIRCLE_ENERGY_2_9: f64 = 17.780035042846485;
pub const ELLIPSE_2_1_PERIMETER: f64 = 9.688448220547676;
pub const TREFOIL_CHORD_LENGTH_2_16: f64 = 31.89860055809044;

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
