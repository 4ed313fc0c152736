//! One-dimensional quadrature and the Riemann zeta function.

/// Kronrod abscissae for the 15-point rule on [-1, 1] (non-negative half).
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

/// Gauss weights of the embedded 7-point rule (at XGK[1], XGK[3], XGK[5], XGK[7]).
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

const GL8_X: [f64; 4] = [
    0.183_434_642_495_649_804_939_476_142_360_184,
    0.525_532_409_916_328_985_817_739_049_189_254,
    0.796_666_477_413_626_739_591_553_936_475_831,
    0.960_289_856_497_536_231_683_560_868_569_473,
];

const GL8_W: [f64; 4] = [
    0.362_683_783_378_361_982_965_150_449_277_196,
    0.313_706_645_877_887_287_337_962_201_986_601,
    0.222_381_034_453_374_470_544_355_994_426_241,
    0.101_228_536_290_376_259_152_531_354_309_962,
];

/// Fixed 8-point Gauss-Legendre rule on [a, b].
pub fn gauss_legendre_8<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64) -> f64 {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut acc = 0.0;
    for (x, w) in GL8_X.iter().zip(GL8_W.iter()) {
        acc += w * (f(mid - half * x) + f(mid + half * x));
    }
    acc * half
}

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(mid);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(mid - dx) + f(mid + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub converged: bool,
}

/// Adaptive Gauss-Kronrod (G7/K15) quadrature with global bisection of the
/// interval carrying the largest error estimate.
pub fn integrate_adaptive<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
) -> QuadResult {
    const MAX_INTERVALS: usize = 2000;
    let (v, e) = gk15(&f, a, b);
    let mut intervals = vec![(a, b, v, e)];
    let mut total = v;
    let mut err = e;
    while err > abs_tol.max(rel_tol * total.abs()) {
        if intervals.len() >= MAX_INTERVALS {
            return QuadResult { value: total, error: err, converged: false };
        }
        let (idx, _) = intervals
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (i, iv)| if iv.3 > best.1 { (i, iv.3) } else { best });
        let (lo, hi, v0, e0) = intervals.swap_remove(idx);
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            return QuadResult { value: total, error: err, converged: false };
        }
        let (v1, e1) = gk15(&f, lo, mid);
        let (v2, e2) = gk15(&f, mid, hi);
        total += v1 + v2 - v0;
        err += e1 + e2 - e0;
        intervals.push((lo, mid, v1, e1));
        intervals.push((mid, hi, v2, e2));
    }
    QuadResult { value: total, error: err, converged: true }
}

// B_{2j} / (2j)! for j = 1..=8.
const BERNOULLI_OVER_FACTORIAL: [f64; 8] = [
    1.0 / 12.0,
    -1.0 / 720.0,
    1.0 / 30_240.0,
    -1.0 / 1_209_600.0,
    1.0 / 47_900_160.0,
    -691.0 / 1_307_674_368_000.0,
    1.0 / 74_724_249_600.0,
    -3617.0 / 10_670_622_842_880_000.0,
];

/// Riemann zeta function for real `s != 1` via Euler-Maclaurin summation.
/// Valid (to ~1e-15 relative) for moderate |s|, including the analytic
/// continuation to s < 1.
pub fn zeta(s: f64) -> f64 {
    assert!((s - 1.0).abs() > 1e-12, "zeta has a pole at s = 1");
    const N: usize = 20;
    let n = N as f64;
    let mut sum: f64 = (1..N).map(|k| (k as f64).powf(-s)).sum();
    sum += n.powf(1.0 - s) / (s - 1.0) + 0.5 * n.powf(-s);
    // rising factorial s (s+1) ... (s+2j-2), times N^{-s-2j+1}
    let mut rising = s;
    let mut npow = n.powf(-s - 1.0);
    for (j, c) in BERNOULLI_OVER_FACTORIAL.iter().enumerate() {
        if j > 0 {
            let m = 2.0 * j as f64;
            rising *= (s + m - 1.0) * (s + m);
            npow /= n * n;
        }
        sum += c * rising * npow;
    }
    sum
}

/// `zeta(s) - sum_{k=1}^{m-1} k^{-s}`, the Hurwitz zeta value `zeta(s, m)`.
pub fn zeta_tail(s: f64, m: usize) -> f64 {
    zeta(s) - (1..m).map(|k| (k as f64).powf(-s)).sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zeta_reference_values() {
        assert!((zeta(0.0) + 0.5).abs() < 1e-14);
        assert!((zeta(0.5) + 1.460_354_508_809_586_8).abs() < 1e-13);
        assert!((zeta(0.9) + 9.430_114_019_402_254_6).abs() < 1e-11);
        assert!((zeta(0.25) + 0.813_278_405_261_891_7).abs() < 1e-13);
        assert!((zeta(2.0) - std::f64::consts::PI.powi(2) / 6.0).abs() < 1e-14);
        assert!((zeta(-1.0) + 1.0 / 12.0).abs() < 1e-14);
    }

    #[test]
    fn zeta_tail_matches_direct_sum_for_convergent_s() {
        let s = 3.0;
        let direct: f64 = (4..200_000).map(|k| (k as f64).powf(-s)).sum();
        assert!((zeta_tail(s, 4) - direct).abs() < 1e-10);
    }

    #[test]
    fn adaptive_handles_endpoint_singularity() {
        let r = integrate_adaptive(|x| x.powf(-0.5), 0.0, 1.0, 1e-13, 1e-13);
        assert!(r.converged);
        assert!((r.value - 2.0).abs() < 1e-10);
    }

    #[test]
    fn gauss_legendre_exact_for_degree_15() {
        let v = gauss_legendre_8(|x| x.powi(15) + x.powi(14), -1.0, 2.0);
        let exact = (2f64.powi(16) - 1.0) / 16.0 + (2f64.powi(15) + 1.0) / 15.0;
        assert!((v - exact).abs() < 1e-9);
    }
}
