//! Fourier differentiation and band-limited upsampling of periodic samples.
//!
//! Samples are stored interleaved: point `i` occupies `data[i * dim..(i + 1) * dim]`.

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

fn column(data: &[f64], dim: usize, d: usize) -> Vec<Complex64> {
    data.iter().skip(d).step_by(dim).map(|&x| Complex64::new(x, 0.0)).collect()
}

/// Derivative of the given order of uniformly sampled periodic data with
/// the given period. The Nyquist mode is dropped for odd orders.
pub fn derivative(data: &[f64], dim: usize, period: f64, order: u32) -> Vec<f64> {
    let n = data.len() / dim;
    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);
    let mut out = vec![0.0; data.len()];
    let scale = 2.0 * std::f64::consts::PI / period;
    for d in 0..dim {
        let mut col = column(data, dim, d);
        fwd.process(&mut col);
        for (k, c) in col.iter_mut().enumerate() {
            let wave = if k <= n / 2 { k as f64 } else { k as f64 - n as f64 };
            if n % 2 == 0 && k == n / 2 && order % 2 == 1 {
                *c = Complex64::new(0.0, 0.0);
                continue;
            }
            let ik = Complex64::new(0.0, wave * scale);
            *c *= ik.powu(order);
        }
        inv.process(&mut col);
        for (i, c) in col.iter().enumerate() {
            out[i * dim + d] = c.re / n as f64;
        }
    }
    out
}

/// Trigonometric interpolation of `n` periodic samples onto `n * factor`
/// uniformly spaced points (zero padding of the spectrum).
pub fn upsample(data: &[f64], dim: usize, factor: usize) -> Vec<f64> {
    let n = data.len() / dim;
    let m = n * factor;
    if factor == 1 {
        return data.to_vec();
    }
    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(m);
    let mut out = vec![0.0; m * dim];
    for d in 0..dim {
        let mut col = column(data, dim, d);
        fwd.process(&mut col);
        let mut padded = vec![Complex64::new(0.0, 0.0); m];
        let half = n / 2;
        for k in 0..n {
            if n % 2 == 0 && k == half {
                // split the Nyquist coefficient symmetrically
                padded[half] += col[k] * 0.5;
                padded[m - half] += col[k] * 0.5;
            } else if k < half || (n % 2 == 1 && k == half) {
                padded[k] = col[k];
            } else {
                padded[m - (n - k)] = col[k];
            }
        }
        inv.process(&mut padded);
        for (i, c) in padded.iter().enumerate() {
            out[i * dim + d] = c.re / n as f64;
        }
    }
    out
}
