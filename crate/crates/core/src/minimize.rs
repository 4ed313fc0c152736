//! Length-constrained steepest descent of `E_Φ` over truncated Fourier
//! series curves.
//!
//! The objective is the cosine-formula total of the curve reconstructed
//! from the coefficients, resampled by arc length and rescaled to the target
//! length. Gradients are central finite differences in the coefficients.
//! Every accepted iterate is rescaled so its length equals the target.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::curve::{bi_lipschitz_ratio, parametric_length, sample_parametric, Curve, ParametricCurve};
use crate::energy::{energy_cosine, QuadratureSpec};
use crate::error::{Error, Result};
use crate::kernel::{Assumption, KernelSpec, Verdict};

/// `f_d(t) = Σ_{k=1..K} a_{d,k} cos kt + b_{d,k} sin kt`; the mean is fixed
/// at the origin.
#[derive(Clone, Debug, PartialEq)]
pub struct FourierCurve {
    dim: usize,
    harmonics: usize,
    coefficients: Vec<f64>,
}

impl FourierCurve {
    /// `coefficients[(d * K + k - 1) * 2]` is `a_{d,k}`, the next entry `b_{d,k}`.
    pub fn new(dim: usize, harmonics: usize, coefficients: Vec<f64>) -> Result<Self> {
        if dim < 2 || harmonics < 1 || coefficients.len() != 2 * dim * harmonics {
            return Err(Error::InvalidParameters(format!(
                "Fourier curve needs 2*dim*K = {} coefficients, got {}",
                2 * dim * harmonics,
                coefficients.len()
            )));
        }
        if coefficients.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidParameters("non-finite Fourier coefficient".into()));
        }
        Ok(FourierCurve { dim, harmonics, coefficients })
    }

    pub fn zeros(dim: usize, harmonics: usize) -> Self {
        FourierCurve { dim, harmonics, coefficients: vec![0.0; 2 * dim * harmonics] }
    }

    /// Planar circle of the given radius in the first two coordinates.
    pub fn circle(radius: f64, harmonics: usize) -> Self {
        let mut c = FourierCurve::zeros(3, harmonics);
        *c.cos_mut(0, 1) = radius;
        *c.sin_mut(1, 1) = radius;
        c
    }

    /// `r [(1 + a cos mt) cos t, (1 + a cos mt) sin t, a sin mt]`, the same
    /// curve as the `perturbed-circle` family. Needs `K >= m + 1`.
    pub fn perturbed_circle(radius: f64, amplitude: f64, harmonic: usize, harmonics: usize) -> Result<Self> {
        if harmonic < 2 || harmonics < harmonic + 1 {
            return Err(Error::InvalidParameters(format!(
                "perturbation harmonic {harmonic} needs at least {} retained harmonics",
                harmonic + 1
            )));
        }
        let mut c = FourierCurve::circle(radius, harmonics);
        let h = 0.5 * radius * amplitude;
        *c.cos_mut(0, harmonic + 1) += h;
        *c.cos_mut(0, harmonic - 1) += h;
        *c.sin_mut(1, harmonic + 1) += h;
        *c.sin_mut(1, harmonic - 1) -= h;
        *c.sin_mut(2, harmonic) += radius * amplitude;
        Ok(c)
    }

    pub fn harmonics(&self) -> usize {
        self.harmonics
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn cos_coeff(&self, d: usize, k: usize) -> f64 {
        self.coefficients[(d * self.harmonics + k - 1) * 2]
    }

    pub fn sin_coeff(&self, d: usize, k: usize) -> f64 {
        self.coefficients[(d * self.harmonics + k - 1) * 2 + 1]
    }

    fn cos_mut(&mut self, d: usize, k: usize) -> &mut f64 {
        &mut self.coefficients[(d * self.harmonics + k - 1) * 2]
    }

    fn sin_mut(&mut self, d: usize, k: usize) -> &mut f64 {
        &mut self.coefficients[(d * self.harmonics + k - 1) * 2 + 1]
    }

    pub fn scaled(&self, factor: f64) -> Self {
        FourierCurve { coefficients: self.coefficients.iter().map(|c| c * factor).collect(), ..self.clone() }
    }

    /// Image under the row-major orthogonal matrix `q`.
    pub fn rotated(&self, q: &[f64]) -> Result<Self> {
        let d = self.dim;
        if q.len() != d * d {
            return Err(Error::InvalidMap(format!("rotation must be {d}x{d}")));
        }
        let mut out = FourierCurve::zeros(d, self.harmonics);
        for k in 1..=self.harmonics {
            for r in 0..d {
                *out.cos_mut(r, k) = (0..d).map(|s| q[r * d + s] * self.cos_coeff(s, k)).sum();
                *out.sin_mut(r, k) = (0..d).map(|s| q[r * d + s] * self.sin_coeff(s, k)).sum();
            }
        }
        Ok(out)
    }

    fn axpy(&self, step: f64, direction: &[f64]) -> Self {
        let coefficients = self.coefficients.iter().zip(direction).map(|(c, g)| c + step * g).collect();
        FourierCurve { coefficients, ..self.clone() }
    }
}

impl ParametricCurve for FourierCurve {
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, t: f64, pos: &mut [f64], deriv: &mut [f64]) {
        pos.iter_mut().for_each(|v| *v = 0.0);
        deriv.iter_mut().for_each(|v| *v = 0.0);
        // cos kt, sin kt by the angle-addition recurrence
        let (s1, c1) = t.sin_cos();
        let (mut s, mut c) = (s1, c1);
        for k in 1..=self.harmonics {
            let kf = k as f64;
            for d in 0..self.dim {
                let (a, b) = (self.cos_coeff(d, k), self.sin_coeff(d, k));
                pos[d] += a * c + b * s;
                deriv[d] += kf * (b * c - a * s);
            }
            (s, c) = (s * c1 + c * s1, c * c1 - s * s1);
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DescentOptions {
    /// Samples per energy evaluation.
    pub n: usize,
    pub max_iterations: usize,
    /// Stop when the gradient norm falls to this value.
    pub tolerance: f64,
    /// Finite-difference step as a fraction of the target length.
    pub fd_step: f64,
    /// First line-search step (coefficient-space distance) as a fraction of
    /// the target radius `L / 2π`.
    pub initial_step: f64,
    /// Line search gives up below this fraction of the target radius.
    pub min_step: f64,
    /// Harmonic `k` of the gradient is divided by `k^p`. `None` uses
    /// `p = α + 1` for power laws (the order of the energy's second
    /// variation at the circle) and `p = 3` otherwise.
    pub preconditioner_exponent: Option<f64>,
    pub quad: QuadratureSpec,
}

impl Default for DescentOptions {
    fn default() -> Self {
        DescentOptions {
            n: 256,
            max_iterations: 200,
            tolerance: 1e-6,
            fd_step: 1e-5,
            initial_step: 1e-2,
            min_step: 1e-12,
            preconditioner_exponent: None,
            quad: QuadratureSpec::default(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DescentRecord {
    pub iteration: usize,
    pub energy: f64,
    pub e3: f64,
    pub e4: f64,
    /// `E_{Φ,4}(f) - E_{Φ,4}(C)` for the circle `C` of the target length.
    pub e4_excess: f64,
    pub step: f64,
    pub grad_norm: f64,
    pub length: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DescentStatus {
    Converged,
    MaxIterations,
    StepUnderflow,
}

#[derive(Clone, Debug, Serialize)]
pub struct DescentTrace {
    pub records: Vec<DescentRecord>,
    /// Trial steps refused because the energy did not decrease.
    pub rejected_steps: usize,
    /// Trial steps refused because the curve lost embeddedness.
    pub non_embedded_steps: usize,
    pub status: Option<DescentStatus>,
}

#[derive(Clone, Debug)]
pub struct DescentOutcome {
    pub curve: FourierCurve,
    pub sampled: Curve,
    pub trace: DescentTrace,
    pub status: DescentStatus,
}

struct Evaluation {
    coeffs: FourierCurve,
    curve: Curve,
    total: f64,
    e3: f64,
    e4: f64,
}

struct Objective<'a> {
    kernel: &'a KernelSpec,
    target: f64,
    opts: &'a DescentOptions,
}

impl Objective<'_> {
    /// Rescales to the target length and evaluates; `None` for curves that
    /// cannot be sampled or are not embedded.
    fn evaluate(&self, coeffs: &FourierCurve) -> Option<Evaluation> {
        let raw = sample_parametric(coeffs, self.opts.n).ok()?;
        // rescaling the samples is exact, so the length is hit to rounding
        let factor = self.target / raw.length();
        let curve = raw.scaled(factor);
        let e = energy_cosine(&curve, self.kernel, &self.opts.quad).ok()?;
        Some(Evaluation { coeffs: coeffs.scaled(factor), curve, total: e.total, e3: e.e3?, e4: e.e4? })
    }

    fn energy(&self, coeffs: &FourierCurve) -> f64 {
        self.evaluate(coeffs).map_or(f64::NAN, |e| e.total)
    }

    fn gradient(&self, at: &FourierCurve) -> Vec<f64> {
        let h = self.opts.fd_step * self.target;
        (0..at.coefficients.len())
            .into_par_iter()
            .map(|i| {
                let mut plus = at.clone();
                let mut minus = at.clone();
                plus.coefficients[i] += h;
                minus.coefficients[i] -= h;
                (self.energy(&plus) - self.energy(&minus)) / (2.0 * h)
            })
            .collect()
    }
}

fn check_kernel(kernel: &KernelSpec, length: f64) -> Result<()> {
    let report = kernel.check_assumptions(length);
    for a in [Assumption::Monotone, Assumption::IntegrableTail, Assumption::NonNegativeWeight] {
        if report.verdict(a) != Verdict::Pass {
            return Err(Error::Minimize(format!("kernel {} does not pass {}", kernel.label(), a.label())));
        }
    }
    Ok(())
}

/// Energy parts of the round circle of length `length`, at the same grid.
pub fn circle_reference(kernel: &KernelSpec, length: f64, opts: &DescentOptions) -> Result<(f64, f64)> {
    let circle = sample_parametric(&FourierCurve::circle(length / (2.0 * PI), 1), opts.n)?;
    let e = energy_cosine(&circle, kernel, &opts.quad)?;
    Ok((e.total, e.e4.unwrap_or(0.0)))
}

pub fn minimize_under_length(
    start: &FourierCurve,
    kernel: &KernelSpec,
    target_length: f64,
    opts: &DescentOptions,
) -> Result<DescentOutcome> {
    if !(target_length > 0.0 && target_length.is_finite()) {
        return Err(Error::Minimize(format!("target length {target_length} must be positive")));
    }
    check_kernel(kernel, target_length)?;
    opts.quad.validate(opts.n)?;
    let objective = Objective { kernel, target: target_length, opts };
    let (_, e4_circle) = circle_reference(kernel, target_length, opts)?;

    let start_length = parametric_length(start);
    if !(start_length > 0.0) {
        return Err(Error::Minimize("start curve has zero length".into()));
    }
    let start_curve = sample_parametric(&start.scaled(target_length / start_length), opts.n)?;
    let ratio = bi_lipschitz_ratio(&start_curve);
    if !ratio.embedded {
        return Err(Error::NotEmbedded { ratio: ratio.ratio });
    }
    let mut current = objective
        .evaluate(start)
        .ok_or_else(|| Error::Minimize("energy of the start curve could not be evaluated".into()))?;

    let p = opts.preconditioner_exponent.unwrap_or_else(|| kernel.alpha().map_or(3.0, |a| a + 1.0));
    let weights: Vec<f64> =
        (0..start.coefficients.len()).map(|i| ((i / 2) % start.harmonics + 1) as f64).map(|k| k.powf(p)).collect();
    let radius = target_length / (2.0 * PI);
    let min_step = opts.min_step * radius;
    let mut step = opts.initial_step * radius;
    let mut trace = DescentTrace { records: Vec::new(), rejected_steps: 0, non_embedded_steps: 0, status: None };
    let record = |it: usize, e: &Evaluation, step: f64, grad_norm: f64| DescentRecord {
        iteration: it,
        energy: e.total,
        e3: e.e3,
        e4: e.e4,
        e4_excess: e.e4 - e4_circle,
        step,
        grad_norm,
        length: e.curve.length(),
    };

    let mut status = DescentStatus::MaxIterations;
    let mut iteration = 0;
    let mut grad = objective.gradient(&current.coeffs);
    let mut grad_norm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
    trace.records.push(record(0, &current, 0.0, grad_norm));
    while iteration < opts.max_iterations {
        if grad_norm <= opts.tolerance {
            status = DescentStatus::Converged;
            break;
        }
        let mut direction: Vec<f64> = grad.iter().zip(&weights).map(|(g, w)| -g / w).collect();
        let dnorm = direction.iter().map(|v| v * v).sum::<f64>().sqrt();
        direction.iter_mut().for_each(|v| *v /= dnorm);
        let accepted = loop {
            if step < min_step {
                break None;
            }
            let trial = current.coeffs.axpy(step, &direction);
            match objective.evaluate(&trial) {
                Some(e) if e.total < current.total => break Some(e),
                Some(_) => trace.rejected_steps += 1,
                // sampling rejects curves that fail the embedding check
                None => trace.non_embedded_steps += 1,
            }
            step *= 0.5;
        };
        let Some(next) = accepted else {
            status = DescentStatus::StepUnderflow;
            break;
        };
        iteration += 1;
        current = next;
        grad = objective.gradient(&current.coeffs);
        grad_norm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
        trace.records.push(record(iteration, &current, step, grad_norm));
        step *= 2.0;
    }
    if status == DescentStatus::MaxIterations && grad_norm <= opts.tolerance {
        status = DescentStatus::Converged;
    }
    trace.status = Some(status);
    Ok(DescentOutcome { curve: current.coeffs, sampled: current.curve, trace, status })
}
