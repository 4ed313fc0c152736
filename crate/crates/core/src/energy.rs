//! Evaluators of the generalized O'Hara energy `E_Φ` on a sampled curve.
//!
//! All routes share one quadrature: the product trapezoid rule on the torus
//! grid `(s_i, s_j)` with the band `|i - j| < m` (torus index distance)
//! around the diagonal excluded, i.e. `ε = m L / N`. The routes are
//!
//! | method | integrand |
//! |---|---|
//! | direct | `1/Φ(|Δf|) - 1/Φ(D)` |
//! | decomposition | `|Δτ|²/(2Φ)` and `(1/Φ - Λ) ⟨τ1∧u, τ2∧u⟩`, plus tail |
//! | pv | `|Δτ|²/(2Φ) + (1/Φ - Λ)(τ1·τ2 - (τ1·u)(τ2·u))`, plus tail |
//! | cosine | `(1-Θ)(1-cos φ)/Φ` and `Θ(1-cos ψ)/Φ`, plus tail |
//! | combined | `(1 - cos φ_Φ)/Φ`, plus tail |
//!
//! For power-law kernels every integrand behaves like `c(s) |s1 - s2|^(2-α)`
//! next to the diagonal, with `c` proportional to the squared curvature.
//! The trapezoid rule then carries an error `2 c ζ(α-2) h^(3-α)` per row;
//! [`DiagonalCorrection::Leading`] subtracts it.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::angles::PairScalars;
use crate::curve::{bi_lipschitz_ratio, Curve};
use crate::error::{Error, Result};
use crate::kernel::{Assumption, KernelEvaluator, KernelSpec, Verdict};
use crate::numeric::quadrature::zeta_tail;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DiagonalCorrection {
    /// Plain trapezoid sum over the non-excluded pairs.
    None,
    /// Subtract the leading `h^(3-α)` error of the singular diagonal
    /// (power-law kernels only; ignored for other kernels).
    Leading,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    /// Grid cells excluded on each side of the diagonal (`m`).
    pub exclusion: usize,
    pub correction: DiagonalCorrection,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec { exclusion: 1, correction: DiagonalCorrection::Leading }
    }
}

impl QuadratureSpec {
    pub fn new(exclusion: usize, correction: DiagonalCorrection) -> Self {
        QuadratureSpec { exclusion, correction }
    }

    pub fn uncorrected() -> Self {
        QuadratureSpec { exclusion: 1, correction: DiagonalCorrection::None }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if self.exclusion < 1 || self.exclusion > n / 4 {
            return Err(Error::InvalidQuadrature(format!("exclusion {} outside [1, N/4 = {}]", self.exclusion, n / 4)));
        }
        Ok(())
    }

    /// Principal-value cutoff `ε = m L / N`.
    pub fn epsilon(&self, curve: &Curve) -> f64 {
        self.exclusion as f64 * curve.spacing()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Direct,
    #[serde(rename = "decomp")]
    Decomposition,
    #[serde(rename = "pv")]
    PrincipalValue,
    Cosine,
    Combined,
}

impl Method {
    pub const ALL: [Method; 5] =
        [Method::Direct, Method::Decomposition, Method::PrincipalValue, Method::Cosine, Method::Combined];

    pub fn label(self) -> &'static str {
        match self {
            Method::Direct => "direct",
            Method::Decomposition => "decomp",
            Method::PrincipalValue => "pv",
            Method::Cosine => "cosine",
            Method::Combined => "combined",
        }
    }

    pub fn parse(s: &str) -> Result<Method> {
        Method::ALL
            .into_iter()
            .find(|m| m.label() == s)
            .ok_or_else(|| Error::Parse(format!("unknown method `{s}`; expected direct|decomp|pv|cosine|combined")))
    }
}

/// Total energy and the named parts a method produces. Parts a method does
/// not compute are `None`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EnergyBreakdown {
    pub method: Method,
    pub n: usize,
    pub quad: QuadratureSpec,
    pub total: f64,
    pub e1: Option<f64>,
    pub e2: Option<f64>,
    pub e3: Option<f64>,
    pub e4: Option<f64>,
    pub tail: Option<f64>,
    /// Sum of the diagonal corrections included in the parts.
    pub diagonal_correction: Option<f64>,
    /// Smallest dimensionless cosine-formula density over the summed pairs.
    pub min_density: Option<f64>,
}

impl EnergyBreakdown {
    fn new(method: Method, curve: &Curve, quad: QuadratureSpec, total: f64) -> Self {
        EnergyBreakdown {
            method,
            n: curve.n(),
            quad,
            total,
            e1: None,
            e2: None,
            e3: None,
            e4: None,
            tail: None,
            diagonal_correction: None,
            min_density: None,
        }
    }
}

/// `⟨a ∧ b, c ∧ d⟩ = (a·c)(b·d) - (a·d)(b·c)`.
pub fn wedge_inner(a: &[f64], b: &[f64], c: &[f64], d: &[f64]) -> f64 {
    let dot = crate::curve::dot;
    dot(a, c) * dot(b, d) - dot(a, d) * dot(b, c)
}

/// Pointwise integrands. `inv_phi = 1/Φ(|Δf|)`, `lambda = Λ(|Δf|)`,
/// `theta = Θ(|Δf|)`.
pub mod integrand {
    use crate::angles::PairScalars;

    #[inline]
    pub fn direct(inv_phi_chord: f64, inv_phi_arc: f64) -> f64 {
        inv_phi_chord - inv_phi_arc
    }

    /// `[|Δτ|²/(2Φ), (1/Φ - Λ) ⟨τ1∧u, τ2∧u⟩]`.
    #[inline]
    pub fn decomposition(s: &PairScalars, inv_phi: f64, lambda: f64) -> [f64; 2] {
        [0.5 * s.tau_gap_sq() * inv_phi, (inv_phi - lambda) * s.wedge()]
    }

    #[inline]
    pub fn principal_value(s: &PairScalars, inv_phi: f64, lambda: f64) -> f64 {
        0.5 * s.tau_gap_sq() * inv_phi + (inv_phi - lambda) * (s.t12 - s.t1u * s.t2u)
    }

    /// `[(1-Θ)(1-cos φ)/Φ, Θ(1-cos ψ)/Φ]`.
    #[inline]
    pub fn cosine(s: &PairScalars, inv_phi: f64, theta: f64) -> [f64; 2] {
        [(1.0 - theta) * (1.0 - s.cos_phi()) * inv_phi, theta * (1.0 - s.cos_psi()) * inv_phi]
    }

    /// `(1-Θ)(1-cos φ) + Θ(1-cos ψ)`, the cosine integrand times Φ.
    #[inline]
    pub fn cosine_density(s: &PairScalars, theta: f64) -> f64 {
        (1.0 - theta) * (1.0 - s.cos_phi()) + theta * (1.0 - s.cos_psi())
    }

    /// `(1 - cos φ_Φ)/Φ` with the blend taken as a convex combination.
    #[inline]
    pub fn combined(s: &PairScalars, inv_phi: f64, theta: f64) -> f64 {
        let blend = ((1.0 - theta) * s.cos_phi() + theta * s.cos_psi()).clamp(-1.0, 1.0);
        (1.0 - blend) * inv_phi
    }
}

#[inline]
fn pair_scalars(curve: &Curve, i: usize, j: usize) -> PairScalars {
    let (fi, fj) = (curve.position(i), curve.position(j));
    let (ti, tj) = (curve.tangent(i), curve.tangent(j));
    let (mut c2, mut t12, mut t1d, mut t2d) = (0.0, 0.0, 0.0, 0.0);
    for k in 0..fi.len() {
        let d = fi[k] - fj[k];
        c2 += d * d;
        t12 += ti[k] * tj[k];
        t1d += ti[k] * d;
        t2d += tj[k] * d;
    }
    let chord = c2.sqrt();
    PairScalars { chord, t12, t1u: t1d / chord, t2u: t2d / chord }
}

/// Scalar invariants of the grid pair `(i, j)`, `i != j`.
pub fn grid_pair(curve: &Curve, i: usize, j: usize) -> PairScalars {
    assert!(i != j);
    pair_scalars(curve, i, j)
}

// Row-parallel torus sum. Row sums are computed sequentially in j and then
// combined in row order, so the result does not depend on the thread count.
fn pair_sum<const K: usize, F>(curve: &Curve, quad: &QuadratureSpec, f: F) -> ([f64; K], f64)
where
    F: Fn(&PairScalars, f64) -> ([f64; K], f64) + Sync,
{
    let n = curve.n();
    let h = curve.spacing();
    let m = quad.exclusion;
    let rows: Vec<([f64; K], f64)> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut acc = [0.0; K];
            let mut min = f64::INFINITY;
            for j in 0..n {
                let k = if i > j { i - j } else { j - i };
                let k = k.min(n - k);
                if k < m {
                    continue;
                }
                let s = pair_scalars(curve, i, j);
                let (vals, density) = f(&s, k as f64 * h);
                for (a, v) in acc.iter_mut().zip(vals) {
                    *a += v;
                }
                min = min.min(density);
            }
            (acc, min)
        })
        .collect();
    let mut total = [0.0; K];
    let mut min = f64::INFINITY;
    for (row, row_min) in rows {
        for (t, v) in total.iter_mut().zip(row) {
            *t += v;
        }
        min = min.min(row_min);
    }
    let w = h * h;
    (total.map(|v| v * w), min)
}

fn prepare(curve: &Curve, kernel: &KernelSpec, quad: &QuadratureSpec) -> Result<KernelEvaluator> {
    quad.validate(curve.n())?;
    // the tail must be integrable for every route
    kernel.tail_integral(0.5 * curve.length())?;
    let (lo, hi) = match kernel.alpha() {
        Some(_) => (curve.spacing(), 0.5 * curve.length()),
        None => {
            let ratio = bi_lipschitz_ratio(curve).ratio;
            (curve.spacing() * ratio.min(1.0), 0.5 * curve.length())
        }
    };
    kernel.evaluator(lo, hi)
}

/// Returns `F` such that a part whose integrand behaves like
/// `w κ(s)² |x|^(2-α)` near the diagonal is corrected by `w F`.
fn correction_factor(curve: &Curve, kernel: &KernelSpec, quad: &QuadratureSpec) -> Result<Option<f64>> {
    if quad.correction == DiagonalCorrection::None {
        return Ok(None);
    }
    let Some(alpha) = kernel.alpha() else { return Ok(None) };
    if !(alpha > 1.0 && alpha < 3.0) {
        return Err(Error::InvalidQuadrature(format!("diagonal correction needs 1 < alpha < 3, got {alpha}")));
    }
    let h = curve.spacing();
    let curvature_integral: f64 = curve.curvature_squared().iter().sum::<f64>() * h;
    Ok(Some(-2.0 * zeta_tail(alpha - 2.0, quad.exclusion) * h.powf(3.0 - alpha) * curvature_integral))
}

// Near-diagonal coefficients of each part, in units of κ².
struct LeadingWeights {
    direct: f64,
    e1: f64,
    e2: f64,
    e4: f64,
}

fn leading_weights(alpha: f64) -> LeadingWeights {
    LeadingWeights {
        direct: alpha / 24.0,
        e1: 0.5,
        e2: -alpha / (4.0 * (alpha - 1.0)),
        e4: (alpha - 2.0) / (4.0 * (alpha - 1.0)),
    }
}

/// Direct subtracted double integral.
pub fn energy_direct(curve: &Curve, kernel: &KernelSpec, quad: &QuadratureSpec) -> Result<EnergyBreakdown> {
    let ev = prepare(curve, kernel, quad)?;
    let ([sum], _) = pair_sum(curve, quad, |s, arc| {
        ([integrand::direct(ev.inv_phi(s.chord), ev.inv_phi(arc))], f64::INFINITY)
    });
    let mut out = EnergyBreakdown::new(Method::Direct, curve, *quad, sum);
    if let Some(f) = correction_factor(curve, kernel, quad)? {
        let c = leading_weights(kernel.alpha().unwrap()).direct * f;
        out.total += c;
        out.diagonal_correction = Some(c);
    }
    Ok(out)
}

/// Decomposition `E_Φ = E_{Φ,1} + E_{Φ,2} + tail`.
pub fn energy_decomposition(curve: &Curve, kernel: &KernelSpec, quad: &QuadratureSpec) -> Result<EnergyBreakdown> {
    let ev = prepare(curve, kernel, quad)?;
    let ([mut e1, mut e2], _) = pair_sum(curve, quad, |s, _| {
        let ip = ev.inv_phi(s.chord);
        (integrand::decomposition(s, ip, ev.lambda(s.chord, ip)), f64::INFINITY)
    });
    let tail = kernel.tail_constant(curve.length())?;
    let correction = correction_factor(curve, kernel, quad)?.map(|f| {
        let w = leading_weights(kernel.alpha().unwrap());
        (w.e1 * f, w.e2 * f)
    });
    if let Some((c1, c2)) = correction {
        e1 += c1;
        e2 += c2;
    }
    let mut out = EnergyBreakdown::new(Method::Decomposition, curve, *quad, e1 + e2 + tail);
    out.e1 = Some(e1);
    out.e2 = Some(e2);
    out.tail = Some(tail);
    out.diagonal_correction = correction.map(|(a, b)| a + b);
    Ok(out)
}

/// Dot-product (principal value) form of the decomposition.
pub fn energy_pv(curve: &Curve, kernel: &KernelSpec, quad: &QuadratureSpec) -> Result<EnergyBreakdown> {
    let ev = prepare(curve, kernel, quad)?;
    let ([mut sum], _) = pair_sum(curve, quad, |s, _| {
        let ip = ev.inv_phi(s.chord);
        ([integrand::principal_value(s, ip, ev.lambda(s.chord, ip))], f64::INFINITY)
    });
    let tail = kernel.tail_constant(curve.length())?;
    let mut out = EnergyBreakdown::new(Method::PrincipalValue, curve, *quad, 0.0);
    if let Some(f) = correction_factor(curve, kernel, quad)? {
        let w = leading_weights(kernel.alpha().unwrap());
        let c = (w.e1 + w.e2) * f;
        sum += c;
        out.diagonal_correction = Some(c);
    }
    out.total = sum + tail;
    out.tail = Some(tail);
    Ok(out)
}

/// Cosine formula `E_Φ = E_{Φ,3} + E_{Φ,4} + tail`.
pub fn energy_cosine(curve: &Curve, kernel: &KernelSpec, quad: &QuadratureSpec) -> Result<EnergyBreakdown> {
    let ev = prepare(curve, kernel, quad)?;
    let ([e3, mut e4], min_density) = pair_sum(curve, quad, |s, _| {
        let ip = ev.inv_phi(s.chord);
        let theta = ev.theta(ip, ev.lambda(s.chord, ip));
        (integrand::cosine(s, ip, theta), integrand::cosine_density(s, theta))
    });
    let tail = kernel.tail_constant(curve.length())?;
    let mut out = EnergyBreakdown::new(Method::Cosine, curve, *quad, 0.0);
    if let Some(f) = correction_factor(curve, kernel, quad)? {
        // the conformal-angle part vanishes to fourth order at the diagonal
        let c = leading_weights(kernel.alpha().unwrap()).e4 * f;
        e4 += c;
        out.diagonal_correction = Some(c);
    }
    out.total = e3 + e4 + tail;
    out.e3 = Some(e3);
    out.e4 = Some(e4);
    out.tail = Some(tail);
    out.min_density = Some(min_density);
    Ok(out)
}

/// Cosine formula with the blended angle `φ_Φ`; refused unless the kernel
/// passes the non-negative weight check, so the blend is convex.
pub fn energy_cosine_combined(
    curve: &Curve,
    kernel: &KernelSpec,
    quad: &QuadratureSpec,
) -> Result<EnergyBreakdown> {
    let report = kernel.check_assumptions(curve.length());
    if report.verdict(Assumption::NonNegativeWeight) != Verdict::Pass {
        let detail = report
            .checks
            .iter()
            .find(|c| c.assumption == Assumption::NonNegativeWeight)
            .map(|c| c.detail.clone())
            .unwrap_or_default();
        return Err(Error::NegativeWeight(format!("blended angle undefined: {detail}")));
    }
    let ev = prepare(curve, kernel, quad)?;
    let ([mut sum], min_density) = pair_sum(curve, quad, |s, _| {
        let ip = ev.inv_phi(s.chord);
        let theta = ev.theta(ip, ev.lambda(s.chord, ip));
        ([integrand::combined(s, ip, theta)], integrand::cosine_density(s, theta))
    });
    let tail = kernel.tail_constant(curve.length())?;
    let mut out = EnergyBreakdown::new(Method::Combined, curve, *quad, 0.0);
    if let Some(f) = correction_factor(curve, kernel, quad)? {
        let c = leading_weights(kernel.alpha().unwrap()).e4 * f;
        sum += c;
        out.diagonal_correction = Some(c);
    }
    out.total = sum + tail;
    out.tail = Some(tail);
    out.min_density = Some(min_density);
    Ok(out)
}

pub fn evaluate(method: Method, curve: &Curve, kernel: &KernelSpec, quad: &QuadratureSpec) -> Result<EnergyBreakdown> {
    match method {
        Method::Direct => energy_direct(curve, kernel, quad),
        Method::Decomposition => energy_decomposition(curve, kernel, quad),
        Method::PrincipalValue => energy_pv(curve, kernel, quad),
        Method::Cosine => energy_cosine(curve, kernel, quad),
        Method::Combined => energy_cosine_combined(curve, kernel, quad),
    }
}

/// Scale-invariant `L^(α-2) E_{t^α}(f)`, from the cosine formula.
pub fn normalized_energy(curve: &Curve, alpha: f64, quad: &QuadratureSpec) -> Result<f64> {
    let kernel = KernelSpec::power(alpha)?;
    let e = energy_cosine(curve, &kernel, quad)?;
    Ok(curve.length().powf(alpha - 2.0) * e.total)
}
