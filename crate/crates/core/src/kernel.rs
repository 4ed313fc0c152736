//! The kernel `Φ` of a generalized O'Hara energy and its derived weights.
//!
//! * `Λ(t) = -(1/t) ∫_t^∞ dx / Φ(x)`
//! * `Θ(t) = (1 + Φ(t) Λ(t)) / 2`
//! * tail constant `2 L ∫_{L/2}^∞ dx / Φ(x)`
//!
//! The power law `Φ(t) = t^α` has closed forms for all three; any other
//! kernel must declare a tail exponent `β` (`Φ(t) ≳ t^β` at infinity) so the
//! improper integral can be truncated with a known remainder.

use std::fmt;
use std::path::Path;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numeric::quadrature::integrate_adaptive;

/// Exponent range in which the power-law energy is a knot energy and all
/// checked assumptions hold.
pub const ALPHA_RANGE: (f64, f64) = (2.0, 3.0);

/// Number of points of the geometric grid used by the assumption checks.
pub const CHECK_GRID_POINTS: usize = 10_000;

type PhiFn = dyn Fn(f64) -> f64 + Send + Sync;

#[derive(Clone)]
pub struct CustomKernel {
    label: String,
    phi: Arc<PhiFn>,
    tail_exponent: f64,
}

impl fmt::Debug for CustomKernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomKernel")
            .field("label", &self.label)
            .field("tail_exponent", &self.tail_exponent)
            .finish()
    }
}

#[derive(Clone, Debug)]
pub enum KernelForm {
    Power { alpha: f64 },
    Custom(CustomKernel),
}

#[derive(Clone, Debug)]
pub struct KernelSpec {
    form: KernelForm,
}

impl KernelSpec {
    /// Power law `t^α` with `α` in `[2, 3)`.
    pub fn power(alpha: f64) -> Result<KernelSpec> {
        if !(alpha >= ALPHA_RANGE.0 && alpha < ALPHA_RANGE.1) {
            return Err(Error::InvalidKernel(format!(
                "exponent {alpha} outside [2, 3); use the unchecked constructor to override"
            )));
        }
        Ok(KernelSpec::power_unchecked(alpha))
    }

    /// Power law with any finite positive exponent. Outside `[2, 3)` the
    /// energy may be infinite or the weights may change sign.
    pub fn power_unchecked(alpha: f64) -> KernelSpec {
        assert!(alpha.is_finite() && alpha > 0.0, "power-law exponent must be positive");
        KernelSpec { form: KernelForm::Power { alpha } }
    }

    /// User-supplied `Φ` with declared tail exponent `β`.
    pub fn custom<F>(label: impl Into<String>, phi: F, tail_exponent: f64) -> Result<KernelSpec>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        if !tail_exponent.is_finite() {
            return Err(Error::InvalidKernel("tail exponent must be finite".into()));
        }
        for t in [1e-6, 1e-3, 1.0, 1e3] {
            let v = phi(t);
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidKernel(format!("phi({t}) = {v} is not positive")));
            }
        }
        Ok(KernelSpec {
            form: KernelForm::Custom(CustomKernel { label: label.into(), phi: Arc::new(phi), tail_exponent }),
        })
    }

    /// Kernel from tabulated `(t, Φ(t))` pairs, interpolated linearly in
    /// log-log coordinates, continued below the table with the first slope and
    /// above it as `t^β`.
    pub fn from_table(points: Vec<(f64, f64)>, tail_exponent: f64) -> Result<KernelSpec> {
        if points.len() < 2 {
            return Err(Error::InvalidKernel("table needs at least two rows".into()));
        }
        if points.iter().any(|&(t, p)| !(t > 0.0 && p > 0.0 && t.is_finite() && p.is_finite())) {
            return Err(Error::InvalidKernel("table entries must be positive".into()));
        }
        if points.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::InvalidKernel("table abscissae must increase strictly".into()));
        }
        let logs: Vec<(f64, f64)> = points.iter().map(|&(t, p)| (t.ln(), p.ln())).collect();
        let n = logs.len();
        let first_slope = (logs[1].1 - logs[0].1) / (logs[1].0 - logs[0].0);
        let phi = move |t: f64| {
            let u = t.ln();
            let v = if u <= logs[0].0 {
                logs[0].1 + first_slope * (u - logs[0].0)
            } else if u >= logs[n - 1].0 {
                logs[n - 1].1 + tail_exponent * (u - logs[n - 1].0)
            } else {
                let k = logs.partition_point(|p| p.0 <= u) - 1;
                let w = (u - logs[k].0) / (logs[k + 1].0 - logs[k].0);
                logs[k].1 + w * (logs[k + 1].1 - logs[k].1)
            };
            v.exp()
        };
        KernelSpec::custom("table", phi, tail_exponent)
    }

    /// Reads a kernel table: a `tail-exponent BETA` header line (optionally
    /// prefixed by `#`) followed by `t phi(t)` rows.
    pub fn read_table(path: &Path) -> Result<KernelSpec> {
        let text = std::fs::read_to_string(path)?;
        KernelSpec::parse_table(&text)
    }

    pub fn parse_table(text: &str) -> Result<KernelSpec> {
        let mut beta = None;
        let mut rows = Vec::new();
        for line in text.lines() {
            let line = line.trim().trim_start_matches('#').trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix("tail-exponent") {
                beta = Some(rest.trim().parse::<f64>().map_err(|e| Error::Parse(format!("tail exponent: {e}")))?);
                continue;
            }
            let cols: Vec<&str> = line.split_whitespace().collect();
            if cols.len() != 2 {
                return Err(Error::Parse(format!("kernel row `{line}` needs two columns")));
            }
            let t = cols[0].parse::<f64>().map_err(|e| Error::Parse(format!("`{}`: {e}", cols[0])))?;
            let p = cols[1].parse::<f64>().map_err(|e| Error::Parse(format!("`{}`: {e}", cols[1])))?;
            rows.push((t, p));
        }
        let beta = beta.ok_or_else(|| Error::Parse("missing `tail-exponent` header".into()))?;
        KernelSpec::from_table(rows, beta)
    }

    /// Parses `power:ALPHA` or `file:PATH`. With `allow_any_alpha` the
    /// exponent range check is skipped.
    pub fn parse(spec: &str, allow_any_alpha: bool) -> Result<KernelSpec> {
        match spec.split_once(':') {
            Some(("power", a)) => {
                let alpha = a.trim().parse::<f64>().map_err(|e| Error::Parse(format!("exponent `{a}`: {e}")))?;
                if allow_any_alpha {
                    if !(alpha.is_finite() && alpha > 0.0) {
                        return Err(Error::InvalidKernel(format!("exponent {alpha} must be positive")));
                    }
                    Ok(KernelSpec::power_unchecked(alpha))
                } else {
                    KernelSpec::power(alpha)
                }
            }
            Some(("file", path)) => KernelSpec::read_table(Path::new(path)),
            _ => Err(Error::Parse(format!("kernel spec `{spec}`; expected power:ALPHA or file:PATH"))),
        }
    }

    pub fn form(&self) -> &KernelForm {
        &self.form
    }

    /// Exponent of a power-law kernel.
    pub fn alpha(&self) -> Option<f64> {
        match self.form {
            KernelForm::Power { alpha } => Some(alpha),
            KernelForm::Custom(_) => None,
        }
    }

    pub fn label(&self) -> String {
        match &self.form {
            KernelForm::Power { alpha } => format!("power:{alpha}"),
            KernelForm::Custom(c) => c.label.clone(),
        }
    }

    fn phi_raw(&self, t: f64) -> f64 {
        match &self.form {
            KernelForm::Power { alpha } => t.powf(*alpha),
            KernelForm::Custom(c) => (c.phi)(t),
        }
    }

    pub fn phi(&self, t: f64) -> Result<f64> {
        if !(t > 0.0) {
            return Err(Error::NonPositiveArgument(t));
        }
        Ok(self.phi_raw(t))
    }

    fn tail_exponent(&self) -> f64 {
        match &self.form {
            KernelForm::Power { alpha } => *alpha,
            KernelForm::Custom(c) => c.tail_exponent,
        }
    }

    /// `∫_x^∞ dt / Φ(t)`.
    pub fn tail_integral(&self, x: f64) -> Result<f64> {
        if !(x > 0.0) {
            return Err(Error::NonPositiveArgument(x));
        }
        match self.form {
            KernelForm::Power { alpha } => {
                if alpha <= 1.0 {
                    return Err(Error::DivergentTail(format!("t^{alpha} with exponent <= 1")));
                }
                Ok(x.powf(1.0 - alpha) / (alpha - 1.0))
            }
            KernelForm::Custom(_) => self.tail_integral_numeric(x),
        }
    }

    /// Quadrature path for the tail integral, used for custom kernels and
    /// available for power laws to cross-check the closed form.
    pub fn tail_integral_numeric(&self, x: f64) -> Result<f64> {
        if !(x > 0.0) {
            return Err(Error::NonPositiveArgument(x));
        }
        let beta = self.tail_exponent();
        if beta <= 1.0 {
            return Err(Error::DivergentTail(format!("declared tail exponent {beta} <= 1")));
        }
        let mut total = 0.0;
        let mut a = x;
        let mut remainder = f64::INFINITY;
        for _ in 0..400 {
            let b = 2.0 * a;
            let r = integrate_adaptive(|t| 1.0 / self.phi_raw(t), a, b, 0.0, 1e-14);
            total += r.value;
            a = b;
            // remainder bound for Φ(t) >= Φ(a) (t/a)^β on [a, ∞)
            remainder = a / ((beta - 1.0) * self.phi_raw(a));
            if remainder <= 1e-16 * total {
                break;
            }
        }
        Ok(total + remainder)
    }

    /// `Λ(t) = -(1/t) ∫_t^∞ dx / Φ(x)`; always negative.
    pub fn lambda(&self, t: f64) -> Result<f64> {
        match self.form {
            KernelForm::Power { alpha } => {
                if !(t > 0.0) {
                    return Err(Error::NonPositiveArgument(t));
                }
                if alpha <= 1.0 {
                    return Err(Error::DivergentTail(format!("t^{alpha} with exponent <= 1")));
                }
                Ok(-t.powf(-alpha) / (alpha - 1.0))
            }
            KernelForm::Custom(_) => Ok(-self.tail_integral(t)? / t),
        }
    }

    /// `Θ(t) = (1 + Φ(t) Λ(t)) / 2`. For the power law this is the constant
    /// `(α - 2) / (2 (α - 1))`.
    pub fn theta(&self, t: f64) -> Result<f64> {
        if let Some(c) = self.theta_constant() {
            if !(t > 0.0) {
                return Err(Error::NonPositiveArgument(t));
            }
            return Ok(c);
        }
        Ok(0.5 * (1.0 + self.phi(t)? * self.lambda(t)?))
    }

    /// Closed-form `Θ` of a power law with exponent above 1.
    pub fn theta_constant(&self) -> Option<f64> {
        match self.form {
            KernelForm::Power { alpha } if alpha > 1.0 => Some((alpha - 2.0) / (2.0 * (alpha - 1.0))),
            _ => None,
        }
    }

    /// `2 L ∫_{L/2}^∞ dt / Φ(t)`; for `t^α` this is `2^α / ((α - 1) L^(α - 2))`.
    pub fn tail_constant(&self, length: f64) -> Result<f64> {
        if !(length > 0.0) {
            return Err(Error::NonPositiveArgument(length));
        }
        match self.form {
            KernelForm::Power { alpha } => {
                if alpha <= 1.0 {
                    return Err(Error::DivergentTail(format!("t^{alpha} with exponent <= 1")));
                }
                Ok(2f64.powf(alpha) / ((alpha - 1.0) * length.powf(alpha - 2.0)))
            }
            KernelForm::Custom(_) => Ok(2.0 * length * self.tail_integral(0.5 * length)?),
        }
    }

    /// Evaluator for `1/Φ`, `Λ` and `Θ` on chord lengths in `[t_min, t_max]`.
    pub fn evaluator(&self, t_min: f64, t_max: f64) -> Result<KernelEvaluator> {
        match &self.form {
            KernelForm::Power { alpha } => {
                if *alpha <= 1.0 {
                    return Err(Error::DivergentTail(format!("t^{alpha} with exponent <= 1")));
                }
                Ok(KernelEvaluator::Power {
                    alpha: *alpha,
                    inv_alpha_minus_one: 1.0 / (alpha - 1.0),
                    theta: (alpha - 2.0) / (2.0 * (alpha - 1.0)),
                })
            }
            KernelForm::Custom(c) => Ok(KernelEvaluator::Table(LambdaTable::build(self, c, t_min, t_max)?)),
        }
    }

    /// Numerical checks of the structural assumptions on `Φ` over `(0, L]`.
    pub fn check_assumptions(&self, length: f64) -> AssumptionReport {
        let mut checks = Vec::new();
        let half = 0.5 * length;

        let grid_full = geometric_grid(length * 1e-8, length, CHECK_GRID_POINTS);
        let mut monotone = true;
        let mut worst = (0.0, 0.0);
        for w in grid_full.windows(2) {
            let (a, b) = (self.phi_raw(w[0]), self.phi_raw(w[1]));
            if !(b >= a) {
                monotone = false;
                worst = (w[0], w[1]);
                break;
            }
        }
        checks.push(AssumptionCheck {
            assumption: Assumption::Monotone,
            verdict: if monotone { Verdict::Pass } else { Verdict::Fail },
            detail: if monotone {
                format!("phi non-decreasing on {CHECK_GRID_POINTS} geometric samples of (0, L]")
            } else {
                format!("phi decreases between t = {:.3e} and t = {:.3e}", worst.0, worst.1)
            },
        });

        let (tail_ok, tail_detail) = self.tail_convergence(length);
        checks.push(AssumptionCheck {
            assumption: Assumption::IntegrableTail,
            verdict: if tail_ok { Verdict::Pass } else { Verdict::Fail },
            detail: tail_detail,
        });

        checks.push(AssumptionCheck {
            assumption: Assumption::Regularity,
            verdict: Verdict::Analytic,
            detail: "function-space membership and bi-Lipschitz regularity: analytic, not machine-checkable".into(),
        });
        checks.push(AssumptionCheck {
            assumption: Assumption::LimitConditions,
            verdict: Verdict::Analytic,
            detail: "epsilon -> 0 limit conditions on (phi, f): analytic, not machine-checkable".into(),
        });

        let grid = geometric_grid(half * 1e-8, half, CHECK_GRID_POINTS);
        let (doubling_ok, doubling_detail) = match self.form {
            KernelForm::Power { alpha } => (true, format!("phi(lambda x) = lambda^{alpha} phi(x); C(lambda, L) = lambda^{alpha} > 0")),
            KernelForm::Custom(_) => {
                let mut inf = f64::INFINITY;
                for l in 1..10 {
                    let lambda = l as f64 / 10.0;
                    for &x in &grid {
                        inf = inf.min(self.phi_raw(lambda * x) / self.phi_raw(x));
                    }
                }
                (inf > 0.0 && inf.is_finite(), format!("sampled inf phi(lambda x)/phi(x) = {inf:.3e} over lambda in 0.1..0.9"))
            }
        };
        checks.push(AssumptionCheck {
            assumption: Assumption::Doubling,
            verdict: if doubling_ok { Verdict::Pass } else { Verdict::Fail },
            detail: doubling_detail,
        });

        let mut weight_infimum = None;
        if tail_ok {
            let mut inf = (f64::NAN, f64::INFINITY);
            let mut min_scaled = f64::INFINITY;
            let mut failed = None;
            // custom kernels go through the tabulated tail, one quadrature pass
            match self.evaluator(grid[0], half) {
                Ok(ev) => {
                    for &t in &grid {
                        let ip = ev.inv_phi(t);
                        let l = ev.lambda(t, ip);
                        let v = ip + l;
                        if v < inf.1 {
                            inf = (t, v);
                        }
                        min_scaled = min_scaled.min(1.0 + l / ip);
                    }
                }
                Err(e) => failed = Some(e.to_string()),
            }
            let (verdict, detail) = match failed {
                Some(msg) => (Verdict::Fail, msg),
                None => {
                    weight_infimum = Some(inf);
                    // scale-free test of 1/phi + lambda >= 0 through 1 + phi * lambda
                    let pass = min_scaled >= -1e-12;
                    (
                        if pass { Verdict::Pass } else { Verdict::Fail },
                        format!("inf of 1/phi + lambda on (0, L/2] = {:.6e} at t = {:.3e}", inf.1, inf.0),
                    )
                }
            };
            checks.push(AssumptionCheck { assumption: Assumption::NonNegativeWeight, verdict, detail });
        } else {
            checks.push(AssumptionCheck {
                assumption: Assumption::NonNegativeWeight,
                verdict: Verdict::NotEvaluated,
                detail: "lambda undefined: tail integral diverges".into(),
            });
        }

        AssumptionReport { length, checks, weight_infimum }
    }

    // Doubling test on the contributions of [L 2^k, L 2^(k+1)]: for a tail
    // t^β each contribution shrinks by 2^(1-β).
    fn tail_convergence(&self, length: f64) -> (bool, String) {
        let mut contributions = Vec::new();
        let mut a = length;
        for _ in 0..48 {
            let r = integrate_adaptive(|t| 1.0 / self.phi_raw(t), a, 2.0 * a, 0.0, 1e-12);
            contributions.push(r.value);
            a *= 2.0;
        }
        let estimates: Vec<f64> = contributions
            .windows(2)
            .skip(contributions.len() - 8)
            .map(|w| 1.0 - (w[1] / w[0]).log2())
            .collect();
        let est = estimates.iter().copied().fold(f64::INFINITY, f64::min);
        let declared = self.tail_exponent();
        let ok = est > 1.0 + 1e-6 && declared > 1.0 && est.is_finite();
        (ok, format!("estimated tail decay exponent {est:.6} (declared {declared}); integrable iff > 1"))
    }
}

fn geometric_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let ratio = (hi / lo).ln();
    (0..n).map(|k| lo * (ratio * k as f64 / (n - 1) as f64).exp()).map(|t| t.min(hi)).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Assumption {
    /// Φ monotonically increasing.
    Monotone,
    /// `∫_x^∞ dt/Φ(t) < ∞`.
    IntegrableTail,
    /// Regularity and bi-Lipschitz property of finite-energy curves.
    Regularity,
    /// Vanishing-limit conditions on the pair (Φ, f).
    LimitConditions,
    /// `Φ(λx) >= C(λ, L) Φ(x)`.
    Doubling,
    /// `inf (1/Φ + Λ) >= 0` on `(0, L/2]`, equivalently `Θ >= 0`.
    NonNegativeWeight,
}

impl Assumption {
    pub fn label(self) -> &'static str {
        match self {
            Assumption::Monotone => "monotone",
            Assumption::IntegrableTail => "integrable-tail",
            Assumption::Regularity => "regularity",
            Assumption::LimitConditions => "limit-conditions",
            Assumption::Doubling => "doubling",
            Assumption::NonNegativeWeight => "non-negative-weight",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Pass,
    Fail,
    /// A prerequisite failed, so the check could not run.
    NotEvaluated,
    /// Holds or fails analytically; no finite computation decides it.
    Analytic,
}

impl Verdict {
    pub fn label(self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::NotEvaluated => "not-evaluated",
            Verdict::Analytic => "analytic",
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct AssumptionCheck {
    pub assumption: Assumption,
    pub verdict: Verdict,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct AssumptionReport {
    pub length: f64,
    pub checks: Vec<AssumptionCheck>,
    /// `(t, 1/Φ(t) + Λ(t))` at the sampled infimum over `(0, L/2]`.
    pub weight_infimum: Option<(f64, f64)>,
}

impl AssumptionReport {
    pub fn verdict(&self, assumption: Assumption) -> Verdict {
        self.checks.iter().find(|c| c.assumption == assumption).map(|c| c.verdict).unwrap_or(Verdict::NotEvaluated)
    }
}

/// Tabulated `∫_t^∞ dx/Φ(x)` on a geometric grid, interpolated by cubic
/// Hermite polynomials in `ln t` with the exact derivative `-t / Φ(t)`.
#[derive(Clone, Debug)]
pub struct LambdaTable {
    kernel: CustomKernel,
    log_lo: f64,
    step: f64,
    values: Vec<f64>,
    slopes: Vec<f64>,
}

const TABLE_POINTS: usize = 2049;

impl LambdaTable {
    fn build(spec: &KernelSpec, kernel: &CustomKernel, t_min: f64, t_max: f64) -> Result<LambdaTable> {
        if !(t_min > 0.0 && t_max >= t_min) {
            return Err(Error::NonPositiveArgument(t_min));
        }
        let lo = (0.5 * t_min).ln();
        let hi = (2.0 * t_max).ln();
        let step = (hi - lo) / (TABLE_POINTS - 1) as f64;
        let xs: Vec<f64> = (0..TABLE_POINTS).map(|k| (lo + step * k as f64).exp()).collect();
        let mut values = vec![0.0; TABLE_POINTS];
        values[TABLE_POINTS - 1] = spec.tail_integral(xs[TABLE_POINTS - 1])?;
        for k in (0..TABLE_POINTS - 1).rev() {
            let piece = integrate_adaptive(|t| 1.0 / (kernel.phi)(t), xs[k], xs[k + 1], 0.0, 1e-14);
            values[k] = values[k + 1] + piece.value;
        }
        let slopes = xs.iter().map(|&x| -x / (kernel.phi)(x)).collect();
        Ok(LambdaTable { kernel: kernel.clone(), log_lo: lo, step, values, slopes })
    }

    fn tail(&self, t: f64) -> f64 {
        let u = (t.ln() - self.log_lo) / self.step;
        let k = (u.floor().max(0.0) as usize).min(TABLE_POINTS - 2);
        let s = u - k as f64;
        let (s2, s3) = (s * s, s * s * s);
        (2.0 * s3 - 3.0 * s2 + 1.0) * self.values[k]
            + (s3 - 2.0 * s2 + s) * self.step * self.slopes[k]
            + (-2.0 * s3 + 3.0 * s2) * self.values[k + 1]
            + (s3 - s2) * self.step * self.slopes[k + 1]
    }
}

/// Per-pair kernel quantities for the energy sums.
#[derive(Clone, Debug)]
pub enum KernelEvaluator {
    Power { alpha: f64, inv_alpha_minus_one: f64, theta: f64 },
    Table(LambdaTable),
}

impl KernelEvaluator {
    #[inline]
    pub fn inv_phi(&self, t: f64) -> f64 {
        match self {
            KernelEvaluator::Power { alpha, .. } => t.powf(-alpha),
            KernelEvaluator::Table(tab) => 1.0 / (tab.kernel.phi)(t),
        }
    }

    /// `Λ(t)` given the already evaluated `1/Φ(t)`.
    #[inline]
    pub fn lambda(&self, t: f64, inv_phi: f64) -> f64 {
        match self {
            KernelEvaluator::Power { inv_alpha_minus_one, .. } => -inv_phi * inv_alpha_minus_one,
            KernelEvaluator::Table(tab) => -tab.tail(t) / t,
        }
    }

    /// `Θ(t)` given `1/Φ(t)` and `Λ(t)`.
    #[inline]
    pub fn theta(&self, inv_phi: f64, lambda: f64) -> f64 {
        match self {
            KernelEvaluator::Power { theta, .. } => *theta,
            KernelEvaluator::Table(_) => 0.5 * (1.0 + lambda / inv_phi),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn power_law_evaluations() {
        assert_eq!(KernelSpec::power(2.0).unwrap().phi(3.0).unwrap(), 9.0);
        assert_eq!(KernelSpec::power(2.5).unwrap().phi(1.0).unwrap(), 1.0);
        assert!((KernelSpec::power_unchecked(3.0).phi(2.0).unwrap() - 8.0).abs() < 1e-14);
        assert!(matches!(KernelSpec::power(2.0).unwrap().phi(0.0), Err(Error::NonPositiveArgument(_))));
        assert!(KernelSpec::power(3.0).is_err());
        assert!(KernelSpec::power(1.9).is_err());
    }

    #[test]
    fn lambda_closed_form_values() {
        let k2 = KernelSpec::power(2.0).unwrap();
        // ∫_2^∞ t^-2 dt = 1/2, so Λ(2) = -(1/2)(1/2)
        assert!((k2.lambda(2.0).unwrap() + 0.25).abs() < 1e-15);
        assert!((k2.lambda(1.0).unwrap() + 1.0).abs() < 1e-15);
        let k25 = KernelSpec::power(2.5).unwrap();
        assert!((k25.lambda(1.0).unwrap() + 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn theta_constants() {
        assert_eq!(KernelSpec::power(2.0).unwrap().theta(0.7).unwrap(), 0.0);
        assert!((KernelSpec::power_unchecked(3.0).theta(5.0).unwrap() - 0.25).abs() < 1e-15);
        assert!((KernelSpec::power(2.5).unwrap().theta(0.1).unwrap() - 1.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn tail_constant_closed_forms() {
        let two_pi = 2.0 * std::f64::consts::PI;
        assert!((KernelSpec::power(2.0).unwrap().tail_constant(two_pi).unwrap() - 4.0).abs() < 1e-14);
        assert!((KernelSpec::power_unchecked(3.0).tail_constant(2.0).unwrap() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn divergent_tail_is_an_error() {
        let k = KernelSpec::power_unchecked(0.5);
        assert!(matches!(k.lambda(1.0), Err(Error::DivergentTail(_))));
        assert!(matches!(k.tail_constant(1.0), Err(Error::DivergentTail(_))));
        let c = KernelSpec::custom("slow", |t: f64| t.sqrt(), 0.5).unwrap();
        assert!(matches!(c.lambda(1.0), Err(Error::DivergentTail(_))));
    }

    #[test]
    fn table_kernel_reproduces_power_law() {
        let rows: Vec<(f64, f64)> = (-40..=40).map(|k| {
            let t = 10f64.powf(k as f64 / 10.0);
            (t, t.powf(2.5))
        }).collect();
        let k = KernelSpec::from_table(rows, 2.5).unwrap();
        for t in [1e-3, 0.37, 1.0, 42.0, 1e5] {
            assert!((k.phi(t).unwrap() / t.powf(2.5) - 1.0).abs() < 1e-12);
            let exact = -t.powf(-2.5) / 1.5;
            assert!((k.lambda(t).unwrap() / exact - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn parse_kernel_specs() {
        assert_eq!(KernelSpec::parse("power:2.5", false).unwrap().alpha(), Some(2.5));
        assert!(KernelSpec::parse("power:1.5", false).is_err());
        assert_eq!(KernelSpec::parse("power:1.5", true).unwrap().alpha(), Some(1.5));
        assert!(KernelSpec::parse("gauss:1", false).is_err());
        let k = KernelSpec::parse_table("# tail-exponent 2\n1 1\n2 4\n4 16\n").unwrap();
        assert!((k.phi(3.0).unwrap() - 9.0).abs() < 1e-12);
        assert!(KernelSpec::parse_table("1 1\n2 4\n").is_err());
    }

    #[test]
    fn evaluator_table_matches_closed_form() {
        let k = KernelSpec::custom("cubic-ish", |t: f64| t.powf(2.25), 2.25).unwrap();
        let ev = k.evaluator(0.01, 10.0).unwrap();
        for t in [0.01, 0.0173, 0.5, 3.3, 10.0] {
            let ip = ev.inv_phi(t);
            let l = ev.lambda(t, ip);
            let exact = -t.powf(-2.25) / 1.25;
            assert!((l / exact - 1.0).abs() < 1e-10, "t={t}: {l} vs {exact}");
            assert!((ev.theta(ip, l) - 0.25 / 2.5).abs() < 1e-10);
        }
    }
}
