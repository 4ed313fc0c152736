//! Closed curves sampled uniformly in arc length.
//!
//! A [`Curve`] stores `N` points `f_i = f(s_i)` with `s_i = i L / N` on the
//! circle `R / L Z`, together with unit tangents. Curves are built either from
//! an analytic parametrization ([`ParametricCurve`], resampled exactly by
//! Newton iteration on its arc length) or from raw samples
//! ([`reparametrize_by_arclength`], resampled through a periodic spline).

use std::f64::consts::PI;
use std::path::Path;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::numeric::interp::{MonotoneCubic, PeriodicSpline};
use crate::numeric::quadrature::gauss_legendre_8;
use crate::numeric::spectral;

pub const MIN_SAMPLES: usize = 16;

/// Curves whose bi-Lipschitz ratio falls below this are treated as non-embedded.
pub const EMBEDDING_THRESHOLD: f64 = 1e-6;

const UNIT_TANGENT_TOL: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct Curve {
    dim: usize,
    positions: Vec<f64>,
    tangents: Vec<f64>,
    length: f64,
}

impl Curve {
    /// Builds a curve from interleaved positions and tangents, checking every
    /// invariant: even `N >= 16`, unit tangents, chord consistency with the
    /// uniform arc-length grid, and embeddedness.
    pub fn new(dim: usize, positions: Vec<f64>, tangents: Vec<f64>, length: f64) -> Result<Curve> {
        if dim < 2 {
            return Err(Error::InvalidCurve(format!("ambient dimension {dim} < 2")));
        }
        if positions.len() % dim != 0 || positions.len() != tangents.len() {
            return Err(Error::InvalidCurve("position/tangent buffers disagree".into()));
        }
        check_sample_count(positions.len() / dim)?;
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::InvalidCurve(format!("length {length} is not positive")));
        }
        if positions.iter().chain(&tangents).any(|v| !v.is_finite()) {
            return Err(Error::InvalidCurve("non-finite sample".into()));
        }
        let curve = Curve { dim, positions, tangents, length };
        for i in 0..curve.n() {
            let norm = norm(curve.tangent(i));
            if (norm - 1.0).abs() > UNIT_TANGENT_TOL {
                return Err(Error::InvalidCurve(format!("tangent {i} has norm {norm}")));
            }
        }
        let deviation = curve.max_chord_deviation();
        let tol = curve.chord_tolerance();
        if deviation > tol {
            return Err(Error::InvalidCurve(format!(
                "chord lengths deviate from L/N by {deviation:.3e} (tolerance {tol:.3e}); not arc-length parametrized"
            )));
        }
        let bl = bi_lipschitz_ratio(&curve);
        if !bl.embedded {
            return Err(Error::NotEmbedded { ratio: bl.ratio });
        }
        Ok(curve)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of samples `N`.
    pub fn n(&self) -> usize {
        self.positions.len() / self.dim
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    /// Grid spacing `L / N`.
    pub fn spacing(&self) -> f64 {
        self.length / self.n() as f64
    }

    pub fn position(&self, i: usize) -> &[f64] {
        &self.positions[i * self.dim..(i + 1) * self.dim]
    }

    pub fn tangent(&self, i: usize) -> &[f64] {
        &self.tangents[i * self.dim..(i + 1) * self.dim]
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    pub fn tangents(&self) -> &[f64] {
        &self.tangents
    }

    /// Arc-length coordinate of sample `i`.
    pub fn arc_coordinate(&self, i: usize) -> f64 {
        i as f64 * self.spacing()
    }

    /// Uniformly scaled copy `λ f`; every invariant scales exactly.
    pub fn scaled(&self, factor: f64) -> Curve {
        assert!(factor > 0.0);
        Curve {
            dim: self.dim,
            positions: self.positions.iter().map(|v| v * factor).collect(),
            tangents: self.tangents.clone(),
            length: self.length * factor,
        }
    }

    /// Same curve with the starting sample moved to index `shift`.
    pub fn shifted(&self, shift: usize) -> Curve {
        let n = self.n();
        let d = self.dim;
        let rot = |buf: &[f64]| (0..n).flat_map(|i| buf[((i + shift) % n) * d..((i + shift) % n + 1) * d].to_vec()).collect();
        Curve { dim: d, positions: rot(&self.positions), tangents: rot(&self.tangents), length: self.length }
    }

    /// Squared curvature `|f''(s_i)|^2` by Fourier differentiation in arc length.
    pub fn curvature_squared(&self) -> Vec<f64> {
        let d2 = spectral::derivative(&self.positions, self.dim, self.length, 2);
        d2.chunks(self.dim).map(|c| c.iter().map(|v| v * v).sum()).collect()
    }

    /// Trigonometric interpolation of the positions onto `factor * N` points.
    pub fn upsampled_positions(&self, factor: usize) -> Vec<f64> {
        spectral::upsample(&self.positions, self.dim, factor)
    }

    /// Largest relative deviation of consecutive chord lengths from `L / N`.
    pub fn max_chord_deviation(&self) -> f64 {
        let h = self.spacing();
        let n = self.n();
        (0..n)
            .map(|i| {
                let c = dist(self.position(i), self.position((i + 1) % n));
                (c / h - 1.0).abs()
            })
            .fold(0.0, f64::max)
    }

    // Chords of a unit-speed curve fall short of L/N by about kappa^2 h^2 / 24.
    fn chord_tolerance(&self) -> f64 {
        let n = self.n() as f64;
        let kmax2 = self.curvature_squared().into_iter().fold(0.0, f64::max);
        (10.0 + kmax2 * self.length * self.length / 12.0) / (n * n)
    }
}

fn check_sample_count(n: usize) -> Result<()> {
    if n < MIN_SAMPLES || n % 2 != 0 {
        return Err(Error::InvalidCurve(format!("sample count {n} must be even and >= {MIN_SAMPLES}")));
    }
    Ok(())
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub(crate) fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Shorter-arc distance between arc-length coordinates on `R / L Z`.
pub fn intrinsic_distance(s1: f64, s2: f64, length: f64) -> f64 {
    let d = (s1 - s2).abs() % length;
    d.min(length - d)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BiLipschitz {
    /// `min |f(s_i) - f(s_j)| / D(s_i, s_j)` over distinct sample pairs.
    pub ratio: f64,
    pub embedded: bool,
}

pub fn bi_lipschitz_ratio(curve: &Curve) -> BiLipschitz {
    bi_lipschitz_ratio_of_samples(curve.dim(), curve.positions(), curve.length())
}

/// Bi-Lipschitz proxy for raw uniformly spaced samples of a closed curve of
/// the given length. Coincident distinct samples give ratio 0.
pub fn bi_lipschitz_ratio_of_samples(dim: usize, positions: &[f64], length: f64) -> BiLipschitz {
    let n = positions.len() / dim;
    let h = length / n as f64;
    let p = |i: usize| &positions[i * dim..(i + 1) * dim];
    let ratio = (0..n)
        .into_par_iter()
        .map(|i| {
            (i + 1..n)
                .map(|j| {
                    let k = (j - i).min(n - (j - i));
                    dist(p(i), p(j)) / (k as f64 * h)
                })
                .fold(f64::INFINITY, f64::min)
        })
        .reduce(|| f64::INFINITY, f64::min);
    BiLipschitz { ratio, embedded: ratio >= EMBEDDING_THRESHOLD }
}

/// A smooth closed curve `t -> f(t)`, `t` in `[0, 2π)`, with non-vanishing speed.
pub trait ParametricCurve {
    fn dim(&self) -> usize;

    /// Writes `f(t)` into `pos` and `f'(t)` into `deriv`.
    fn eval(&self, t: f64, pos: &mut [f64], deriv: &mut [f64]);
}

fn speed_at<P: ParametricCurve + ?Sized>(curve: &P, t: f64, pos: &mut [f64], der: &mut [f64]) -> f64 {
    curve.eval(t, pos, der);
    norm(der)
}

// Cumulative arc length on a uniform parameter grid of `cells` cells.
fn cumulative_length<P: ParametricCurve + ?Sized>(curve: &P, cells: usize) -> Vec<f64> {
    let dim = curve.dim();
    let mut pos = vec![0.0; dim];
    let mut der = vec![0.0; dim];
    let dt = 2.0 * PI / cells as f64;
    let mut cum = Vec::with_capacity(cells + 1);
    cum.push(0.0);
    let mut acc = 0.0;
    for k in 0..cells {
        let a = k as f64 * dt;
        acc += gauss_legendre_8(|t| speed_at(curve, t, &mut pos, &mut der), a, a + dt);
        cum.push(acc);
    }
    cum
}

/// Total arc length of a parametric curve.
pub fn parametric_length<P: ParametricCurve + ?Sized>(curve: &P) -> f64 {
    cumulative_length(curve, 2048)[2048]
}

/// Samples an analytic closed curve at `n` points equally spaced in arc
/// length, with exact unit tangents.
pub fn sample_parametric<P: ParametricCurve + ?Sized>(curve: &P, n: usize) -> Result<Curve> {
    check_sample_count(n)?;
    let dim = curve.dim();
    let cells = (8 * n).max(2048);
    let cum = cumulative_length(curve, cells);
    let length = cum[cells];
    if !(length.is_finite() && length > 0.0) {
        return Err(Error::InvalidCurve("parametric curve has zero length".into()));
    }
    let dt = 2.0 * PI / cells as f64;
    let mut pos = vec![0.0; dim];
    let mut der = vec![0.0; dim];
    let mut positions = Vec::with_capacity(n * dim);
    let mut tangents = Vec::with_capacity(n * dim);
    for i in 0..n {
        let target = i as f64 * length / n as f64;
        let k = cum.partition_point(|&c| c <= target).saturating_sub(1).min(cells - 1);
        let t0 = k as f64 * dt;
        let mut t = t0 + (target - cum[k]) / speed_at(curve, t0, &mut pos, &mut der);
        for _ in 0..30 {
            let s = cum[k] + gauss_legendre_8(|u| speed_at(curve, u, &mut pos, &mut der), t0, t);
            let step = (s - target) / speed_at(curve, t, &mut pos, &mut der);
            t -= step;
            if step.abs() < 1e-15 * (1.0 + t.abs()) {
                break;
            }
        }
        curve.eval(t, &mut pos, &mut der);
        let sp = norm(&der);
        positions.extend_from_slice(&pos);
        tangents.extend(der.iter().map(|v| v / sp));
    }
    Curve::new(dim, positions, tangents, length)
}

/// Named test-curve families.
#[derive(Clone, Debug, PartialEq)]
pub enum CurveFamily {
    Circle { radius: f64 },
    /// (2,3) torus knot on a torus with radii `major > minor > 0`.
    Trefoil { major: f64, minor: f64 },
    /// `r [(1 + a cos kt) cos t, (1 + a cos kt) sin t, a sin kt]`.
    PerturbedCircle { radius: f64, amplitude: f64, harmonic: u32 },
    /// Planar ellipse with semi-axes `a` (x) and `b` (y).
    Ellipse { a: f64, b: f64 },
}

impl CurveFamily {
    /// Builds a family from its name and a (possibly empty) parameter list;
    /// missing parameters take the defaults `circle:1`, `trefoil:2,1`,
    /// `perturbed-circle:0.05,3,1`, `ellipse:2,1`.
    pub fn from_name(name: &str, params: &[f64]) -> Result<CurveFamily> {
        let p = |i: usize, default: f64| params.get(i).copied().unwrap_or(default);
        let family = match name {
            "circle" => CurveFamily::Circle { radius: p(0, 1.0) },
            "trefoil" => CurveFamily::Trefoil { major: p(0, 2.0), minor: p(1, 1.0) },
            "perturbed-circle" => {
                let k = p(1, 3.0);
                if k.fract() != 0.0 || k < 2.0 {
                    return Err(Error::InvalidParameters(format!("harmonic {k} must be an integer >= 2")));
                }
                CurveFamily::PerturbedCircle { radius: p(2, 1.0), amplitude: p(0, 0.05), harmonic: k as u32 }
            }
            "ellipse" => CurveFamily::Ellipse { a: p(0, 2.0), b: p(1, 1.0) },
            other => return Err(Error::UnknownFamily(other.to_string())),
        };
        family.validate()?;
        Ok(family)
    }

    /// Parses `name` or `name:p1,p2,...`.
    pub fn parse(spec: &str) -> Result<CurveFamily> {
        let (name, rest) = spec.split_once(':').unwrap_or((spec, ""));
        let params = parse_list(rest)?;
        CurveFamily::from_name(name, &params)
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            CurveFamily::Circle { radius } => radius > 0.0,
            CurveFamily::Trefoil { major, minor } => minor > 0.0 && major > minor,
            CurveFamily::PerturbedCircle { radius, amplitude, .. } => radius > 0.0 && amplitude.abs() < 0.5,
            CurveFamily::Ellipse { a, b } => a > 0.0 && b > 0.0,
        };
        if ok && self.params_finite() {
            Ok(())
        } else {
            Err(Error::InvalidParameters(format!("{self:?}")))
        }
    }

    fn params_finite(&self) -> bool {
        match *self {
            CurveFamily::Circle { radius } => radius.is_finite(),
            CurveFamily::Trefoil { major, minor } => major.is_finite() && minor.is_finite(),
            CurveFamily::PerturbedCircle { radius, amplitude, .. } => radius.is_finite() && amplitude.is_finite(),
            CurveFamily::Ellipse { a, b } => a.is_finite() && b.is_finite(),
        }
    }
}

pub(crate) fn parse_list(s: &str) -> Result<Vec<f64>> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(',')
        .map(|v| v.trim().parse::<f64>().map_err(|e| Error::Parse(format!("`{v}`: {e}"))))
        .collect()
}

impl ParametricCurve for CurveFamily {
    fn dim(&self) -> usize {
        3
    }

    fn eval(&self, t: f64, pos: &mut [f64], der: &mut [f64]) {
        let (s, c) = t.sin_cos();
        match *self {
            CurveFamily::Circle { radius } => {
                pos.copy_from_slice(&[radius * c, radius * s, 0.0]);
                der.copy_from_slice(&[-radius * s, radius * c, 0.0]);
            }
            CurveFamily::Trefoil { major, minor } => {
                let (s2, c2) = (2.0 * t).sin_cos();
                let (s3, c3) = (3.0 * t).sin_cos();
                let rho = major + minor * c3;
                pos.copy_from_slice(&[rho * c2, rho * s2, minor * s3]);
                let drho = -3.0 * minor * s3;
                der.copy_from_slice(&[drho * c2 - 2.0 * rho * s2, drho * s2 + 2.0 * rho * c2, 3.0 * minor * c3]);
            }
            CurveFamily::PerturbedCircle { radius, amplitude, harmonic } => {
                let k = harmonic as f64;
                let (sk, ck) = (k * t).sin_cos();
                let rho = 1.0 + amplitude * ck;
                let drho = -amplitude * k * sk;
                pos.copy_from_slice(&[radius * rho * c, radius * rho * s, radius * amplitude * sk]);
                der.copy_from_slice(&[
                    radius * (drho * c - rho * s),
                    radius * (drho * s + rho * c),
                    radius * amplitude * k * ck,
                ]);
            }
            CurveFamily::Ellipse { a, b } => {
                pos.copy_from_slice(&[a * c, b * s, 0.0]);
                der.copy_from_slice(&[-a * s, b * c, 0.0]);
            }
        }
    }
}

/// Factory for the named test curves, resampled by arc length.
pub fn make_named_curve(name: &str, params: &[f64], n: usize) -> Result<Curve> {
    let family = CurveFamily::from_name(name, params)?;
    sample_parametric(&family, n)
}

/// Resamples a closed polygon of `M >= 16` points (interleaved, in parameter
/// order, without a repeated first point) at `n` points equally spaced in arc
/// length. Tangents come from Fourier differentiation of the resampled points.
pub fn reparametrize_by_arclength(dim: usize, samples: &[f64], n: usize) -> Result<Curve> {
    check_sample_count(n)?;
    if dim < 2 || samples.len() % dim != 0 {
        return Err(Error::InvalidCurve("sample buffer does not match dimension".into()));
    }
    let m = samples.len() / dim;
    if m < MIN_SAMPLES {
        return Err(Error::InvalidCurve(format!("{m} input samples; need at least {MIN_SAMPLES}")));
    }
    let p = |i: usize| &samples[(i % m) * dim..(i % m + 1) * dim];
    let extent = samples.iter().fold(0.0f64, |a, v| a.max(v.abs())).max(f64::MIN_POSITIVE);
    let mut knots = Vec::with_capacity(m);
    let mut acc = 0.0;
    for i in 0..m {
        knots.push(acc);
        let c = dist(p(i), p(i + 1));
        if c <= 1e-14 * extent {
            return Err(Error::DuplicatePoint(i));
        }
        acc += c;
    }
    let spline = PeriodicSpline::new(knots.clone(), acc, samples.to_vec(), dim);

    let mut scratch = vec![0.0; dim];
    let mut cum = Vec::with_capacity(m + 1);
    cum.push(0.0);
    for k in 0..m {
        let (a, b) = spline.segment_bounds(k);
        let seg = gauss_legendre_8(|x| spline.speed(k, x, &mut scratch), a, b);
        let next = cum[k] + seg;
        if !(seg > 0.0 && next > cum[k]) {
            return Err(Error::NonMonotoneArcLength(k));
        }
        cum.push(next);
    }
    let length = cum[m];
    let mut params = knots;
    params.push(acc);
    let inverse = MonotoneCubic::new(cum.clone(), params);

    let mut positions = vec![0.0; n * dim];
    for i in 0..n {
        let target = i as f64 * length / n as f64;
        let k = cum.partition_point(|&c| c <= target).saturating_sub(1).min(m - 1);
        let (a, b) = spline.segment_bounds(k);
        let mut x = inverse.eval(target).clamp(a, b);
        for _ in 0..30 {
            let s = cum[k] + gauss_legendre_8(|u| spline.speed(k, u, &mut scratch), a, x);
            let step = (s - target) / spline.speed(k, x, &mut scratch);
            x = (x - step).clamp(a, b);
            if step.abs() < 1e-16 * acc {
                break;
            }
        }
        spline.eval(k, x, &mut positions[i * dim..(i + 1) * dim]);
    }
    let mut tangents = spectral::derivative(&positions, dim, length, 1);
    for t in tangents.chunks_mut(dim) {
        let s = norm(t);
        t.iter_mut().for_each(|v| *v /= s);
    }
    Curve::new(dim, positions, tangents, length)
}

/// Reads a curve file: one point per line, whitespace-separated coordinates,
/// `#` comments and blank lines ignored. Returns `(dim, interleaved points)`.
pub fn read_curve_file(path: &Path) -> Result<(usize, Vec<f64>)> {
    let text = std::fs::read_to_string(path)?;
    parse_curve_text(&text)
}

pub fn parse_curve_text(text: &str) -> Result<(usize, Vec<f64>)> {
    let mut dim = 0;
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let coords: Vec<f64> = line
            .split_whitespace()
            .map(|v| v.parse::<f64>().map_err(|e| Error::Parse(format!("line {}: `{v}`: {e}", lineno + 1))))
            .collect::<Result<_>>()?;
        if dim == 0 {
            dim = coords.len();
        } else if coords.len() != dim {
            return Err(Error::Parse(format!("line {}: expected {dim} coordinates, got {}", lineno + 1, coords.len())));
        }
        out.extend(coords);
    }
    if dim < 2 {
        return Err(Error::Parse("curve file needs at least two coordinates per point".into()));
    }
    Ok((dim, out))
}

pub fn write_curve_file(path: &Path, curve: &Curve) -> Result<()> {
    let mut text = String::new();
    for i in 0..curve.n() {
        let line: Vec<String> = curve.position(i).iter().map(|v| format!("{v:e}")).collect();
        text.push_str(&line.join(" "));
        text.push('\n');
    }
    std::fs::write(path, text)?;
    Ok(())
}
