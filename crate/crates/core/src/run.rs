//! Reproducible runs behind the command-line front end.
//!
//! A [`RunConfig`] fully determines a run. Every emitted table starts with
//! a header line naming the tool version and the SHA-256 of the serialized
//! config.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::angles::{cos_phi_blend, PairGeometry};
use crate::curve::{dist, read_curve_file, reparametrize_by_arclength, sample_parametric, Curve, CurveFamily};
use crate::energy::{self, DiagonalCorrection, EnergyBreakdown, Method, QuadratureSpec};
use crate::error::{Error, Result};
use crate::kernel::KernelSpec;
use crate::minimize::{minimize_under_length, DescentOptions, FourierCurve};
use crate::mobius::MobiusMap;

pub const TOOL: &str = "knot-energy";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
pub const DEFAULT_SEED: u64 = 20_240_917;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Eval,
    Compare,
    Invariance,
    Assumptions,
    Minimize,
    Sweep,
    Angles,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    /// `NAME[:p1,p2,...]` or `file:PATH`.
    pub curve: String,
    /// `power:ALPHA` or `file:PATH`.
    pub kernel: String,
    /// Accept power-law exponents outside `[2, 3)`.
    pub allow_any_alpha: bool,
    pub n: usize,
    pub exclusion: usize,
    pub correction: DiagonalCorrection,
    /// `eval`: evaluator to run.
    pub method: Method,
    /// `compare`: grid ladder.
    pub ladder: Vec<usize>,
    /// `sweep`: exponents.
    pub alphas: Vec<f64>,
    /// `invariance`: map in `inv:...;scale:...` syntax.
    pub map: Option<String>,
    /// `invariance`: additional random unit inversions with centers at
    /// distance in `[1, 2]` from the curve.
    pub random_inversions: usize,
    pub seed: u64,
    /// `minimize`: start in `perturbed-circle:amp,harmonic[,radius]` or
    /// `circle:radius` syntax.
    pub start: String,
    pub harmonics: usize,
    pub iterations: usize,
    pub tolerance: f64,
    /// `minimize`: target length; defaults to the start length.
    pub target_length: Option<f64>,
    /// `minimize`: also write the trace CSV here.
    pub trace: Option<PathBuf>,
    /// `angles`: emit every `stride`-th pair in each direction.
    pub stride: usize,
    pub format: OutputFormat,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            command: Command::Eval,
            curve: "trefoil".into(),
            kernel: "power:2".into(),
            allow_any_alpha: false,
            n: 256,
            exclusion: 1,
            correction: DiagonalCorrection::Leading,
            method: Method::Cosine,
            ladder: vec![128, 256, 512, 1024],
            alphas: vec![2.0, 2.25, 2.5, 2.75, 2.9],
            map: None,
            random_inversions: 0,
            seed: DEFAULT_SEED,
            start: "perturbed-circle:0.05,3".into(),
            harmonics: 8,
            iterations: 200,
            tolerance: 1e-6,
            target_length: None,
            trace: None,
            stride: 8,
            format: OutputFormat::Csv,
        }
    }
}

impl RunConfig {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn from_json(text: &str) -> Result<RunConfig> {
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("config: {e}")))
    }

    /// Hex SHA-256 of the canonical (compact) JSON serialization.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_string(self).expect("config serializes");
        let digest = Sha256::digest(canonical.as_bytes());
        digest.iter().fold(String::new(), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
    }

    fn quad(&self) -> QuadratureSpec {
        QuadratureSpec::new(self.exclusion, self.correction)
    }

    fn kernel_spec(&self) -> Result<KernelSpec> {
        KernelSpec::parse(&self.kernel, self.allow_any_alpha)
    }
}

/// Loads `NAME[:params]` or `file:PATH` at `n` arc-length samples.
pub fn load_curve(spec: &str, n: usize) -> Result<Curve> {
    if let Some(path) = spec.strip_prefix("file:") {
        let (dim, samples) = read_curve_file(Path::new(path))?;
        reparametrize_by_arclength(dim, &samples, n)
    } else {
        sample_parametric(&CurveFamily::parse(spec)?, n)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
    Missing,
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Missing, Cell::Num)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(v) => format!("{v:e}"),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
            Cell::Text(s) => s.clone(),
            Cell::Missing => String::new(),
        }
    }

    fn json(&self) -> serde_json::Value {
        match self {
            Cell::Num(v) if v.is_finite() => serde_json::json!(v),
            Cell::Num(v) => serde_json::json!(v.to_string()),
            Cell::Int(v) => serde_json::json!(v),
            Cell::Text(s) => serde_json::json!(s),
            Cell::Missing => serde_json::Value::Null,
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match *self {
            Cell::Num(v) => Some(v),
            Cell::Int(v) => Some(v as f64),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table { columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width");
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn get(&self, row: usize, name: &str) -> Option<&Cell> {
        self.column(name).map(|c| &self.rows[row][c])
    }

    pub fn header_line(config_hash: &str) -> String {
        format!("# {TOOL} {VERSION} config={config_hash}")
    }

    pub fn to_csv(&self, config_hash: &str) -> String {
        let mut out = Table::header_line(config_hash);
        out.push('\n');
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.iter().map(Cell::csv).collect::<Vec<_>>().join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self, config: &RunConfig) -> String {
        let rows: Vec<serde_json::Value> = self
            .rows
            .iter()
            .map(|r| {
                let map = self.columns.iter().cloned().zip(r.iter().map(Cell::json)).collect();
                serde_json::Value::Object(map)
            })
            .collect();
        let doc = serde_json::json!({
            "tool": TOOL,
            "version": VERSION,
            "config_hash": config.hash(),
            "config": config,
            "columns": self.columns,
            "rows": rows,
        });
        serde_json::to_string_pretty(&doc).expect("table serializes") + "\n"
    }

    pub fn render(&self, config: &RunConfig) -> String {
        match config.format {
            OutputFormat::Csv => self.to_csv(&config.hash()),
            OutputFormat::Json => self.to_json(config),
        }
    }
}

pub fn run(config: &RunConfig) -> Result<Table> {
    match config.command {
        Command::Eval => run_eval(config),
        Command::Compare => run_compare(config),
        Command::Invariance => run_invariance(config),
        Command::Assumptions => run_assumptions(config),
        Command::Minimize => run_minimize(config),
        Command::Sweep => run_sweep(config),
        Command::Angles => run_angles(config),
    }
}

const BREAKDOWN_COLUMNS: [&str; 10] = ["method", "N", "m", "alpha", "total", "e1", "e2", "e3", "e4", "tail"];

fn breakdown_row(b: &EnergyBreakdown, alpha: Option<f64>) -> Vec<Cell> {
    vec![
        b.method.label().into(),
        b.n.into(),
        b.quad.exclusion.into(),
        alpha.into(),
        b.total.into(),
        b.e1.into(),
        b.e2.into(),
        b.e3.into(),
        b.e4.into(),
        b.tail.into(),
    ]
}

fn context(err: Error, what: &str) -> Error {
    match err {
        Error::Io(e) => Error::Io(e),
        Error::NegativeWeight(m) => Error::NegativeWeight(format!("{what}: {m}")),
        Error::InvalidQuadrature(m) => Error::InvalidQuadrature(format!("{what}: {m}")),
        other => other,
    }
}

pub fn run_eval(config: &RunConfig) -> Result<Table> {
    let kernel = config.kernel_spec()?;
    let curve = load_curve(&config.curve, config.n)?;
    let b = energy::evaluate(config.method, &curve, &kernel, &config.quad())?;
    let mut t = Table::new(&BREAKDOWN_COLUMNS);
    t.push(breakdown_row(&b, kernel.alpha()));
    Ok(t)
}

fn rel_dev(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

/// Evaluates every method over the grid ladder. Deviations are relative to
/// the cosine-formula total at the same grid; `order_direct` is the
/// observed order `log2(dev(N/2) / dev(N))` of the direct-vs-cosine gap.
pub fn run_compare(config: &RunConfig) -> Result<Table> {
    let kernel = config.kernel_spec()?;
    let quad = config.quad();
    let mut t = Table::new(&[
        "N",
        "direct",
        "decomp",
        "pv",
        "cosine",
        "combined",
        "e1",
        "e2",
        "e3",
        "e4",
        "tail",
        "dev_direct_cosine",
        "dev_decomp_cosine",
        "dev_pv_cosine",
        "dev_combined_cosine",
        "order_direct",
    ]);
    let mut prev: Option<(usize, f64)> = None;
    for &n in &config.ladder {
        let curve = load_curve(&config.curve, n)?;
        let direct = energy::energy_direct(&curve, &kernel, &quad).map_err(|e| context(e, "direct"))?;
        let decomp = energy::energy_decomposition(&curve, &kernel, &quad).map_err(|e| context(e, "decomp"))?;
        let pv = energy::energy_pv(&curve, &kernel, &quad).map_err(|e| context(e, "pv"))?;
        let cosine = energy::energy_cosine(&curve, &kernel, &quad).map_err(|e| context(e, "cosine"))?;
        let combined = match energy::energy_cosine_combined(&curve, &kernel, &quad) {
            Ok(b) => Some(b.total),
            Err(Error::NegativeWeight(_)) => None,
            Err(e) => return Err(context(e, "combined")),
        };
        let c = cosine.total;
        let dev_direct = rel_dev(direct.total, c);
        let order = prev.map(|(pn, pd)| (pd / dev_direct).ln() / (n as f64 / pn as f64).ln());
        prev = Some((n, dev_direct));
        t.push(vec![
            n.into(),
            direct.total.into(),
            decomp.total.into(),
            pv.total.into(),
            c.into(),
            combined.into(),
            decomp.e1.into(),
            decomp.e2.into(),
            cosine.e3.into(),
            cosine.e4.into(),
            cosine.tail.into(),
            dev_direct.into(),
            rel_dev(decomp.total, c).into(),
            rel_dev(pv.total, c).into(),
            combined.map(|v| rel_dev(v, c)).into(),
            order.into(),
        ]);
    }
    Ok(t)
}

/// Per-exponent Θ constant, tail constant and cosine-formula breakdown.
pub fn run_sweep(config: &RunConfig) -> Result<Table> {
    let curve = load_curve(&config.curve, config.n)?;
    let quad = config.quad();
    let length = curve.length();
    let mut t = Table::new(&["alpha", "theta", "one_minus_theta", "tail", "L", "total", "e3", "e4", "normalized"]);
    for &alpha in &config.alphas {
        let kernel = if config.allow_any_alpha { KernelSpec::power_unchecked(alpha) } else { KernelSpec::power(alpha)? };
        let theta = kernel.theta_constant().expect("power law has constant theta");
        let tail = kernel.tail_constant(length)?;
        let b = energy::energy_cosine(&curve, &kernel, &quad)?;
        t.push(vec![
            alpha.into(),
            theta.into(),
            (1.0 - theta).into(),
            tail.into(),
            length.into(),
            b.total.into(),
            b.e3.into(),
            b.e4.into(),
            (length.powf(alpha - 2.0) * b.total).into(),
        ]);
    }
    Ok(t)
}

/// Random unit-sphere inversion centers at distance in `[1, 2]` from the
/// curve, drawn from a seeded generator.
pub fn random_inversion_centers(curve: &Curve, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let dim = curve.dim();
    let mut lo = vec![f64::INFINITY; dim];
    let mut hi = vec![f64::NEG_INFINITY; dim];
    for p in curve.positions().chunks(dim) {
        for d in 0..dim {
            lo[d] = lo[d].min(p[d]);
            hi[d] = hi[d].max(p[d]);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let c: Vec<f64> = (0..dim).map(|d| rng.gen_range(lo[d] - 2.0..hi[d] + 2.0)).collect();
        let distance = curve.positions().chunks(dim).map(|p| dist(p, &c)).fold(f64::INFINITY, f64::min);
        if (1.0..=2.0).contains(&distance) {
            out.push(c);
        }
    }
    out
}

/// Energies before and after Möbius maps. `conformal_part` is the summed
/// `(1 - cos φ) / |Δf|² h²`, which is inversion invariant in the continuum.
pub fn run_invariance(config: &RunConfig) -> Result<Table> {
    let kernel = config.kernel_spec()?;
    let quad = config.quad();
    let curve = load_curve(&config.curve, config.n)?;
    let mut maps: Vec<(String, MobiusMap)> = Vec::new();
    if let Some(spec) = &config.map {
        maps.push((spec.clone(), MobiusMap::parse(spec, curve.dim())?));
    }
    for c in random_inversion_centers(&curve, config.random_inversions, config.seed) {
        let label = format!("inv:{},1", c.iter().map(|v| format!("{v:.6}")).collect::<Vec<_>>().join(","));
        maps.push((label, MobiusMap::inversion(&c, 1.0)?));
    }
    if maps.is_empty() {
        return Err(Error::Parse("invariance needs --map or --random-inversions".into()));
    }
    let mobius_kernel = KernelSpec::power(2.0)?;
    let alpha = kernel.alpha();
    let before = energy::energy_cosine(&curve, &kernel, &quad)?;
    let conformal_before = energy::energy_cosine(&curve, &mobius_kernel, &quad)?.e3.unwrap_or(f64::NAN);
    let mut t = Table::new(&[
        "map",
        "N",
        "L_before",
        "L_after",
        "energy_before",
        "energy_after",
        "rel_dev",
        "normalized_before",
        "normalized_after",
        "normalized_rel_dev",
        "conformal_before",
        "conformal_after",
        "conformal_rel_dev",
    ]);
    for (label, map) in maps {
        let image = map.transform_curve(&curve, config.n)?;
        let after = energy::energy_cosine(&image, &kernel, &quad)?;
        let conformal_after = energy::energy_cosine(&image, &mobius_kernel, &quad)?.e3.unwrap_or(f64::NAN);
        let norm = |c: &Curve, e: f64| alpha.map(|a| c.length().powf(a - 2.0) * e);
        let nb = norm(&curve, before.total);
        let na = norm(&image, after.total);
        t.push(vec![
            label.into(),
            config.n.into(),
            curve.length().into(),
            image.length().into(),
            before.total.into(),
            after.total.into(),
            rel_dev(after.total, before.total).into(),
            nb.into(),
            na.into(),
            nb.zip(na).map(|(b, a)| rel_dev(a, b)).into(),
            conformal_before.into(),
            conformal_after.into(),
            rel_dev(conformal_after, conformal_before).into(),
        ]);
    }
    Ok(t)
}

/// Assumption verdicts for the kernel at the length of the chosen curve.
pub fn run_assumptions(config: &RunConfig) -> Result<Table> {
    let kernel = KernelSpec::parse(&config.kernel, true)?;
    let length = load_curve(&config.curve, config.n)?.length();
    let report = kernel.check_assumptions(length);
    let mut t = Table::new(&["kernel", "L", "assumption", "verdict", "detail"]);
    for c in &report.checks {
        t.push(vec![
            kernel.label().into(),
            length.into(),
            c.assumption.label().into(),
            c.verdict.label().into(),
            c.detail.clone().into(),
        ]);
    }
    if let Some((at, value)) = report.weight_infimum {
        t.push(vec![
            kernel.label().into(),
            length.into(),
            "weight-infimum".into(),
            Cell::Missing,
            format!("1/phi + lambda = {value:e} at t = {at:e}").into(),
        ]);
    }
    Ok(t)
}

/// Parses the minimizer start: `perturbed-circle:amp,harmonic[,radius]` or
/// `circle[:radius]`.
pub fn parse_start(spec: &str, harmonics: usize) -> Result<FourierCurve> {
    match CurveFamily::parse(spec)? {
        CurveFamily::Circle { radius } => Ok(FourierCurve::circle(radius, harmonics)),
        CurveFamily::PerturbedCircle { radius, amplitude, harmonic } => {
            FourierCurve::perturbed_circle(radius, amplitude, harmonic as usize, harmonics)
        }
        other => Err(Error::Parse(format!("minimizer start must be a circle or perturbed circle, got {other:?}"))),
    }
}

pub const TRACE_COLUMNS: [&str; 8] = ["iteration", "energy", "e3", "e4", "e4_excess", "step", "grad_norm", "length"];

pub fn run_minimize(config: &RunConfig) -> Result<Table> {
    let kernel = config.kernel_spec()?;
    let start = parse_start(&config.start, config.harmonics)?;
    let target = match config.target_length {
        Some(l) => l,
        None => crate::curve::parametric_length(&start),
    };
    let opts = DescentOptions {
        n: config.n,
        max_iterations: config.iterations,
        tolerance: config.tolerance,
        quad: config.quad(),
        ..DescentOptions::default()
    };
    let outcome = minimize_under_length(&start, &kernel, target, &opts)?;
    let mut t = Table::new(&TRACE_COLUMNS);
    for r in &outcome.trace.records {
        t.push(vec![
            r.iteration.into(),
            r.energy.into(),
            r.e3.into(),
            r.e4.into(),
            r.e4_excess.into(),
            r.step.into(),
            r.grad_norm.into(),
            r.length.into(),
        ]);
    }
    if let Some(path) = &config.trace {
        std::fs::write(path, t.to_csv(&config.hash()))?;
    }
    Ok(t)
}

/// Per-pair angle dump on a subsampled grid.
pub fn run_angles(config: &RunConfig) -> Result<Table> {
    let kernel = config.kernel_spec()?;
    let curve = load_curve(&config.curve, config.n)?;
    let stride = config.stride.max(1);
    let mut t = Table::new(&["s1", "s2", "cos_psi", "cos_phi", "cos_phi_blend"]);
    let dim = curve.dim();
    let mut delta = vec![0.0; dim];
    for i in (0..curve.n()).step_by(stride) {
        for j in (0..curve.n()).step_by(stride) {
            if i == j {
                continue;
            }
            for (d, v) in delta.iter_mut().enumerate() {
                *v = curve.position(i)[d] - curve.position(j)[d];
            }
            let g = PairGeometry::new(&delta, curve.tangent(i), curve.tangent(j))?;
            let s = g.scalars()?;
            let theta = kernel.theta(s.chord)?;
            let blend = cos_phi_blend(s.cos_phi(), s.cos_psi(), theta).ok();
            t.push(vec![
                curve.arc_coordinate(i).into(),
                curve.arc_coordinate(j).into(),
                s.cos_psi().into(),
                s.cos_phi().into(),
                blend.into(),
            ]);
        }
    }
    Ok(t)
}

/// Round planar circle of the given length.
pub fn circle_of_length(length: f64, n: usize) -> Result<Curve> {
    sample_parametric(&CurveFamily::Circle { radius: length / (2.0 * PI) }, n)
}
