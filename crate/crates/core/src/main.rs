use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use knot_energy::energy::{DiagonalCorrection, Method};
use knot_energy::run::{self, Command, OutputFormat, RunConfig, DEFAULT_SEED};
use knot_energy::Error;

const THREADS_ENV: &str = "KNOT_ENERGY_THREADS";

#[derive(Parser)]
#[command(name = "knot-energy", version, about = "Generalized O'Hara knot energies of closed curves")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Energy breakdown of one curve by one method.
    Eval {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value = "cosine")]
        method: MethodArg,
    },
    /// All methods over a grid ladder, with deviations and observed orders.
    Compare {
        #[command(flatten)]
        common: Common,
        /// Comma-separated grid sizes.
        #[arg(long, value_delimiter = ',', default_values_t = [128, 256, 512, 1024])]
        ladder: Vec<usize>,
    },
    /// Energies before and after Möbius maps.
    Invariance {
        #[command(flatten)]
        common: Common,
        /// `inv:cx,cy,cz,rho;scale:L;trans:x,y,z;rot:i,j,theta`.
        #[arg(long)]
        map: Option<String>,
        /// Additional seeded random unit inversions.
        #[arg(long, default_value_t = 0)]
        random_inversions: usize,
    },
    /// Assumption verdicts for a kernel at the curve length.
    Assumptions {
        #[command(flatten)]
        common: Common,
    },
    /// Length-constrained descent from a perturbed circle.
    Minimize {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "perturbed-circle:0.05,3")]
        start: String,
        #[arg(long, default_value_t = 8)]
        harmonics: usize,
        #[arg(long, default_value_t = 200)]
        iters: usize,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        #[arg(long)]
        target_length: Option<f64>,
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Θ constant, tail constant and cosine breakdown over exponents.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',', default_values_t = [2.0, 2.25, 2.5, 2.75, 2.9])]
        alphas: Vec<f64>,
    },
    /// Per-pair cos ψ, cos φ and cos φ_Φ on a subsampled grid.
    Angles {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 8)]
        stride: usize,
    },
    /// Re-run a saved JSON config.
    Run {
        config: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Common {
    /// `NAME[:p1,p2,...]` (circle, trefoil, perturbed-circle, ellipse) or `file:PATH`.
    #[arg(long, default_value = "trefoil")]
    curve: String,
    /// `power:ALPHA` or `file:PATH`.
    #[arg(long, default_value = "power:2")]
    kernel: String,
    #[arg(long, default_value_t = 256)]
    n: usize,
    /// Grid cells excluded on each side of the diagonal.
    #[arg(long, default_value_t = 1)]
    m: usize,
    /// Plain trapezoid sums without the diagonal correction.
    #[arg(long)]
    no_correction: bool,
    /// Accept power-law exponents outside [2, 3).
    #[arg(long)]
    allow_any_alpha: bool,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long, value_enum, default_value = "csv")]
    out: FormatArg,
    /// Write the table here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Print the resolved JSON config and exit.
    #[arg(long)]
    print_config: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Direct,
    Decomp,
    Pv,
    Cosine,
    Combined,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Method {
        match m {
            MethodArg::Direct => Method::Direct,
            MethodArg::Decomp => Method::Decomposition,
            MethodArg::Pv => Method::PrincipalValue,
            MethodArg::Cosine => Method::Cosine,
            MethodArg::Combined => Method::Combined,
        }
    }
}

fn base(command: Command, c: &Common) -> RunConfig {
    RunConfig {
        command,
        curve: c.curve.clone(),
        kernel: c.kernel.clone(),
        allow_any_alpha: c.allow_any_alpha,
        n: c.n,
        exclusion: c.m,
        correction: if c.no_correction { DiagonalCorrection::None } else { DiagonalCorrection::Leading },
        seed: c.seed,
        format: match c.out {
            FormatArg::Csv => OutputFormat::Csv,
            FormatArg::Json => OutputFormat::Json,
        },
        ..RunConfig::default()
    }
}

struct Plan {
    config: RunConfig,
    output: Option<PathBuf>,
    print_config: bool,
}

fn plan(cmd: Cmd) -> Result<Plan, Error> {
    let (config, common) = match cmd {
        Cmd::Run { config, output } => {
            let text = std::fs::read_to_string(&config)?;
            return Ok(Plan { config: RunConfig::from_json(&text)?, output, print_config: false });
        }
        Cmd::Eval { common, method } => (RunConfig { method: method.into(), ..base(Command::Eval, &common) }, common),
        Cmd::Compare { common, ladder } => (RunConfig { ladder, ..base(Command::Compare, &common) }, common),
        Cmd::Invariance { common, map, random_inversions } => {
            (RunConfig { map, random_inversions, ..base(Command::Invariance, &common) }, common)
        }
        Cmd::Assumptions { common } => (base(Command::Assumptions, &common), common),
        Cmd::Minimize { common, start, harmonics, iters, tol, target_length, trace } => (
            RunConfig {
                start,
                harmonics,
                iterations: iters,
                tolerance: tol,
                target_length,
                trace,
                ..base(Command::Minimize, &common)
            },
            common,
        ),
        Cmd::Sweep { common, alphas } => (RunConfig { alphas, ..base(Command::Sweep, &common) }, common),
        Cmd::Angles { common, stride } => (RunConfig { stride, ..base(Command::Angles, &common) }, common),
    };
    Ok(Plan { config, output: common.output, print_config: common.print_config })
}

fn configure_threads() -> Result<(), Error> {
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v.parse().map_err(|_| Error::Parse(format!("{THREADS_ENV}=`{v}` is not a thread count")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Parse(format!("thread pool: {e}")))?;
    }
    Ok(())
}

fn execute(cli: Cli) -> Result<(), Error> {
    configure_threads()?;
    let plan = plan(cli.command)?;
    if plan.print_config {
        println!("{}", plan.config.to_json());
        return Ok(());
    }
    let table = run::run(&plan.config)?;
    let text = table.render(&plan.config);
    match plan.output {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error[{}]: {}", e.category(), e.to_string().replace('\n', " "));
            ExitCode::FAILURE
        }
    }
}
