//! `hausloc`: synthetic scenes, weighted-Hausdorff map optimization,
//! localization, and evaluation as one reproducible pipeline.
//!
//! Exit codes: 0 success, 1 demo quality gate missed, 2 input/parse
//! errors, 3 domain/numeric errors. Stdout carries machine-readable
//! payloads only; diagnostics go to stderr.

mod commands;
mod config;
mod parse;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

/// Command failures, classified for the exit-code taxonomy.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags, unreadable or malformed files: exit 2.
    Input(String),
    /// Valid inputs, invalid computation (empty sets, degenerate maps,
    /// non-finite losses): exit 3.
    Domain(String),
    /// The demo pipeline ran but missed its quality gate: exit 1.
    Gate(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Gate(_) => 1,
            CliError::Input(_) => 2,
            CliError::Domain(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Input(m) | CliError::Domain(m) | CliError::Gate(m) => m,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

#[derive(Parser)]
#[command(
    name = "hausloc",
    version,
    about = "Object localization via weighted-Hausdorff map optimization",
    propagate_version = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random synthetic scene as a points CSV.
    Synth(SynthArgs),
    /// Evaluate the weighted Hausdorff distance of a map against points.
    Loss(LossArgs),
    /// Optimize a probability map to localize a point set.
    Optimize(OptimizeArgs),
    /// Extract estimated locations from a probability map.
    Localize(LocalizeArgs),
    /// Score estimated locations against ground truth.
    Evaluate(EvaluateArgs),
    /// Run synth -> optimize -> localize -> evaluate end to end.
    Demo(DemoArgs),
}

#[derive(Args)]
struct SynthArgs {
    /// Grid size as HxW (height first), e.g. 64x64.
    #[arg(long)]
    size: String,
    /// Number of points to place.
    #[arg(long)]
    num_points: usize,
    /// Minimum pairwise distance in pixels.
    #[arg(long, default_value_t = 0.0)]
    min_sep: f64,
    /// RNG seed; drawn and reported if omitted.
    #[arg(long)]
    seed: Option<u64>,
    /// Output points CSV.
    #[arg(long)]
    out: PathBuf,
    /// Key-value config file; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct LossArgs {
    /// Probability map (ASCII PGM, maxval 65535).
    #[arg(long)]
    map: PathBuf,
    /// Ground-truth points CSV.
    #[arg(long)]
    points: PathBuf,
    /// Power-mean exponent (negative) or 'min'.
    #[arg(long, allow_negative_numbers = true)]
    alpha: Option<String>,
    /// Stabilizer in the first term's denominator.
    #[arg(long)]
    eps: Option<f64>,
    /// Coordinate scale as SROWxSCOL, e.g. 2x2.
    #[arg(long)]
    scale: Option<String>,
    /// Also emit the analytic gradient as a JSON array.
    #[arg(long)]
    grad: bool,
    /// Key-value config file; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct OptimizeArgs {
    /// Ground-truth points CSV.
    #[arg(long)]
    points: PathBuf,
    /// Grid size as HxW (height first).
    #[arg(long)]
    size: String,
    /// Descent iterations.
    #[arg(long)]
    iters: Option<usize>,
    /// Learning rate (defaults: 0.05 plain, 0.01 with --adam).
    #[arg(long)]
    lr: Option<f64>,
    /// Seed recorded for replay.
    #[arg(long)]
    seed: Option<u64>,
    /// Use Adam-style adaptive moments.
    #[arg(long)]
    adam: bool,
    /// Weight of the count-regression term.
    #[arg(long)]
    mass_reg: Option<f64>,
    /// Uniform initial activation in (0, 1).
    #[arg(long)]
    init_value: Option<f64>,
    /// Power-mean exponent (negative); gradients need power-mean mode.
    #[arg(long, allow_negative_numbers = true)]
    alpha: Option<String>,
    /// Stabilizer in the first term's denominator.
    #[arg(long)]
    eps: Option<f64>,
    /// Output map (ASCII PGM).
    #[arg(long)]
    out_map: PathBuf,
    /// Output per-iteration trace CSV.
    #[arg(long)]
    out_trace: PathBuf,
    /// Key-value config file; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct LocalizeArgs {
    /// Probability map (ASCII PGM).
    #[arg(long)]
    map: PathBuf,
    /// Threshold method: `fixed:<tau>`, otsu, or bmm (default bmm).
    #[arg(long)]
    method: Option<String>,
    /// Known object count overriding the connected-component estimate.
    #[arg(long)]
    count: Option<usize>,
    /// Seed for the mixture initialization.
    #[arg(long)]
    seed: Option<u64>,
    /// Output estimated locations CSV.
    #[arg(long)]
    out: PathBuf,
    /// Key-value config file; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct EvaluateArgs {
    /// Estimated locations CSV.
    #[arg(long)]
    est: PathBuf,
    /// Ground-truth locations CSV.
    #[arg(long)]
    gt: PathBuf,
    /// Match radius in pixels (default 5).
    #[arg(long)]
    r: Option<f64>,
    /// F-vs-r sweep as lo:hi:step, e.g. 0:15:1.
    #[arg(long)]
    r_sweep: Option<String>,
    /// Write the sweep as CSV to this path.
    #[arg(long)]
    sweep_out: Option<PathBuf>,
    /// Per-image counts CSV (c_true,c_est) for MAE/RMSE/MAPE.
    #[arg(long)]
    counts_file: Option<PathBuf>,
    /// Grid size as HxW; enables the diagonal convention for empty
    /// estimate sets.
    #[arg(long)]
    size: Option<String>,
    /// Key-value config file; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct DemoArgs {
    /// Directory receiving all pipeline artifacts.
    #[arg(long)]
    out_dir: PathBuf,
    /// Seed; drawn and recorded in the summary if omitted.
    #[arg(long)]
    seed: Option<u64>,
    /// Grid size as HxW.
    #[arg(long, default_value = "64x64")]
    size: String,
    /// Number of scene points.
    #[arg(long, default_value_t = 3)]
    num_points: usize,
    /// Minimum pairwise scene distance in pixels.
    #[arg(long, default_value_t = 12.0)]
    min_sep: f64,
    /// Optimizer iterations.
    #[arg(long, default_value_t = 2000)]
    iters: usize,
    /// Key-value config file; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Synth(a) => commands::run_synth(&commands::SynthOpts {
            size: a.size,
            num_points: a.num_points,
            min_sep: a.min_sep,
            seed: a.seed,
            out: a.out,
            config: a.config,
        }),
        Command::Loss(a) => commands::run_loss(&commands::LossOpts {
            map: a.map,
            points: a.points,
            alpha: a.alpha,
            eps: a.eps,
            scale: a.scale,
            grad: a.grad,
            config: a.config,
        }),
        Command::Optimize(a) => commands::run_optimize(&commands::OptimizeOpts {
            points: a.points,
            size: a.size,
            iters: a.iters,
            lr: a.lr,
            seed: a.seed,
            adam: a.adam,
            mass_reg: a.mass_reg,
            init_value: a.init_value,
            alpha: a.alpha,
            eps: a.eps,
            out_map: a.out_map,
            out_trace: a.out_trace,
            config: a.config,
        }),
        Command::Localize(a) => commands::run_localize(&commands::LocalizeOpts {
            map: a.map,
            method: a.method,
            count: a.count,
            seed: a.seed,
            out: a.out,
            config: a.config,
        }),
        Command::Evaluate(a) => commands::run_evaluate(&commands::EvaluateOpts {
            est: a.est,
            gt: a.gt,
            radius: a.r,
            r_sweep: a.r_sweep,
            sweep_out: a.sweep_out,
            counts_file: a.counts_file,
            size: a.size,
            config: a.config,
        }),
        Command::Demo(a) => commands::run_demo(&commands::DemoOpts {
            out_dir: a.out_dir,
            seed: a.seed,
            size: a.size,
            num_points: a.num_points,
            min_sep: a.min_sep,
            iters: a.iters,
            config: a.config,
        }),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(error) => {
            eprintln!("hausloc: {}", error.message());
            ExitCode::from(error.exit_code())
        }
    }
}
