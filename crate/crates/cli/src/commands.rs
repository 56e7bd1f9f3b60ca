//! Implementations of the six subcommands.
//!
//! Every command prints a single machine-readable payload to stdout;
//! diagnostics go to stderr via the error channel. Randomized commands
//! record their seed in the payload so runs can be replayed.

use std::path::{Path, PathBuf};

use serde_json::{json, Map, Value};

use hausloc_core::error::Error as CoreError;
use hausloc_core::geometry::PointSet;
use hausloc_core::io;
use hausloc_core::loss::{self, Alpha, ProbMap, ScaleTransform, WhdParams};
use hausloc_core::metrics::{self, CountSeries, SweepEntry};
use hausloc_core::optim::{self, OptimizerConfig, SceneSpec};
use hausloc_core::postprocess::{self, ThresholdMethod};

use crate::config::RunConfig;
use crate::parse;
use crate::{CliError, CliResult};

const DEFAULT_RADIUS: f64 = 5.0;
const DEFAULT_EPSILON: f64 = 1e-6;

fn input(message: impl Into<String>) -> CliError {
    CliError::Input(message.into())
}

fn domain(error: CoreError) -> CliError {
    CliError::Domain(error.to_string())
}

fn read_points(path: &Path) -> CliResult<PointSet> {
    io::read_points_file(path)
        .map_err(|e| input(format!("points file '{}': {e}", path.display())))
}

fn read_map(path: &Path) -> CliResult<ProbMap> {
    io::read_map_file(path).map_err(|e| input(format!("map file '{}': {e}", path.display())))
}

fn write_failed(path: &Path, e: std::io::Error) -> CliError {
    input(format!("cannot write '{}': {e}", path.display()))
}

fn load_config(path: &Option<PathBuf>) -> CliResult<RunConfig> {
    match path {
        Some(path) => RunConfig::load(path).map_err(CliError::Input),
        None => Ok(RunConfig::default()),
    }
}

/// Resolves WHD parameters from flags over config over defaults.
fn resolve_whd_params(
    alpha_flag: &Option<String>,
    eps_flag: Option<f64>,
    scale_flag: &Option<String>,
    config: &RunConfig,
) -> CliResult<WhdParams> {
    let alpha_text = alpha_flag.clone().or_else(|| config.alpha.clone());
    let alpha = match alpha_text {
        Some(text) => parse::parse_alpha(&text).map_err(CliError::Input)?,
        None => Alpha::Power(-1.0),
    };
    let epsilon = eps_flag.or(config.epsilon).unwrap_or(DEFAULT_EPSILON);
    let mut params = WhdParams::new(alpha, epsilon).map_err(|e| input(e.to_string()))?;
    let scale = match scale_flag {
        Some(text) => Some(parse::parse_scale(text).map_err(CliError::Input)?),
        None => match (config.scale_row, config.scale_col) {
            (None, None) => None,
            (r, c) => Some((r.unwrap_or(1.0), c.unwrap_or(1.0))),
        },
    };
    if let Some((s_row, s_col)) = scale {
        let transform = ScaleTransform::new(s_row, s_col).map_err(|e| input(e.to_string()))?;
        params = params.with_scale(transform);
    }
    Ok(params)
}

fn draw_seed() -> u64 {
    rand::random()
}

fn print_json(value: &Value) {
    println!("{value}");
}

fn f64_or_null(value: Option<f64>) -> Value {
    value.map_or(Value::Null, |v| json!(v))
}

pub struct SynthOpts {
    pub size: String,
    pub num_points: usize,
    pub min_sep: f64,
    pub seed: Option<u64>,
    pub out: PathBuf,
    pub config: Option<PathBuf>,
}

pub fn run_synth(opts: &SynthOpts) -> CliResult<()> {
    let config = load_config(&opts.config)?;
    let grid = parse::parse_size(&opts.size).map_err(CliError::Input)?;
    let seed = opts.seed.or(config.seed).unwrap_or_else(draw_seed);
    let spec = SceneSpec {
        grid,
        num_points: opts.num_points,
        min_separation: opts.min_sep,
        seed,
    };
    // Scene feasibility is a property of the flags, so every failure here
    // is an input error.
    let scene = optim::generate_scene(&spec).map_err(|e| input(e.to_string()))?;
    io::write_points_file(&opts.out, &scene).map_err(|e| write_failed(&opts.out, e))?;
    print_json(&json!({
        "seed": seed,
        "num_points": opts.num_points,
        "min_separation": opts.min_sep,
        "size": format!("{}x{}", grid.height(), grid.width()),
        "out": opts.out.display().to_string(),
    }));
    Ok(())
}

pub struct LossOpts {
    pub map: PathBuf,
    pub points: PathBuf,
    pub alpha: Option<String>,
    pub eps: Option<f64>,
    pub scale: Option<String>,
    pub grad: bool,
    pub config: Option<PathBuf>,
}

pub fn run_loss(opts: &LossOpts) -> CliResult<()> {
    let config = load_config(&opts.config)?;
    let params = resolve_whd_params(&opts.alpha, opts.eps, &opts.scale, &config)?;
    let map = read_map(&opts.map)?;
    let points = read_points(&opts.points)?;
    let breakdown = if opts.grad {
        loss::weighted_hausdorff_with_gradient(&map, &points, &params)
    } else {
        loss::weighted_hausdorff(&map, &points, &params)
    }
    .map_err(domain)?;
    let mut payload = json!({
        "total": breakdown.total,
        "term1": breakdown.term1,
        "term2": breakdown.term2,
        "mass": breakdown.mass,
    });
    if let Some(gradient) = breakdown.gradient {
        payload["gradient"] = json!(gradient);
    }
    print_json(&payload);
    Ok(())
}

pub struct OptimizeOpts {
    pub points: PathBuf,
    pub size: String,
    pub iters: Option<usize>,
    pub lr: Option<f64>,
    pub seed: Option<u64>,
    pub adam: bool,
    pub mass_reg: Option<f64>,
    pub init_value: Option<f64>,
    pub alpha: Option<String>,
    pub eps: Option<f64>,
    pub out_map: PathBuf,
    pub out_trace: PathBuf,
    pub config: Option<PathBuf>,
}

pub fn run_optimize(opts: &OptimizeOpts) -> CliResult<()> {
    let config = load_config(&opts.config)?;
    let grid = parse::parse_size(&opts.size).map_err(CliError::Input)?;
    let params = resolve_whd_params(&opts.alpha, opts.eps, &None, &config)?;
    let points = read_points(&opts.points)?;

    let use_adam = opts.adam || config.use_adam_moments.unwrap_or(false);
    let base = if use_adam {
        OptimizerConfig::adam(0)
    } else {
        OptimizerConfig::plain(0)
    };
    let seed = opts.seed.or(config.seed).unwrap_or_else(draw_seed);
    let cfg = OptimizerConfig {
        iterations: opts.iters.or(config.iterations).unwrap_or(2000),
        learning_rate: opts
            .lr
            .or(config.learning_rate)
            .unwrap_or(base.learning_rate),
        seed,
        use_adam_moments: use_adam,
        mass_reg_weight: opts.mass_reg.or(config.mass_reg_weight).unwrap_or(1.0),
        init_value: opts.init_value.or(config.init_value).unwrap_or(0.1),
    };

    let (map, trace) = optim::optimize_map(&points, grid, &params, &cfg).map_err(domain)?;
    io::write_map_file(&opts.out_map, &map).map_err(|e| write_failed(&opts.out_map, e))?;
    io::write_trace_file(&opts.out_trace, &trace)
        .map_err(|e| write_failed(&opts.out_trace, e))?;
    let mass: f64 = map.values().iter().sum();
    print_json(&json!({
        "iterations": cfg.iterations,
        "initial_loss": f64_or_null(trace.first_total()),
        "final_loss": f64_or_null(trace.final_total()),
        "mass": mass,
        "seed": seed,
        "use_adam_moments": cfg.use_adam_moments,
        "learning_rate": cfg.learning_rate,
    }));
    Ok(())
}

pub struct LocalizeOpts {
    pub map: PathBuf,
    pub method: Option<String>,
    pub count: Option<usize>,
    pub seed: Option<u64>,
    pub out: PathBuf,
    pub config: Option<PathBuf>,
}

pub fn run_localize(opts: &LocalizeOpts) -> CliResult<()> {
    let config = load_config(&opts.config)?;
    let method_text = opts
        .method
        .clone()
        .or_else(|| config.threshold_method.clone())
        .unwrap_or_else(|| "bmm".to_string());
    let method = parse::parse_method(&method_text).map_err(CliError::Input)?;
    let seed = opts.seed.or(config.seed).unwrap_or_else(draw_seed);
    let map = read_map(&opts.map)?;
    let result = postprocess::localize(&map, method, opts.count, seed).map_err(domain)?;
    io::write_points_file(&opts.out, &result.locations)
        .map_err(|e| write_failed(&opts.out, e))?;
    print_json(&json!({
        "tau": result.tau,
        "method": method_text,
        "count_estimate": result.count_estimate,
        "fallback_used": result.fallback_used,
        "num_locations": result.locations.len(),
        "seed": seed,
        "out": opts.out.display().to_string(),
    }));
    Ok(())
}

pub struct EvaluateOpts {
    pub est: PathBuf,
    pub gt: PathBuf,
    pub radius: Option<f64>,
    pub r_sweep: Option<String>,
    pub sweep_out: Option<PathBuf>,
    pub counts_file: Option<PathBuf>,
    pub size: Option<String>,
    pub config: Option<PathBuf>,
}

fn sweep_json(sweep: &[SweepEntry]) -> Value {
    Value::Array(
        sweep
            .iter()
            .map(|e| json!([e.radius, f64_or_null(e.fscore)]))
            .collect(),
    )
}

pub fn run_evaluate(opts: &EvaluateOpts) -> CliResult<()> {
    let config = load_config(&opts.config)?;
    let estimated = read_points(&opts.est)?;
    let ground_truth = read_points(&opts.gt)?;
    let radius = opts.radius.or(config.radius).unwrap_or(DEFAULT_RADIUS);
    if !(radius.is_finite() && radius >= 0.0) {
        return Err(input(format!("radius must be non-negative, got {radius}")));
    }
    let grid = match &opts.size {
        Some(text) => Some(parse::parse_size(text).map_err(CliError::Input)?),
        None => None,
    };

    let report = metrics::evaluate_points(&estimated, &ground_truth, radius, grid);

    let mut payload = Map::new();
    let mut reasons = Map::new();
    payload.insert("r".into(), json!(radius));
    let mut metric = |name: &str, value: Option<f64>, reason: &str| {
        payload.insert(name.into(), f64_or_null(value));
        if value.is_none() {
            reasons.insert(name.into(), json!(reason));
        }
    };
    metric("precision", report.precision, "no estimated points");
    metric("recall", report.recall, "no ground-truth points");
    metric(
        "fscore",
        report.fscore,
        "undefined precision or recall",
    );
    metric(
        "ahd",
        report.ahd,
        "empty point set (pass --size to report the grid diagonal)",
    );
    payload.insert("empty_estimate".into(), json!(report.empty_estimate));
    payload.insert(
        "counts".into(),
        json!({
            "tp": report.counts.true_positives,
            "fp": report.counts.false_positives,
            "fn": report.counts.false_negatives,
        }),
    );

    if let Some(path) = &opts.counts_file {
        let series: CountSeries = io::read_counts_file(path)
            .map_err(|e| input(format!("counts file '{}': {e}", path.display())))?;
        let m = metrics::count_metrics(&series);
        payload.insert(
            "count_metrics".into(),
            json!({
                "mae": m.mae,
                "rmse": m.rmse,
                "mape": f64_or_null(m.mape),
            }),
        );
        if m.mape.is_none() {
            reasons.insert("mape".into(), json!("every image has a zero true count"));
        }
    }

    let sweep_spec = opts.r_sweep.clone().or_else(|| config.radii.clone());
    if let Some(spec) = sweep_spec {
        let radii = parse::parse_sweep(&spec).map_err(CliError::Input)?;
        let sweep = metrics::f_vs_r_sweep(&estimated, &ground_truth, &radii);
        if let Some(path) = &opts.sweep_out {
            let mut writer = std::io::BufWriter::new(
                std::fs::File::create(path).map_err(|e| write_failed(path, e))?,
            );
            io::write_sweep_csv(&mut writer, &sweep).map_err(|e| write_failed(path, e))?;
        }
        payload.insert("sweep".into(), sweep_json(&sweep));
    }

    if !reasons.is_empty() {
        payload.insert("reasons".into(), Value::Object(reasons));
    }
    print_json(&Value::Object(payload));
    Ok(())
}

pub struct DemoOpts {
    pub out_dir: PathBuf,
    pub seed: Option<u64>,
    pub size: String,
    pub num_points: usize,
    pub min_sep: f64,
    pub iters: usize,
    pub config: Option<PathBuf>,
}

/// Threshold the full pipeline must clear for a zero exit.
const DEMO_FSCORE_GATE: f64 = 0.9;

pub fn run_demo(opts: &DemoOpts) -> CliResult<()> {
    let config = load_config(&opts.config)?;
    let stage = |name: &str, e: CoreError| CliError::Domain(format!("{name}: {e}"));
    let grid = parse::parse_size(&opts.size).map_err(CliError::Input)?;
    let seed = opts.seed.or(config.seed).unwrap_or_else(draw_seed);
    std::fs::create_dir_all(&opts.out_dir).map_err(|e| write_failed(&opts.out_dir, e))?;
    let artifact = |name: &str| opts.out_dir.join(name);

    let scene = optim::generate_scene(&SceneSpec {
        grid,
        num_points: opts.num_points,
        min_separation: opts.min_sep,
        seed,
    })
    .map_err(|e| stage("synth", e))?;
    io::write_points_file(&artifact("points.csv"), &scene)
        .map_err(|e| write_failed(&artifact("points.csv"), e))?;

    let params = WhdParams::default();
    let cfg = OptimizerConfig {
        seed,
        iterations: opts.iters,
        ..OptimizerConfig::adam(opts.iters)
    };
    let (map, trace) =
        optim::optimize_map(&scene, grid, &params, &cfg).map_err(|e| stage("optimize", e))?;
    io::write_map_file(&artifact("map.pgm"), &map)
        .map_err(|e| write_failed(&artifact("map.pgm"), e))?;
    io::write_trace_file(&artifact("trace.csv"), &trace)
        .map_err(|e| write_failed(&artifact("trace.csv"), e))?;

    let localization = postprocess::localize(&map, ThresholdMethod::Bmm, None, seed)
        .map_err(|e| stage("localize", e))?;
    io::write_points_file(&artifact("estimates.csv"), &localization.locations)
        .map_err(|e| write_failed(&artifact("estimates.csv"), e))?;

    let report =
        metrics::evaluate_points(&localization.locations, &scene, DEFAULT_RADIUS, Some(grid));

    let summary = json!({
        "seed": seed,
        "size": format!("{}x{}", grid.height(), grid.width()),
        "num_points": opts.num_points,
        "min_separation": opts.min_sep,
        "iterations": opts.iters,
        "r": DEFAULT_RADIUS,
        "tau": localization.tau,
        "fallback_used": localization.fallback_used,
        "count_true": scene.len(),
        "count_estimate": localization.count_estimate,
        "initial_loss": f64_or_null(trace.first_total()),
        "final_loss": f64_or_null(trace.final_total()),
        "precision": f64_or_null(report.precision),
        "recall": f64_or_null(report.recall),
        "fscore": f64_or_null(report.fscore),
        "ahd": f64_or_null(report.ahd),
        "artifacts": {
            "points": "points.csv",
            "map": "map.pgm",
            "trace": "trace.csv",
            "estimates": "estimates.csv",
        },
    });
    let summary_text = serde_json::to_string_pretty(&summary).expect("summary serializes");
    std::fs::write(artifact("summary.json"), summary_text.as_bytes())
        .map_err(|e| write_failed(&artifact("summary.json"), e))?;
    print_json(&summary);

    match report.fscore {
        Some(f) if f >= DEMO_FSCORE_GATE => Ok(()),
        Some(f) => Err(CliError::Gate(format!(
            "evaluate: f-score {f:.3} below the {DEMO_FSCORE_GATE} gate at r={DEFAULT_RADIUS}"
        ))),
        None => Err(CliError::Gate(
            "evaluate: f-score undefined (no locations produced)".into(),
        )),
    }
}
