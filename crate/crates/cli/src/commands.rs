//! `bench`, `train` and `predict` command implementations.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use mfgp::benchmarks::{
    load_tabulated, run_case, run_loaded_case, CaseName, GradientMode, ModelSelection, RunReport,
};
use mfgp::surrogates::{
    predict, train_cokriging, train_gecokriging, train_gekriging, train_kriging, ModelKind,
    Prediction, TrainConfig,
};
use mfgp::{Error as CoreError, Point};

use crate::manifest::RunManifest;
use crate::model_file::{load_model, save_model};

/// Command failures carrying the process exit code: usage and input problems
/// exit 2, numerical/training failures exit 3.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Input(String),
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Input(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Input(m) | CliError::Numeric(m) => f.write_str(m),
        }
    }
}

impl std::error::Error for CliError {}

fn is_numeric_failure(e: &CoreError) -> bool {
    match e {
        CoreError::NotNested { .. }
        | CoreError::MissingGradients
        | CoreError::NotPositiveDefinite { .. }
        | CoreError::TooFewPoints { .. }
        | CoreError::AllCandidatesFailed
        | CoreError::VarianceInconsistency { .. }
        | CoreError::DuplicateLocation { .. }
        | CoreError::ZeroTruthNorm => true,
        CoreError::Training { source, .. } => is_numeric_failure(source),
        _ => false,
    }
}

fn map_core(e: CoreError) -> CliError {
    if is_numeric_failure(&e) {
        CliError::Numeric(e.to_string())
    } else {
        CliError::Input(e.to_string())
    }
}

/// Writes `contents` through a temp file in the same directory plus rename.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    let file_name = path
        .file_name()
        .ok_or_else(|| CliError::Input(format!("invalid output path {}", path.display())))?;
    let mut tmp_name = file_name.to_os_string();
    tmp_name.push(format!(".tmp{}", std::process::id()));
    let tmp = path.with_file_name(tmp_name);
    std::fs::write(&tmp, contents)
        .map_err(|e| CliError::Input(format!("cannot write {}: {e}", tmp.display())))?;
    std::fs::rename(&tmp, path)
        .map_err(|e| CliError::Input(format!("cannot move {} into place: {e}", tmp.display())))?;
    Ok(())
}

/// Applies `key=value` overrides from a config file to the training
/// configuration. Recognized keys: `population_size`, `generations`,
/// `crossover_rate`, `mutation_rate`, `elitism_count`, `local_polish`,
/// `length_log10_lo`, `length_log10_hi`, `rho_lo`, `rho_hi`, `joint_lml`.
fn apply_config(cfg: &mut TrainConfig, path: &Path) -> Result<(), CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read config {}: {e}", path.display())))?;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            CliError::Usage(format!(
                "config {} line {}: expected key=value",
                path.display(),
                lineno + 1
            ))
        })?;
        let key = key.trim();
        let value = value.trim();
        let bad = |what: &str| {
            CliError::Usage(format!(
                "config {} line {}: {what} `{value}`",
                path.display(),
                lineno + 1
            ))
        };
        match key {
            "population_size" => {
                cfg.ga.population_size = value.parse().map_err(|_| bad("invalid integer"))?
            }
            "generations" => {
                cfg.ga.generations = value.parse().map_err(|_| bad("invalid integer"))?
            }
            "crossover_rate" => {
                cfg.ga.crossover_rate = value.parse().map_err(|_| bad("invalid number"))?
            }
            "mutation_rate" => {
                cfg.ga.mutation_rate = value.parse().map_err(|_| bad("invalid number"))?
            }
            "elitism_count" => {
                cfg.ga.elitism_count = value.parse().map_err(|_| bad("invalid integer"))?
            }
            "local_polish" => {
                cfg.ga.local_polish = value.parse().map_err(|_| bad("invalid boolean"))?
            }
            "length_log10_lo" => {
                cfg.length_log10_bounds.0 = value.parse().map_err(|_| bad("invalid number"))?
            }
            "length_log10_hi" => {
                cfg.length_log10_bounds.1 = value.parse().map_err(|_| bad("invalid number"))?
            }
            "rho_lo" => cfg.rho_bounds.0 = value.parse().map_err(|_| bad("invalid number"))?,
            "rho_hi" => cfg.rho_bounds.1 = value.parse().map_err(|_| bad("invalid number"))?,
            "joint_lml" => cfg.joint_lml = value.parse().map_err(|_| bad("invalid boolean"))?,
            other => {
                return Err(CliError::Usage(format!(
                    "config {} line {}: unknown key `{other}`",
                    path.display(),
                    lineno + 1
                )))
            }
        }
    }
    Ok(())
}

fn build_config(
    config: Option<&PathBuf>,
    alpha: Option<f64>,
    seed: u64,
) -> Result<TrainConfig, CliError> {
    let mut cfg = TrainConfig::with_seed(seed);
    if let Some(path) = config {
        apply_config(&mut cfg, path)?;
    }
    if let Some(a) = alpha {
        if !(0.0..=1e-6).contains(&a) {
            return Err(CliError::Usage(format!(
                "--alpha must be in [0, 1e-6], got {a}"
            )));
        }
        cfg.alpha = a;
    }
    Ok(cfg)
}

fn gradient_mode(fd_step: Option<f64>) -> GradientMode {
    match fd_step {
        Some(h) => GradientMode::FiniteDifference(h),
        None => GradientMode::Provided,
    }
}

// ---- bench ------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct BenchArgs {
    pub case: String,
    pub models: String,
    pub runs: usize,
    pub seed: u64,
    pub out: PathBuf,
    pub config: Option<PathBuf>,
    pub alpha: Option<f64>,
    /// Tabulated input for `--case file`.
    pub input: Option<PathBuf>,
    /// Ingest gradients by central differences with this step.
    pub fd_step: Option<f64>,
}

pub fn cmd_bench(args: &BenchArgs) -> Result<(), CliError> {
    let models = ModelSelection::parse(&args.models)
        .map_err(|e| CliError::Usage(e.to_string()))?;
    if models.is_empty() {
        return Err(CliError::Usage("no models selected".into()));
    }
    if args.runs == 0 {
        return Err(CliError::Usage("--runs must be at least 1".into()));
    }
    let cfg = build_config(args.config.as_ref(), args.alpha, args.seed)?;

    let reports = if args.case == "file" {
        let input = args.input.as_ref().ok_or_else(|| {
            CliError::Usage("case `file` requires --input <path>".into())
        })?;
        let (_, case) =
            load_tabulated(input, gradient_mode(args.fd_step)).map_err(map_core)?;
        run_loaded_case(&case, models, args.runs, args.seed, &cfg).map_err(map_core)?
    } else {
        let name = CaseName::parse(&args.case)
            .ok_or_else(|| CliError::Usage(format!("unknown case `{}`", args.case)))?;
        run_case(name, models, args.runs, args.seed, &cfg).map_err(map_core)?
    };

    std::fs::create_dir_all(&args.out)
        .map_err(|e| CliError::Input(format!("cannot create {}: {e}", args.out.display())))?;

    let mut manifest = RunManifest::new("bench");
    manifest.push("case", &args.case);
    manifest.push("models", &args.models);
    manifest.push("runs", args.runs);
    manifest.push("seed", args.seed);
    manifest.push("alpha", format!("{:e}", cfg.alpha));
    if let Some(c) = &args.config {
        manifest.push("config", c.display());
    }
    if let Some(i) = &args.input {
        manifest.push("input", i.display());
    }
    if let Some(h) = args.fd_step {
        manifest.push("fd-step", h);
    }

    let report_path = args.out.join("report.csv");
    let summary_path = args.out.join("summary.csv");
    write_atomic(&report_path, &render_report(&manifest, &reports))?;
    write_atomic(&summary_path, &render_summary(&manifest, &reports))?;
    println!("wrote {}", report_path.display());
    println!("wrote {}", summary_path.display());
    Ok(())
}

fn grad_width(reports: &[RunReport]) -> usize {
    reports.iter().map(|r| r.grad_rel_mse.len()).max().unwrap_or(0)
}

fn render_report(manifest: &RunManifest, reports: &[RunReport]) -> String {
    let d = grad_width(reports);
    let mut s = manifest.header();
    s.push_str("case,model,run,seed,qoi_rel_mse");
    for i in 1..=d {
        s.push_str(&format!(",grad_rel_mse_{i}"));
    }
    s.push_str(",train_seconds,predict_seconds,jitter_used,lml\n");
    for r in reports {
        s.push_str(&format!(
            "{},{},{},{},{}",
            r.case, r.model, r.run, r.seed, r.qoi_rel_mse
        ));
        for i in 0..d {
            match r.grad_rel_mse.get(i) {
                Some(g) => s.push_str(&format!(",{g}")),
                None => s.push_str(",NaN"),
            }
        }
        s.push_str(&format!(
            ",{},{},{:e},{}\n",
            r.train_seconds, r.predict_seconds, r.jitter_used, r.lml
        ));
    }
    s
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64;
    (mean, var.sqrt())
}

fn render_summary(manifest: &RunManifest, reports: &[RunReport]) -> String {
    let d = grad_width(reports);
    let mut order: Vec<&str> = Vec::new();
    let mut groups: BTreeMap<&str, Vec<&RunReport>> = BTreeMap::new();
    for r in reports {
        if !groups.contains_key(r.model.as_str()) {
            order.push(&r.model);
        }
        groups.entry(&r.model).or_default().push(r);
    }

    let mut s = manifest.header();
    s.push_str("model,runs,qoi_rel_mse_mean,qoi_rel_mse_std");
    for i in 1..=d {
        s.push_str(&format!(",grad_rel_mse_{i}_mean,grad_rel_mse_{i}_std"));
    }
    s.push_str(",train_seconds_mean,train_seconds_std,predict_seconds_mean,predict_seconds_std\n");
    for model in order {
        let rows = &groups[model];
        let (qm, qs) = mean_std(&rows.iter().map(|r| r.qoi_rel_mse).collect::<Vec<_>>());
        s.push_str(&format!("{},{},{},{}", model, rows.len(), qm, qs));
        for i in 0..d {
            let col: Vec<f64> = rows
                .iter()
                .map(|r| r.grad_rel_mse.get(i).copied().unwrap_or(f64::NAN))
                .collect();
            let (gm, gs) = mean_std(&col);
            s.push_str(&format!(",{gm},{gs}"));
        }
        let (tm, ts) = mean_std(&rows.iter().map(|r| r.train_seconds).collect::<Vec<_>>());
        let (pm, ps) = mean_std(&rows.iter().map(|r| r.predict_seconds).collect::<Vec<_>>());
        s.push_str(&format!(",{tm},{ts},{pm},{ps}\n"));
    }
    s
}

// ---- train ------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct TrainArgs {
    pub input: PathBuf,
    pub model: String,
    pub out: PathBuf,
    pub config: Option<PathBuf>,
    pub alpha: Option<f64>,
    pub seed: u64,
    pub fd_step: Option<f64>,
}

pub fn cmd_train(args: &TrainArgs) -> Result<(), CliError> {
    let kind = ModelKind::parse(&args.model)
        .ok_or_else(|| CliError::Usage(format!("unknown model `{}`", args.model)))?;
    let cfg = build_config(args.config.as_ref(), args.alpha, args.seed)?;
    let (data, _) = load_tabulated(&args.input, gradient_mode(args.fd_step)).map_err(map_core)?;

    let t0 = Instant::now();
    // single-fidelity models train on the high-fidelity rows
    let model = match kind {
        ModelKind::Kriging => train_kriging(data.high(), &cfg),
        ModelKind::GeKriging => train_gekriging(data.high(), &cfg),
        ModelKind::Cokriging => train_cokriging(&data, &cfg),
        ModelKind::GeCokriging => train_gecokriging(&data, &cfg),
    }
    .map_err(map_core)?;
    let train_seconds = t0.elapsed().as_secs_f64();

    save_model(&args.out, &model)?;
    println!("model: {kind}");
    println!("lml: {}", model.lml());
    println!("jitter_used: {:e}", model.jitter_used());
    println!("train_seconds: {train_seconds}");
    println!("wrote {}", args.out.display());
    Ok(())
}

// ---- predict ----------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct PredictArgs {
    pub model_file: PathBuf,
    /// Per-dimension `start:end:count` specs joined by commas.
    pub grid: Option<String>,
    /// File with one comma-separated coordinate row per query point.
    pub points: Option<PathBuf>,
    pub out: PathBuf,
}

pub fn cmd_predict(args: &PredictArgs) -> Result<(), CliError> {
    let model = load_model(&args.model_file)?;
    let queries = match (&args.grid, &args.points) {
        (Some(spec), None) => parse_grid(spec, model.dim())?,
        (None, Some(path)) => read_points(path, model.dim())?,
        _ => {
            return Err(CliError::Usage(
                "exactly one of --grid or --points is required".into(),
            ))
        }
    };
    let preds = predict(&model, &queries).map_err(map_core)?;

    let mut manifest = RunManifest::new("predict");
    manifest.push("model-file", args.model_file.display());
    manifest.push("model", model.kind());
    if let Some(g) = &args.grid {
        manifest.push("grid", g);
    }
    if let Some(p) = &args.points {
        manifest.push("points", p.display());
    }
    write_atomic(&args.out, &render_predictions(&manifest, &queries, &preds))?;
    println!("wrote {} ({} rows)", args.out.display(), preds.len());
    Ok(())
}

fn parse_grid(spec: &str, dim: usize) -> Result<Vec<Point>, CliError> {
    let axes: Vec<Vec<f64>> = spec
        .split(',')
        .map(parse_axis)
        .collect::<Result<_, _>>()?;
    if axes.len() != dim {
        return Err(CliError::Input(format!(
            "grid has {} dimensions but the model expects {dim}",
            axes.len()
        )));
    }
    // cartesian product, last axis fastest
    let mut points: Vec<Vec<f64>> = vec![Vec::new()];
    for axis in &axes {
        let mut next = Vec::with_capacity(points.len() * axis.len());
        for p in &points {
            for &v in axis {
                let mut q = p.clone();
                q.push(v);
                next.push(q);
            }
        }
        points = next;
    }
    Ok(points.into_iter().map(Point::new).collect())
}

fn parse_axis(spec: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(CliError::Usage(format!(
            "grid axis `{spec}` must be start:end:count"
        )));
    }
    let bad = || CliError::Usage(format!("grid axis `{spec}` has invalid numbers"));
    let start: f64 = parts[0].trim().parse().map_err(|_| bad())?;
    let end: f64 = parts[1].trim().parse().map_err(|_| bad())?;
    let count: usize = parts[2].trim().parse().map_err(|_| bad())?;
    if count == 0 {
        return Err(CliError::Usage(format!(
            "grid axis `{spec}` must have at least one point"
        )));
    }
    if count == 1 {
        return Ok(vec![start]);
    }
    Ok((0..count)
        .map(|i| start + (end - start) * i as f64 / (count - 1) as f64)
        .collect())
}

fn read_points(path: &Path, dim: usize) -> Result<Vec<Point>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
    let mut points = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let coords: Vec<f64> = line
            .split(',')
            .map(|s| {
                s.trim().parse::<f64>().map_err(|_| {
                    CliError::Input(format!(
                        "{} line {}: `{s}` is not a number",
                        path.display(),
                        i + 1
                    ))
                })
            })
            .collect::<Result<_, _>>()?;
        if coords.len() != dim {
            return Err(CliError::Input(format!(
                "{} line {}: {} coordinates but the model expects {dim}",
                path.display(),
                i + 1,
                coords.len()
            )));
        }
        points.push(Point::new(coords));
    }
    if points.is_empty() {
        return Err(CliError::Input(format!(
            "{} contains no query points",
            path.display()
        )));
    }
    Ok(points)
}

fn render_predictions(manifest: &RunManifest, queries: &[Point], preds: &[Prediction]) -> String {
    let d = queries.first().map(|q| q.dim()).unwrap_or(0);
    let mut s = manifest.header();
    for i in 1..=d {
        s.push_str(&format!("{}x{i}", if i == 1 { "" } else { "," }));
    }
    s.push_str(",mean,std");
    for i in 1..=d {
        s.push_str(&format!(",gmean{i}"));
    }
    for i in 1..=d {
        s.push_str(&format!(",gstd{i}"));
    }
    s.push('\n');
    for (q, p) in queries.iter().zip(preds) {
        for (i, c) in q.coords().iter().enumerate() {
            if i > 0 {
                s.push(',');
            }
            s.push_str(&format!("{c}"));
        }
        s.push_str(&format!(",{},{}", p.mean, p.variance.sqrt()));
        for g in &p.grad_mean {
            s.push_str(&format!(",{g}"));
        }
        for g in &p.grad_variance {
            s.push_str(&format!(",{}", g.sqrt()));
        }
        s.push('\n');
    }
    s
}
