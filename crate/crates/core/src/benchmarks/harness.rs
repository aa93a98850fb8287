//! The relative-MSE metric and the seeded comparison harness.

use std::time::Instant;

use crate::error::{Error, Result};
use crate::optimizer::derive_seed;
use crate::surrogates::{
    predict, train_cokriging, train_cokriging_gradient_baseline, train_gecokriging,
    train_gekriging, train_kriging, Prediction, TrainConfig, TrainedSurrogate,
};

use super::cases::{load_case, BenchmarkCase, CaseName};

/// Sum of squared prediction errors divided by the sum of squared truth
/// values over a grid.
pub fn relative_mse(pred: &[f64], truth: &[f64]) -> Result<f64> {
    if pred.len() != truth.len() || truth.is_empty() {
        return Err(Error::LengthMismatch {
            expected: truth.len().max(1),
            got: pred.len(),
        });
    }
    let denom: f64 = truth.iter().map(|t| t * t).sum();
    if denom == 0.0 {
        return Err(Error::ZeroTruthNorm);
    }
    let num: f64 = pred
        .iter()
        .zip(truth)
        .map(|(p, t)| (p - t) * (p - t))
        .sum();
    Ok(num / denom)
}

/// Which models a benchmark run trains. Requesting Cokriging also runs the
/// separate-model gradient baseline when the data carries gradients.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModelSelection {
    pub kriging: bool,
    pub gekriging: bool,
    pub cokriging: bool,
    pub gecokriging: bool,
}

impl ModelSelection {
    pub fn all() -> Self {
        Self {
            kriging: true,
            gekriging: true,
            cokriging: true,
            gecokriging: true,
        }
    }

    /// The comparison set reported in the benchmark tables: GE-Kriging,
    /// Cokriging (with its gradient baseline) and GE-Cokriging.
    pub fn comparison() -> Self {
        Self {
            kriging: false,
            gekriging: true,
            cokriging: true,
            gecokriging: true,
        }
    }

    pub fn none() -> Self {
        Self {
            kriging: false,
            gekriging: false,
            cokriging: false,
            gecokriging: false,
        }
    }

    /// Parses a comma-separated model list.
    pub fn parse(list: &str) -> Result<Self> {
        let mut sel = Self::none();
        for item in list.split(',') {
            match item.trim().to_ascii_lowercase().as_str() {
                "kriging" => sel.kriging = true,
                "gekriging" | "ge-kriging" => sel.gekriging = true,
                "cokriging" => sel.cokriging = true,
                "gecokriging" | "ge-cokriging" => sel.gecokriging = true,
                "" => {}
                other => {
                    return Err(Error::UnknownCase(format!("unknown model `{other}`")));
                }
            }
        }
        Ok(sel)
    }

    pub fn is_empty(&self) -> bool {
        !(self.kriging || self.gekriging || self.cokriging || self.gecokriging)
    }
}

/// One model's outcome in one run.
#[derive(Debug, Clone)]
pub struct RunReport {
    pub case: String,
    pub model: String,
    pub run: usize,
    /// GA base seed of this run.
    pub seed: u64,
    /// Relative MSE of the QoI prediction; NaN for the gradient baseline,
    /// which predicts gradients only.
    pub qoi_rel_mse: f64,
    /// Relative MSE per gradient component.
    pub grad_rel_mse: Vec<f64>,
    pub train_seconds: f64,
    pub predict_seconds: f64,
    pub jitter_used: f64,
    pub lml: f64,
}

/// Runs the named case `runs` times. Each run derives its own RNG stream
/// from `(seed, run index)`; the 2D case additionally redraws its nested
/// random design per run. Relative MSEs are bitwise reproducible for a
/// fixed seed.
pub fn run_case(
    name: CaseName,
    models: ModelSelection,
    runs: usize,
    seed: u64,
    base: &TrainConfig,
) -> Result<Vec<RunReport>> {
    let mut reports = Vec::new();
    for run in 0..runs {
        let run_seed = derive_seed(seed, run as u64);
        let case = load_case(name, derive_seed(run_seed, 1000))?;
        run_once(&case, models, run, run_seed, base, &mut reports)?;
    }
    Ok(reports)
}

/// Like [`run_case`] but on an already-loaded (e.g. file-ingested) case with
/// a fixed design.
pub fn run_loaded_case(
    case: &BenchmarkCase,
    models: ModelSelection,
    runs: usize,
    seed: u64,
    base: &TrainConfig,
) -> Result<Vec<RunReport>> {
    let mut reports = Vec::new();
    for run in 0..runs {
        let run_seed = derive_seed(seed, run as u64);
        run_once(case, models, run, run_seed, base, &mut reports)?;
    }
    Ok(reports)
}

fn cfg_for(base: &TrainConfig, run_seed: u64, stream: u64) -> TrainConfig {
    let mut cfg = base.clone();
    cfg.ga.seed = derive_seed(run_seed, stream);
    cfg
}

fn grad_columns(case: &BenchmarkCase) -> Vec<Vec<f64>> {
    let d = case.data.dim();
    (0..d)
        .map(|c| case.truth_gradients.iter().map(|g| g[c]).collect())
        .collect()
}

/// Gradient truth may be absent (value-only ingested files leave it all
/// zero); report NaN instead of failing the whole run.
fn grad_rel_mse_or_nan(pred: &[f64], truth: &[f64]) -> Result<f64> {
    match relative_mse(pred, truth) {
        Ok(v) => Ok(v),
        Err(Error::ZeroTruthNorm) => Ok(f64::NAN),
        Err(e) => Err(e),
    }
}

fn report_for(
    case: &BenchmarkCase,
    model: &str,
    run: usize,
    run_seed: u64,
    s: &TrainedSurrogate,
    preds: &[Prediction],
    (train_seconds, predict_seconds): (f64, f64),
) -> Result<RunReport> {
    let means: Vec<f64> = preds.iter().map(|p| p.mean).collect();
    let qoi = relative_mse(&means, &case.truth_values)?;
    let truth_cols = grad_columns(case);
    let mut grad = Vec::with_capacity(truth_cols.len());
    for (c, col) in truth_cols.iter().enumerate() {
        let pred_col: Vec<f64> = preds.iter().map(|p| p.grad_mean[c]).collect();
        grad.push(grad_rel_mse_or_nan(&pred_col, col)?);
    }
    Ok(RunReport {
        case: case.name.clone(),
        model: model.to_string(),
        run,
        seed: run_seed,
        qoi_rel_mse: qoi,
        grad_rel_mse: grad,
        train_seconds,
        predict_seconds,
        jitter_used: s.jitter_used(),
        lml: s.lml(),
    })
}

fn run_once(
    case: &BenchmarkCase,
    models: ModelSelection,
    run: usize,
    run_seed: u64,
    base: &TrainConfig,
    out: &mut Vec<RunReport>,
) -> Result<()> {
    let d = case.data.dim();
    let has_grads = case.data.low().has_gradients() && case.data.high().has_gradients();

    if models.kriging {
        let cfg = cfg_for(base, run_seed, 1);
        let t0 = Instant::now();
        let s = train_kriging(case.data.high(), &cfg)
            .map_err(|e| Error::training("kriging", e))?;
        let train_s = t0.elapsed().as_secs_f64();
        let t1 = Instant::now();
        let preds = predict(&s, &case.test_grid)?;
        let predict_s = t1.elapsed().as_secs_f64();
        out.push(report_for(case, "kriging", run, run_seed, &s, &preds, (train_s, predict_s))?);
    }

    if models.gekriging {
        // high-fidelity data only, values and gradients
        let cfg = cfg_for(base, run_seed, 2);
        let t0 = Instant::now();
        let s = train_gekriging(case.data.high(), &cfg)
            .map_err(|e| Error::training("gekriging", e))?;
        let train_s = t0.elapsed().as_secs_f64();
        let t1 = Instant::now();
        let preds = predict(&s, &case.test_grid)?;
        let predict_s = t1.elapsed().as_secs_f64();
        out.push(report_for(case, "gekriging", run, run_seed, &s, &preds, (train_s, predict_s))?);
    }

    if models.cokriging {
        let cfg = cfg_for(base, run_seed, 3);
        let t0 = Instant::now();
        let s = train_cokriging(&case.data, &cfg)
            .map_err(|e| Error::training("cokriging", e))?;
        let train_s = t0.elapsed().as_secs_f64();
        let t1 = Instant::now();
        let preds = predict(&s, &case.test_grid)?;
        let predict_s = t1.elapsed().as_secs_f64();
        out.push(report_for(case, "cokriging", run, run_seed, &s, &preds, (train_s, predict_s))?);

        // the separate-model gradient baseline: one plain Cokriging per
        // gradient component, trained on that component as the QoI
        if has_grads {
            let truth_cols = grad_columns(case);
            let mut train_s = 0.0;
            let mut predict_s = 0.0;
            let mut grad = Vec::with_capacity(d);
            let mut jitter: f64 = 0.0;
            let mut lml = 0.0;
            for (c, truth_col) in truth_cols.iter().enumerate() {
                let cfg = cfg_for(base, run_seed, 10 + c as u64);
                let t0 = Instant::now();
                let s = train_cokriging_gradient_baseline(&case.data, c, &cfg)
                    .map_err(|e| Error::training("cokriging-grad", e))?;
                train_s += t0.elapsed().as_secs_f64();
                let t1 = Instant::now();
                let preds = predict(&s, &case.test_grid)?;
                predict_s += t1.elapsed().as_secs_f64();
                let means: Vec<f64> = preds.iter().map(|p| p.mean).collect();
                grad.push(grad_rel_mse_or_nan(&means, truth_col)?);
                jitter = jitter.max(s.jitter_used());
                lml += s.lml();
            }
            out.push(RunReport {
                case: case.name.clone(),
                model: "cokriging-grad".to_string(),
                run,
                seed: run_seed,
                qoi_rel_mse: f64::NAN,
                grad_rel_mse: grad,
                train_seconds: train_s,
                predict_seconds: predict_s,
                jitter_used: jitter,
                lml,
            });
        }
    }

    if models.gecokriging {
        let cfg = cfg_for(base, run_seed, 4);
        let t0 = Instant::now();
        let s = train_gecokriging(&case.data, &cfg)
            .map_err(|e| Error::training("gecokriging", e))?;
        let train_s = t0.elapsed().as_secs_f64();
        let t1 = Instant::now();
        let preds = predict(&s, &case.test_grid)?;
        let predict_s = t1.elapsed().as_secs_f64();
        out.push(report_for(case, "gecokriging", run, run_seed, &s, &preds, (train_s, predict_s))?);
    }

    Ok(())
}
