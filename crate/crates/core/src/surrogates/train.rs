//! Model training: concentrated-likelihood profiling plus the genetic
//! hyperparameter search.

use nalgebra::DVector;

use crate::covariance::{self, CovMatrix, Factorization};
use crate::error::{Error, Result};
use crate::kernel::{Kernel, KernelParams};
use crate::optimizer::{derive_seed, maximize, GaConfig, ParamSpec, SearchBox};
use crate::point::Point;

use super::{
    GradObservationSet, Hyperparameters, ModelKind, MultiFidelityData, TrainConfig,
    TrainedSurrogate, TrainingData,
};

/// Floor applied to the profiled variance inside the log likelihood so that
/// exact fits (zero residual) score finitely high instead of overflowing.
const SIGMA2_FLOOR: f64 = 1e-300;

fn ln_2pi() -> f64 {
    (2.0 * std::f64::consts::PI).ln()
}

/// Mean and variance profiled out of the likelihood in closed form, the
/// resulting concentrated log marginal likelihood, and the factorization it
/// was computed with.
pub(super) struct Profiled {
    pub mu: f64,
    pub sigma2: f64,
    pub lml: f64,
    pub factor: Factorization,
}

/// Profiles `mu` and `sigma^2` against a correlation matrix:
/// `mu = (F' Psi^-1 y) / (F' Psi^-1 F)`, `sigma^2 = r' Psi^-1 r / m` with
/// `r = y - mu F`, where `F` is the indicator vector (ones for value rows,
/// zeros for gradient rows) and `m` the augmented observation count.
pub(super) fn profile(
    corr: &CovMatrix,
    targets: &DVector<f64>,
    indicator: &DVector<f64>,
    alpha: f64,
) -> Result<Profiled> {
    let m = targets.len() as f64;
    let factor = covariance::factorize(corr, alpha)?;
    let zf = factor.forward(indicator)?;
    let zy = factor.forward(targets)?;
    let denom = zf.norm_squared();
    if !denom.is_finite() || denom <= 0.0 {
        return Err(Error::NotPositiveDefinite {
            max_jitter: covariance::JITTER_CEIL,
        });
    }
    let mu = zf.dot(&zy) / denom;
    let zr = &zy - &zf * mu;
    let sigma2 = zr.norm_squared() / m;
    if !sigma2.is_finite() {
        return Err(Error::NotPositiveDefinite {
            max_jitter: covariance::JITTER_CEIL,
        });
    }
    let lml = -0.5 * m * (sigma2.max(SIGMA2_FLOOR).ln() + 1.0 + ln_2pi()) - 0.5 * factor.logdet();
    Ok(Profiled {
        mu,
        sigma2,
        lml,
        factor,
    })
}

/// Per-dimension coordinate span of a point cloud; degenerate dimensions get
/// span 1 so the length box stays well formed.
fn coordinate_spans(points: &[Point], d: usize) -> Vec<f64> {
    let mut lo = vec![f64::INFINITY; d];
    let mut hi = vec![f64::NEG_INFINITY; d];
    for p in points {
        for i in 0..d {
            lo[i] = lo[i].min(p.coord(i));
            hi[i] = hi[i].max(p.coord(i));
        }
    }
    (0..d)
        .map(|i| {
            let s = hi[i] - lo[i];
            if s > 0.0 {
                s
            } else {
                1.0
            }
        })
        .collect()
}

/// Length search box: log10 bounds shifted by the coordinate span so the
/// configured bounds are relative to unit-scaled inputs.
fn length_box(spans: &[f64], bounds: (f64, f64)) -> Vec<ParamSpec> {
    spans
        .iter()
        .map(|s| ParamSpec::log10(bounds.0 + s.log10(), bounds.1 + s.log10()))
        .collect()
}

/// Augmented observation vector `(y, grad y)` and the matching indicator
/// `(1...1, 0...0)`, in the block order used by the covariance assembly.
fn augmented_targets(set: &GradObservationSet, with_grads: bool) -> (DVector<f64>, DVector<f64>) {
    let n = set.len();
    let d = set.dim();
    if !with_grads {
        return (
            DVector::from_column_slice(set.values()),
            DVector::repeat(n, 1.0),
        );
    }
    let m = n * (1 + d);
    let mut y = DVector::zeros(m);
    let mut f = DVector::zeros(m);
    for i in 0..n {
        y[i] = set.values()[i];
        f[i] = 1.0;
    }
    let grads = set.gradients().expect("gradients required");
    for i in 0..n {
        for c in 0..d {
            y[n + i * d + c] = grads[i][c];
        }
    }
    (y, f)
}

/// Stored process variance never goes to exactly zero (kernel parameters
/// require positivity); an exact fit keeps a subnormal floor instead.
fn floor_variance(sigma2: f64) -> f64 {
    sigma2.max(f64::MIN_POSITIVE)
}

/// Trains ordinary Kriging on values (gradients in `data` are ignored).
pub fn train_kriging(data: &GradObservationSet, cfg: &TrainConfig) -> Result<TrainedSurrogate> {
    if data.len() < 2 {
        return Err(Error::TooFewPoints {
            needed: 2,
            got: data.len(),
        });
    }
    train_single(data, cfg, false)
}

/// Trains gradient-enhanced Kriging; values and gradients are both required.
pub fn train_gekriging(data: &GradObservationSet, cfg: &TrainConfig) -> Result<TrainedSurrogate> {
    if !data.has_gradients() {
        return Err(Error::MissingGradients);
    }
    train_single(data, cfg, true)
}

fn train_single(
    data: &GradObservationSet,
    cfg: &TrainConfig,
    with_grads: bool,
) -> Result<TrainedSurrogate> {
    let d = data.dim();
    let stored = if with_grads {
        data.clone()
    } else {
        data.without_gradients()
    };
    let spans = coordinate_spans(stored.points(), d);
    let space = SearchBox::new(length_box(&spans, cfg.length_log10_bounds))?;
    let (y, indicator) = augmented_targets(&stored, with_grads);

    let assemble = |lengths: &[f64]| -> Result<CovMatrix> {
        let kern = Kernel::gaussian(1.0, lengths.to_vec())?;
        if with_grads {
            covariance::assemble_gekriging(&kern, stored.points())
        } else {
            covariance::assemble_kriging(&kern, stored.points())
        }
    };

    let ga = maximize(
        |lengths| {
            let corr = assemble(lengths).ok()?;
            profile(&corr, &y, &indicator, cfg.alpha).ok().map(|p| p.lml)
        },
        &space,
        &cfg.ga,
    )?;

    let corr = assemble(&ga.best_params)?;
    let fit = profile(&corr, &y, &indicator, cfg.alpha)?;
    let residual = &y - &indicator * fit.mu;
    let weights = fit.factor.solve(&residual)?;
    let hyper = Hyperparameters {
        low_kernel: KernelParams::new(floor_variance(fit.sigma2), ga.best_params)?,
        disc_kernel: None,
        rho: 0.0,
        mean_low: fit.mu,
        mean_disc: 0.0,
        alpha: cfg.alpha,
    };
    let kind = if with_grads {
        ModelKind::GeKriging
    } else {
        ModelKind::Kriging
    };
    let lml = fit.lml;
    Ok(TrainedSurrogate::from_parts(
        kind,
        hyper,
        fit.factor,
        weights,
        TrainingData::Single(stored),
        lml,
    ))
}

/// Trains two-fidelity Cokriging on values (gradients are ignored): step 1
/// fits the low-fidelity process, step 2 jointly searches the regression
/// scalar and the discrepancy lengths.
pub fn train_cokriging(data: &MultiFidelityData, cfg: &TrainConfig) -> Result<TrainedSurrogate> {
    if data.low().len() < 2 {
        return Err(Error::TooFewPoints {
            needed: 2,
            got: data.low().len(),
        });
    }
    if data.high().len() < 2 {
        return Err(Error::TooFewPoints {
            needed: 2,
            got: data.high().len(),
        });
    }
    train_multi(data, cfg, false)
}

/// Trains gradient-enhanced Cokriging; gradients are required in both
/// fidelities.
pub fn train_gecokriging(data: &MultiFidelityData, cfg: &TrainConfig) -> Result<TrainedSurrogate> {
    if !data.low().has_gradients() || !data.high().has_gradients() {
        return Err(Error::MissingGradients);
    }
    train_multi(data, cfg, true)
}

/// Trains a plain Cokriging model on one gradient component as if it were
/// the QoI: the separate-model baseline for gradient prediction.
pub fn train_cokriging_gradient_baseline(
    data: &MultiFidelityData,
    component: usize,
    cfg: &TrainConfig,
) -> Result<TrainedSurrogate> {
    let view = data.gradient_component_as_values(component)?;
    train_cokriging(&view, cfg)
}

fn train_multi(
    data: &MultiFidelityData,
    cfg: &TrainConfig,
    with_grads: bool,
) -> Result<TrainedSurrogate> {
    let d = data.dim();
    let stored = if with_grads {
        data.clone()
    } else {
        data.without_gradients()
    };
    let low = stored.low();
    let high = stored.high();

    // Step 1: low-fidelity process on its own data.
    let step1_cfg = TrainConfig {
        ga: GaConfig {
            seed: derive_seed(cfg.ga.seed, 1),
            ..cfg.ga.clone()
        },
        ..cfg.clone()
    };
    let step1 = train_single(low, &step1_cfg, with_grads)?;
    let mu_l = step1.hyper().mean_low;
    let kern_l = Kernel::gaussian(
        step1.hyper().low_kernel.variance(),
        step1.hyper().low_kernel.lengths().to_vec(),
    )?;

    // Step 2: discrepancy lengths and rho against the concentrated
    // likelihood of y_d = y_H - rho * y_L(X_H) (and the gradient analogue).
    let y_h = high.values().to_vec();
    let y_lh = stored.low_values_at_high();
    let grads_h = high.gradients().map(|g| g.to_vec());
    let grads_lh = if with_grads {
        Some(stored.low_gradients_at_high()?)
    } else {
        None
    };
    let n_h = high.len();

    let disc_targets = |rho: f64| -> (DVector<f64>, DVector<f64>) {
        let m = if with_grads { n_h * (1 + d) } else { n_h };
        let mut y = DVector::zeros(m);
        let mut f = DVector::zeros(m);
        for i in 0..n_h {
            y[i] = y_h[i] - rho * y_lh[i];
            f[i] = 1.0;
        }
        if with_grads {
            let gh = grads_h.as_ref().expect("high-fidelity gradients");
            let gl = grads_lh.as_ref().expect("nested low-fidelity gradients");
            for i in 0..n_h {
                for c in 0..d {
                    y[n_h + i * d + c] = gh[i][c] - rho * gl[i][c];
                }
            }
        }
        (y, f)
    };

    let assemble_disc = |lengths: &[f64]| -> Result<CovMatrix> {
        let kern = Kernel::gaussian(1.0, lengths.to_vec())?;
        if with_grads {
            covariance::assemble_gekriging(&kern, high.points())
        } else {
            covariance::assemble_kriging(&kern, high.points())
        }
    };

    let spans = coordinate_spans(low.points(), d);
    let mut params = length_box(&spans, cfg.length_log10_bounds);
    params.push(ParamSpec::linear(cfg.rho_bounds.0, cfg.rho_bounds.1));
    let space = SearchBox::new(params)?;
    let step2_ga = GaConfig {
        seed: derive_seed(cfg.ga.seed, 2),
        ..cfg.ga.clone()
    };

    let ga = maximize(
        |params| {
            let (lengths, rest) = params.split_at(d);
            let rho = rest[0];
            let (y_d, f_d) = disc_targets(rho);
            let corr = assemble_disc(lengths).ok()?;
            let fit = profile(&corr, &y_d, &f_d, cfg.alpha).ok()?;
            if cfg.joint_lml {
                let kern_d =
                    Kernel::gaussian(floor_variance(fit.sigma2), lengths.to_vec()).ok()?;
                joint_likelihood(&stored, &kern_l, &kern_d, rho, mu_l, fit.mu, cfg.alpha, with_grads)
                    .ok()
            } else {
                Some(fit.lml)
            }
        },
        &space,
        &step2_ga,
    )?;

    let (lengths_d, rest) = ga.best_params.split_at(d);
    let rho = rest[0];
    let (y_d, f_d) = disc_targets(rho);
    let corr_d = assemble_disc(lengths_d)?;
    let fit_d = profile(&corr_d, &y_d, &f_d, cfg.alpha)?;
    let kern_d = Kernel::gaussian(floor_variance(fit_d.sigma2), lengths_d.to_vec())?;

    // Final joint system used for prediction.
    let (cov, y, mu) = joint_system(&stored, &kern_l, &kern_d, rho, mu_l, fit_d.mu, with_grads)?;
    let m = cov.size();
    let factor = covariance::factorize(&cov, cfg.alpha)?;
    let residual = &y - &mu;
    let weights = factor.solve(&residual)?;
    let lml =
        -0.5 * factor.quad_form(&residual)? - 0.5 * factor.logdet() - 0.5 * m as f64 * ln_2pi();

    let hyper = Hyperparameters {
        low_kernel: kern_l.params().clone(),
        disc_kernel: Some(kern_d.params().clone()),
        rho,
        mean_low: mu_l,
        mean_disc: fit_d.mu,
        alpha: cfg.alpha,
    };
    let kind = if with_grads {
        ModelKind::GeCokriging
    } else {
        ModelKind::Cokriging
    };
    Ok(TrainedSurrogate::from_parts(
        kind,
        hyper,
        factor,
        weights,
        TrainingData::Multi(stored),
        lml,
    ))
}

/// Builds the full two-fidelity covariance, the stacked observation vector
/// and the stacked mean vector (gradient rows have zero mean).
fn joint_system(
    data: &MultiFidelityData,
    kern_l: &Kernel,
    kern_d: &Kernel,
    rho: f64,
    mu_l: f64,
    mu_d: f64,
    with_grads: bool,
) -> Result<(CovMatrix, DVector<f64>, DVector<f64>)> {
    let low = data.low();
    let high = data.high();
    let d = data.dim();
    let cov = if with_grads {
        covariance::assemble_gecokriging(kern_l, kern_d, rho, low.points(), high.points())?
    } else {
        covariance::assemble_cokriging(kern_l, kern_d, rho, low.points(), high.points())?
    };
    let m = cov.size();
    let n_l = low.len();
    let n_h = high.len();
    let mu_h = rho * mu_l + mu_d;
    let mut y = DVector::zeros(m);
    let mut mu = DVector::zeros(m);
    for i in 0..n_l {
        y[i] = low.values()[i];
        mu[i] = mu_l;
    }
    for i in 0..n_h {
        y[n_l + i] = high.values()[i];
        mu[n_l + i] = mu_h;
    }
    if with_grads {
        let gl = low.gradients().ok_or(Error::MissingGradients)?;
        let gh = high.gradients().ok_or(Error::MissingGradients)?;
        let base = n_l + n_h;
        for i in 0..n_l {
            for c in 0..d {
                y[base + i * d + c] = gl[i][c];
            }
        }
        let base_h = base + n_l * d;
        for i in 0..n_h {
            for c in 0..d {
                y[base_h + i * d + c] = gh[i][c];
            }
        }
    }
    Ok((cov, y, mu))
}

/// Joint log marginal likelihood of the full two-fidelity system at fixed
/// hyperparameters.
#[allow(clippy::too_many_arguments)]
fn joint_likelihood(
    data: &MultiFidelityData,
    kern_l: &Kernel,
    kern_d: &Kernel,
    rho: f64,
    mu_l: f64,
    mu_d: f64,
    alpha: f64,
    with_grads: bool,
) -> Result<f64> {
    let (cov, y, mu) = joint_system(data, kern_l, kern_d, rho, mu_l, mu_d, with_grads)?;
    let m = cov.size();
    let factor = covariance::factorize(&cov, alpha)?;
    let residual = &y - &mu;
    Ok(-0.5 * factor.quad_form(&residual)? - 0.5 * factor.logdet() - 0.5 * m as f64 * ln_2pi())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::covariance::BlockLayout;
    use crate::surrogates::predict;
    use nalgebra::DMatrix;
    use rand::Rng;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn pts(xs: &[f64]) -> Vec<Point> {
        xs.iter().map(|&x| Point::scalar(x)).collect()
    }

    fn quick_cfg(seed: u64) -> TrainConfig {
        let mut cfg = TrainConfig::with_seed(seed);
        cfg.ga.population_size = 24;
        cfg.ga.generations = 30;
        cfg
    }

    fn forrester_high(x: f64) -> f64 {
        (6.0 * x - 2.0).powi(2) * (12.0 * x - 4.0).sin()
    }

    fn forrester_high_grad(x: f64) -> f64 {
        12.0 * (6.0 * x - 2.0) * (12.0 * x - 4.0).sin()
            + 12.0 * (6.0 * x - 2.0).powi(2) * (12.0 * x - 4.0).cos()
    }

    #[test]
    fn profile_recovers_mean_with_identity_correlation() {
        let corr = CovMatrix::new(
            DMatrix::identity(2, 2),
            BlockLayout {
                dim: 1,
                low_count: 2,
                high_count: 0,
                has_gradients: false,
                correlation_scaled: true,
            },
        )
        .unwrap();
        let y = DVector::from_vec(vec![1.0, 2.0]);
        let ones = DVector::repeat(2, 1.0);
        let fit = profile(&corr, &y, &ones, 0.0).unwrap();
        assert!((fit.mu - 1.5).abs() < 1e-14);
        assert!((fit.sigma2 - 0.25).abs() < 1e-14);
    }

    #[test]
    fn kriging_constant_data() {
        let data =
            GradObservationSet::values_only(pts(&[0.0, 1.0]), vec![3.5, 3.5]).unwrap();
        let s = train_kriging(&data, &quick_cfg(1)).unwrap();
        assert!(s.prior_variance() < 1e-12);
        let preds = predict(&s, &pts(&[0.0, 0.33, 0.8, 2.5])).unwrap();
        for p in preds {
            assert!((p.mean - 3.5).abs() < 1e-9, "mean {}", p.mean);
        }
    }

    #[test]
    fn kriging_too_few_points() {
        let data = GradObservationSet::values_only(pts(&[0.4]), vec![1.0]).unwrap();
        assert!(matches!(
            train_kriging(&data, &quick_cfg(2)),
            Err(Error::TooFewPoints { .. })
        ));
    }

    #[test]
    fn kriging_interpolates_forrester() {
        let xs = [0.0, 0.2, 0.6, 1.0];
        let data = GradObservationSet::values_only(
            pts(&xs),
            xs.iter().map(|&x| forrester_high(x)).collect(),
        )
        .unwrap();
        let s = train_kriging(&data, &quick_cfg(3)).unwrap();
        let preds = predict(&s, &pts(&xs)).unwrap();
        for (p, &x) in preds.iter().zip(&xs) {
            assert!(
                (p.mean - forrester_high(x)).abs() < 1e-6,
                "at {x}: {} vs {}",
                p.mean,
                forrester_high(x)
            );
        }
    }

    #[test]
    fn gekriging_requires_gradients() {
        let data = GradObservationSet::values_only(pts(&[0.0, 1.0]), vec![0.0, 1.0]).unwrap();
        assert!(matches!(
            train_gekriging(&data, &quick_cfg(4)),
            Err(Error::MissingGradients)
        ));
    }

    #[test]
    fn gekriging_single_point() {
        let data = GradObservationSet::with_gradients(
            pts(&[0.3]),
            vec![5.0],
            vec![vec![0.0]],
        )
        .unwrap();
        let s = train_gekriging(&data, &quick_cfg(5)).unwrap();
        let p = &predict(&s, &pts(&[0.3])).unwrap()[0];
        assert!((p.mean - 5.0).abs() < 1e-9);
        assert!(p.grad_mean[0].abs() < 1e-9);
    }

    #[test]
    fn gekriging_interpolates_values_and_gradients() {
        let xs = [0.0, 0.2, 0.6, 1.0];
        let data = GradObservationSet::with_gradients(
            pts(&xs),
            xs.iter().map(|&x| forrester_high(x)).collect(),
            xs.iter().map(|&x| vec![forrester_high_grad(x)]).collect(),
        )
        .unwrap();
        let s = train_gekriging(&data, &quick_cfg(6)).unwrap();
        let preds = predict(&s, &pts(&xs)).unwrap();
        let scale = xs
            .iter()
            .map(|&x| forrester_high(x).abs())
            .fold(0.0f64, f64::max);
        let gscale = xs
            .iter()
            .map(|&x| forrester_high_grad(x).abs())
            .fold(0.0f64, f64::max);
        for (p, &x) in preds.iter().zip(&xs) {
            assert!((p.mean - forrester_high(x)).abs() < 1e-5 * scale);
            assert!((p.grad_mean[0] - forrester_high_grad(x)).abs() < 1e-5 * gscale);
        }
    }

    fn zero_discrepancy_pair(rho: f64) -> MultiFidelityData {
        let g = |x: f64| (3.0 * x).sin() + 0.5 * x;
        let gp = |x: f64| 3.0 * (3.0 * x).cos() + 0.5;
        let xl = [0.0, 0.25, 0.5, 0.75, 1.0, 1.25];
        let xh = [0.0, 0.5, 1.0];
        let low = GradObservationSet::with_gradients(
            pts(&xl),
            xl.iter().map(|&x| g(x)).collect(),
            xl.iter().map(|&x| vec![gp(x)]).collect(),
        )
        .unwrap();
        let high = GradObservationSet::with_gradients(
            pts(&xh),
            xh.iter().map(|&x| rho * g(x)).collect(),
            xh.iter().map(|&x| vec![rho * gp(x)]).collect(),
        )
        .unwrap();
        MultiFidelityData::new(low, high).unwrap()
    }

    #[test]
    fn cokriging_recovers_rho_on_zero_discrepancy() {
        let data = zero_discrepancy_pair(2.0).without_gradients();
        let s = train_cokriging(&data, &quick_cfg(7)).unwrap();
        assert!(
            (s.hyper().rho - 2.0).abs() < 1e-2,
            "rho {} not near 2",
            s.hyper().rho
        );
        assert!(s.hyper().disc_kernel.as_ref().unwrap().variance() < 1e-6);
    }

    #[test]
    fn gecokriging_recovers_rho_on_zero_discrepancy() {
        let data = zero_discrepancy_pair(2.0);
        let s = train_gecokriging(&data, &quick_cfg(8)).unwrap();
        assert!(
            (s.hyper().rho - 2.0).abs() < 1e-2,
            "rho {} not near 2",
            s.hyper().rho
        );
    }

    #[test]
    fn cokriging_rho_stays_small_for_uncorrelated_high_data() {
        let g = |x: f64| 10.0 * (2.0 * x).sin();
        let xl = [0.0, 0.2, 0.4, 0.6, 0.8, 1.0];
        let xh = [0.0, 0.4, 0.8, 1.0];
        // noise-like high-fidelity values, unrelated to g
        let yh = [0.031, -0.092, 0.054, -0.017];
        let low = GradObservationSet::values_only(pts(&xl), xl.iter().map(|&x| g(x)).collect())
            .unwrap();
        let high = GradObservationSet::values_only(pts(&xh), yh.to_vec()).unwrap();
        let data = MultiFidelityData::new(low, high).unwrap();
        let s = train_cokriging(&data, &quick_cfg(9)).unwrap();
        assert!(
            s.hyper().rho.abs() < 0.5,
            "rho {} should be near 0",
            s.hyper().rho
        );
    }

    #[test]
    fn cokriging_interpolates_high_fidelity() {
        let f_l = |x: f64| 0.5 * forrester_high(x) + 10.0 * (x - 0.5) - 5.0;
        let xl = [0.0, 0.2, 0.4, 0.6, 0.8, 1.0];
        let xh = [0.0, 0.2, 0.6, 1.0];
        let low = GradObservationSet::values_only(pts(&xl), xl.iter().map(|&x| f_l(x)).collect())
            .unwrap();
        let high = GradObservationSet::values_only(
            pts(&xh),
            xh.iter().map(|&x| forrester_high(x)).collect(),
        )
        .unwrap();
        let data = MultiFidelityData::new(low, high).unwrap();
        let s = train_cokriging(&data, &quick_cfg(10)).unwrap();
        let preds = predict(&s, &pts(&xh)).unwrap();
        let scale = xh
            .iter()
            .map(|&x| forrester_high(x).abs())
            .fold(0.0f64, f64::max);
        for (p, &x) in preds.iter().zip(&xh) {
            assert!(
                (p.mean - forrester_high(x)).abs() < 1e-5 * scale,
                "at {x}: {} vs {}",
                p.mean,
                forrester_high(x)
            );
        }
    }

    #[test]
    fn gradient_baseline_requires_gradients() {
        let data = zero_discrepancy_pair(1.5).without_gradients();
        assert!(matches!(
            train_cokriging_gradient_baseline(&data, 0, &quick_cfg(11)),
            Err(Error::MissingGradients)
        ));
    }

    #[test]
    fn gradient_baseline_recovers_constant_gradient() {
        let xl = [0.0, 0.3, 0.6, 0.9, 1.2];
        let xh = [0.0, 0.6, 1.2];
        let low = GradObservationSet::with_gradients(
            pts(&xl),
            xl.iter().map(|&x| 3.0 * x).collect(),
            xl.iter().map(|_| vec![3.0]).collect(),
        )
        .unwrap();
        let high = GradObservationSet::with_gradients(
            pts(&xh),
            xh.iter().map(|&x| 5.0 * x + 1.0).collect(),
            xh.iter().map(|_| vec![5.0]).collect(),
        )
        .unwrap();
        let data = MultiFidelityData::new(low, high).unwrap();
        let s = train_cokriging_gradient_baseline(&data, 0, &quick_cfg(12)).unwrap();
        let preds = predict(&s, &pts(&[0.1, 0.45, 0.77, 1.1])).unwrap();
        for p in preds {
            assert!((p.mean - 5.0).abs() < 1e-6, "baseline mean {}", p.mean);
        }
    }

    #[test]
    fn attained_lml_beats_random_sampling() {
        let xs = [0.0, 0.2, 0.6, 1.0];
        let data = GradObservationSet::values_only(
            pts(&xs),
            xs.iter().map(|&x| forrester_high(x)).collect(),
        )
        .unwrap();
        let cfg = quick_cfg(13);
        let s = train_kriging(&data, &cfg).unwrap();

        let (y, ones) = augmented_targets(&data, false);
        let objective = |l: f64| -> Option<f64> {
            let kern = Kernel::gaussian(1.0, vec![l]).ok()?;
            let corr = covariance::assemble_kriging(&kern, data.points()).ok()?;
            profile(&corr, &y, &ones, cfg.alpha).ok().map(|p| p.lml)
        };
        let attained = objective(s.hyper().low_kernel.lengths()[0]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..100 {
            let l = 10f64.powf(rng.gen_range(-3.0..2.0));
            if let Some(v) = objective(l) {
                assert!(
                    attained >= v - 1e-9,
                    "random candidate l={l} beat the optimizer: {v} > {attained}"
                );
            }
        }
    }

    #[test]
    fn joint_lml_flag_trains_and_predicts() {
        let mut cfg = quick_cfg(14);
        cfg.joint_lml = true;
        let data = zero_discrepancy_pair(2.0).without_gradients();
        let s = train_cokriging(&data, &cfg).unwrap();
        // still a near-exact multi-fidelity relationship
        assert!((s.hyper().rho - 2.0).abs() < 0.2, "rho {}", s.hyper().rho);
        let p = &predict(&s, &pts(&[0.5])).unwrap()[0];
        let truth = 2.0 * ((3.0f64 * 0.5).sin() + 0.25);
        assert!((p.mean - truth).abs() < 1e-3);
    }

    #[test]
    fn training_is_deterministic() {
        let data = zero_discrepancy_pair(2.0);
        let a = train_gecokriging(&data, &quick_cfg(15)).unwrap();
        let b = train_gecokriging(&data, &quick_cfg(15)).unwrap();
        assert_eq!(a.hyper().rho.to_bits(), b.hyper().rho.to_bits());
        assert_eq!(a.lml().to_bits(), b.lml().to_bits());
        let pa = &predict(&a, &pts(&[0.37])).unwrap()[0];
        let pb = &predict(&b, &pts(&[0.37])).unwrap()[0];
        assert_eq!(pa.mean.to_bits(), pb.mean.to_bits());
    }
}
