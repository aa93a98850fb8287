//! Posterior evaluation at query points.

use crate::covariance::{Fidelity, Obs, ObsKind, ObsList};
use crate::error::{Error, Result};
use crate::kernel::Kernel;
use crate::point::Point;

use super::{clamp_variance, ModelKind, Prediction, TrainedSurrogate, TrainingData};

fn ensure_kind(s: &TrainedSurrogate, want: ModelKind) -> Result<()> {
    if s.kind() != want {
        return Err(Error::ModelKindMismatch {
            expected: want.name().to_string(),
            got: s.kind().name().to_string(),
        });
    }
    Ok(())
}

/// Predicts with whatever model `s` is.
pub fn predict(s: &TrainedSurrogate, queries: &[Point]) -> Result<Vec<Prediction>> {
    match s.kind() {
        ModelKind::Kriging | ModelKind::GeKriging => predict_single(s, queries),
        ModelKind::Cokriging | ModelKind::GeCokriging => predict_multi(s, queries),
    }
}

/// Ordinary Kriging posterior. The gradient fields are the derivative of the
/// posterior mean and the matching posterior variance of the process
/// derivative: a derived output, not a gradient-data fit.
pub fn predict_kriging(s: &TrainedSurrogate, queries: &[Point]) -> Result<Vec<Prediction>> {
    ensure_kind(s, ModelKind::Kriging)?;
    predict_single(s, queries)
}

/// GE-Kriging posterior: QoI and gradient posteriors from the augmented
/// system.
pub fn predict_gekriging(s: &TrainedSurrogate, queries: &[Point]) -> Result<Vec<Prediction>> {
    ensure_kind(s, ModelKind::GeKriging)?;
    predict_single(s, queries)
}

/// Cokriging posterior. As with [`predict_kriging`], gradient fields are
/// derived by differentiating the posterior mean.
pub fn predict_cokriging(s: &TrainedSurrogate, queries: &[Point]) -> Result<Vec<Prediction>> {
    ensure_kind(s, ModelKind::Cokriging)?;
    predict_multi(s, queries)
}

/// GE-Cokriging posterior: QoI and gradient posteriors simultaneously from
/// the augmented two-fidelity system.
pub fn predict_gecokriging(s: &TrainedSurrogate, queries: &[Point]) -> Result<Vec<Prediction>> {
    ensure_kind(s, ModelKind::GeCokriging)?;
    predict_multi(s, queries)
}

fn check_query_dim(q: &Point, d: usize) -> Result<()> {
    if q.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: q.dim(),
        });
    }
    Ok(())
}

fn predict_single(s: &TrainedSurrogate, queries: &[Point]) -> Result<Vec<Prediction>> {
    let set = match s.data() {
        TrainingData::Single(set) => set,
        TrainingData::Multi(_) => {
            return Err(Error::ModelKindMismatch {
                expected: "single-fidelity training data".into(),
                got: "multi-fidelity".into(),
            })
        }
    };
    let with_grads = s.kind().uses_gradients();
    let d = s.dim();
    let kern = Kernel::gaussian(1.0, s.hyper().low_kernel.lengths().to_vec())?;
    let obs = ObsList::single_fidelity(set.points(), with_grads)?;
    let sigma2 = s.hyper().low_kernel.variance();
    let mu = s.hyper().mean_low;

    let mut out = Vec::with_capacity(queries.len());
    for q in queries {
        check_query_dim(q, d)?;
        let psi = obs.cross_correlation(
            &kern,
            &Obs {
                fid: Fidelity::Low,
                kind: ObsKind::Value,
                point: q,
            },
        )?;
        let mean = mu + psi.dot(s.weights());
        let variance = clamp_variance(sigma2 * (1.0 - s.factor().quad_form(&psi)?), sigma2)?;

        let mut grad_mean = vec![0.0; d];
        let mut grad_variance = vec![0.0; d];
        for i in 0..d {
            let dpsi = obs.cross_correlation(
                &kern,
                &Obs {
                    fid: Fidelity::Low,
                    kind: ObsKind::Grad(i),
                    point: q,
                },
            )?;
            grad_mean[i] = dpsi.dot(s.weights());
            // prior variance of the process derivative is sigma^2 / l_i^2
            let prior = kern.hess_cross_entry(q, q, i, i)?;
            let raw = sigma2 * (prior - s.factor().quad_form(&dpsi)?);
            grad_variance[i] = clamp_variance(raw, sigma2 * prior)?;
        }
        out.push(Prediction {
            mean,
            variance,
            grad_mean,
            grad_variance,
        });
    }
    Ok(out)
}

fn predict_multi(s: &TrainedSurrogate, queries: &[Point]) -> Result<Vec<Prediction>> {
    let mf = match s.data() {
        TrainingData::Multi(mf) => mf,
        TrainingData::Single(_) => {
            return Err(Error::ModelKindMismatch {
                expected: "multi-fidelity training data".into(),
                got: "single-fidelity".into(),
            })
        }
    };
    let with_grads = s.kind().uses_gradients();
    let d = s.dim();
    let h = s.hyper();
    let kern_l = Kernel::gaussian(h.low_kernel.variance(), h.low_kernel.lengths().to_vec())?;
    let disc = h.disc_kernel.as_ref().ok_or(Error::ModelKindMismatch {
        expected: "discrepancy kernel".into(),
        got: "none".into(),
    })?;
    let kern_d = Kernel::gaussian(disc.variance(), disc.lengths().to_vec())?;
    let rho = h.rho;
    let obs = ObsList::multi_fidelity(mf.low().points(), mf.high().points(), with_grads)?;
    let mu_h = h.mean_high();
    let prior = rho * rho * kern_l.params().variance() + kern_d.params().variance();

    let mut out = Vec::with_capacity(queries.len());
    for q in queries {
        check_query_dim(q, d)?;
        let c = obs.cross_covariance(
            &kern_l,
            &kern_d,
            rho,
            &Obs {
                fid: Fidelity::High,
                kind: ObsKind::Value,
                point: q,
            },
        )?;
        let mean = mu_h + c.dot(s.weights());
        let variance = clamp_variance(prior - s.factor().quad_form(&c)?, prior)?;

        let mut grad_mean = vec![0.0; d];
        let mut grad_variance = vec![0.0; d];
        for i in 0..d {
            let dc = obs.cross_covariance(
                &kern_l,
                &kern_d,
                rho,
                &Obs {
                    fid: Fidelity::High,
                    kind: ObsKind::Grad(i),
                    point: q,
                },
            )?;
            grad_mean[i] = dc.dot(s.weights());
            // prior variance of the high-fidelity derivative:
            // rho^2 Var{d Y_L} + Var{d Y_d}
            let gprior = rho * rho * kern_l.hess_cross_entry(q, q, i, i)?
                + kern_d.hess_cross_entry(q, q, i, i)?;
            let raw = gprior - s.factor().quad_form(&dc)?;
            grad_variance[i] = clamp_variance(raw, gprior)?;
        }
        out.push(Prediction {
            mean,
            variance,
            grad_mean,
            grad_variance,
        });
    }
    Ok(out)
}

/// Central finite difference of the predicted QoI mean, used by tests to
/// check that gradient prediction and differentiation commute.
#[cfg(test)]
pub(crate) fn mean_finite_difference(
    s: &TrainedSurrogate,
    q: &Point,
    i: usize,
    h: f64,
) -> Result<f64> {
    let mut hi = q.clone();
    let mut lo = q.clone();
    hi.set_coord(i, q.coord(i) + h);
    lo.set_coord(i, q.coord(i) - h);
    let p = predict(s, &[hi, lo])?;
    Ok((p[0].mean - p[1].mean) / (2.0 * h))
}
