//! The four surrogate models: Kriging, GE-Kriging, Cokriging and
//! GE-Cokriging.
//!
//! Training profiles the constant mean and process variance out of the log
//! marginal likelihood in closed form and searches the remaining
//! hyperparameters (correlation lengths, and the regression scalar for
//! multi-fidelity models) with the genetic algorithm from
//! [`crate::optimizer`]. Multi-fidelity training follows the two-step
//! scheme: fit the low-fidelity process first, then fit the discrepancy
//! jointly with the regression scalar.
//!
//! Prediction returns the QoI posterior and the gradient posterior together.
//! For the gradient-enhanced models the gradient posterior comes from the
//! model itself; for the value-only models the gradient fields are derived
//! by differentiating the posterior mean and are provided as a convenience,
//! not as the models' own claim.

mod data;
mod predict;
mod train;

pub use data::{GradObservationSet, MultiFidelityData};
pub use predict::{
    predict, predict_cokriging, predict_gecokriging, predict_gekriging, predict_kriging,
};
pub use train::{
    train_cokriging, train_cokriging_gradient_baseline, train_gecokriging, train_gekriging,
    train_kriging,
};

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::covariance::Factorization;
use crate::error::{Error, Result};
use crate::kernel::KernelParams;
use crate::optimizer::GaConfig;
pub use crate::point::Point;

/// Which of the four models a [`TrainedSurrogate`] is.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModelKind {
    Kriging,
    GeKriging,
    Cokriging,
    GeCokriging,
}

impl ModelKind {
    pub fn name(&self) -> &'static str {
        match self {
            ModelKind::Kriging => "kriging",
            ModelKind::GeKriging => "gekriging",
            ModelKind::Cokriging => "cokriging",
            ModelKind::GeCokriging => "gecokriging",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "kriging" => Some(ModelKind::Kriging),
            "gekriging" | "ge-kriging" => Some(ModelKind::GeKriging),
            "cokriging" => Some(ModelKind::Cokriging),
            "gecokriging" | "ge-cokriging" => Some(ModelKind::GeCokriging),
            _ => None,
        }
    }

    pub fn is_multi_fidelity(&self) -> bool {
        matches!(self, ModelKind::Cokriging | ModelKind::GeCokriging)
    }

    pub fn uses_gradients(&self) -> bool {
        matches!(self, ModelKind::GeKriging | ModelKind::GeCokriging)
    }
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Identified hyperparameters of a trained model.
///
/// Single-fidelity models leave `disc_kernel` empty, `rho` at zero and put
/// the profiled mean in `mean_low`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Hyperparameters {
    pub low_kernel: KernelParams,
    pub disc_kernel: Option<KernelParams>,
    pub rho: f64,
    pub mean_low: f64,
    pub mean_disc: f64,
    pub alpha: f64,
}

impl Hyperparameters {
    /// Constant mean of the high-fidelity process, `rho * mu_L + mu_d`.
    pub fn mean_high(&self) -> f64 {
        self.rho * self.mean_low + self.mean_disc
    }
}

/// Training options shared by all four models.
#[derive(Debug, Clone)]
pub struct TrainConfig {
    pub ga: GaConfig,
    /// Requested covariance jitter; factorization may escalate it.
    pub alpha: f64,
    /// Correlation-length search bounds as `log10` offsets relative to the
    /// per-dimension coordinate span of the training data.
    pub length_log10_bounds: (f64, f64),
    /// Search interval for the regression scalar.
    pub rho_bounds: (f64, f64),
    /// Score multi-fidelity candidates with the joint log marginal
    /// likelihood of the full two-fidelity covariance instead of the
    /// step-2 concentrated likelihood. Not the benchmark path.
    pub joint_lml: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            ga: GaConfig::default(),
            alpha: 1e-14,
            length_log10_bounds: (-3.0, 2.0),
            rho_bounds: (-5.0, 5.0),
            joint_lml: false,
        }
    }
}

impl TrainConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            ga: GaConfig::with_seed(seed),
            ..Self::default()
        }
    }
}

/// The training data a surrogate was fitted to.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum TrainingData {
    Single(GradObservationSet),
    Multi(MultiFidelityData),
}

/// A trained surrogate: hyperparameters, the factorized training covariance,
/// the precomputed weight vector and the attained log marginal likelihood.
///
/// Immutable after training; predictions on a shared instance are safe from
/// any number of threads.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainedSurrogate {
    kind: ModelKind,
    hyper: Hyperparameters,
    factor: Factorization,
    weights: DVector<f64>,
    data: TrainingData,
    lml: f64,
}

impl TrainedSurrogate {
    pub(crate) fn from_parts(
        kind: ModelKind,
        hyper: Hyperparameters,
        factor: Factorization,
        weights: DVector<f64>,
        data: TrainingData,
        lml: f64,
    ) -> Self {
        debug_assert_eq!(factor.size(), weights.len());
        Self {
            kind,
            hyper,
            factor,
            weights,
            data,
            lml,
        }
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn hyper(&self) -> &Hyperparameters {
        &self.hyper
    }

    pub fn factor(&self) -> &Factorization {
        &self.factor
    }

    pub(crate) fn weights(&self) -> &DVector<f64> {
        &self.weights
    }

    pub fn data(&self) -> &TrainingData {
        &self.data
    }

    /// Attained log marginal likelihood. For multi-fidelity models this is
    /// the joint likelihood of the full two-fidelity system at the final
    /// hyperparameters.
    pub fn lml(&self) -> f64 {
        self.lml
    }

    /// Jitter actually applied when factorizing the training covariance.
    pub fn jitter_used(&self) -> f64 {
        self.factor.jitter_used()
    }

    /// Input dimension.
    pub fn dim(&self) -> usize {
        self.hyper.low_kernel.dim()
    }

    /// Prior (far-field) variance of the QoI under the model.
    pub fn prior_variance(&self) -> f64 {
        match &self.hyper.disc_kernel {
            None => self.hyper.low_kernel.variance(),
            Some(d) => {
                self.hyper.rho * self.hyper.rho * self.hyper.low_kernel.variance() + d.variance()
            }
        }
    }
}

/// Posterior summary at one query point: QoI mean and variance (the mean
/// squared error of the prediction) plus per-component gradient means and
/// variances.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Prediction {
    pub mean: f64,
    pub variance: f64,
    pub grad_mean: Vec<f64>,
    pub grad_variance: Vec<f64>,
}

/// Relative tolerance for negative posterior variances produced by roundoff:
/// raw values above `-1e-8 * max(1, scale)` clamp to zero, anything lower is
/// an internal-consistency error.
pub(crate) fn clamp_variance(raw: f64, scale: f64) -> Result<f64> {
    let tol = 1e-8 * scale.abs().max(1.0);
    if raw < -tol || !raw.is_finite() {
        return Err(Error::VarianceInconsistency { raw, scale });
    }
    Ok(raw.max(0.0))
}
