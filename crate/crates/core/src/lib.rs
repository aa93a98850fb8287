//! Multi-fidelity Gaussian-process surrogates with gradient enhancement.
//!
//! The crate provides four related surrogate models over a Gaussian kernel:
//!
//! * **Kriging** — GP regression with a constant mean; the posterior mean
//!   interpolates noiseless observations.
//! * **GE-Kriging** — Kriging with the observation vector and covariance
//!   augmented by gradient observations and kernel derivatives.
//! * **Cokriging** — the two-fidelity auto-regressive model
//!   `Y_H = rho * Y_L + Y_d` linking a cheap low-fidelity GP and a
//!   discrepancy GP.
//! * **GE-Cokriging** — Cokriging with gradient augmentation at both
//!   fidelities, predicting the QoI and its gradients simultaneously with
//!   uncertainty.
//!
//! Hyperparameters are found by maximizing the concentrated log marginal
//! likelihood with a seedable genetic algorithm. The [`benchmarks`] module
//! holds analytic multi-fidelity test problems with exact gradients, a
//! tabulated-data loader, and the relative-MSE comparison harness.

pub mod benchmarks;
pub mod covariance;
pub mod error;
pub mod kernel;
pub mod optimizer;
pub mod point;
pub mod surrogates;

pub use error::{Error, Result};
pub use point::Point;
