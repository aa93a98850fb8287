//! Stationary covariance functions with analytic first and second
//! cross-derivatives.
//!
//! Every covariance block in this crate is assembled from the Gaussian
//! (squared-exponential) kernel
//!
//! `k(x, x') = sigma^2 * exp(-1/2 * sum_i ((x_i - x'_i) / l_i)^2)`
//!
//! together with its derivatives with respect to either argument. The
//! derivatives are closed forms; finite differences appear only in tests.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::point::Point;

/// Process variance and per-dimension correlation lengths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelParams {
    variance: f64,
    lengths: Vec<f64>,
}

impl KernelParams {
    /// Validates `variance > 0` and every length `> 0`.
    pub fn new(variance: f64, lengths: Vec<f64>) -> Result<Self> {
        if !variance.is_finite() || variance <= 0.0 {
            return Err(Error::InvalidKernelParams(format!(
                "process variance must be positive and finite, got {variance}"
            )));
        }
        if lengths.is_empty() {
            return Err(Error::InvalidKernelParams(
                "at least one correlation length is required".into(),
            ));
        }
        if let Some(l) = lengths.iter().find(|l| !l.is_finite() || **l <= 0.0) {
            return Err(Error::InvalidKernelParams(format!(
                "correlation lengths must be positive and finite, got {l}"
            )));
        }
        Ok(Self { variance, lengths })
    }

    pub fn variance(&self) -> f64 {
        self.variance
    }

    pub fn lengths(&self) -> &[f64] {
        &self.lengths
    }

    /// Input dimension `d`.
    pub fn dim(&self) -> usize {
        self.lengths.len()
    }
}

/// Kernel families supported by the crate.
///
/// Only the Gaussian kernel is available; its first and cross-second
/// derivatives have simple closed forms used throughout the covariance
/// assembly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum KernelFamily {
    Gaussian,
}

/// An immutable stationary kernel: a family plus its parameters.
///
/// All operations are pure functions of the inputs, so a `Kernel` can be
/// shared freely across threads.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Kernel {
    family: KernelFamily,
    params: KernelParams,
}

impl Kernel {
    pub fn new(family: KernelFamily, params: KernelParams) -> Result<Self> {
        // Non-Gaussian families are rejected here once more are added.
        let KernelFamily::Gaussian = family;
        Ok(Self { family, params })
    }

    /// Gaussian kernel with the given variance and lengths.
    pub fn gaussian(variance: f64, lengths: Vec<f64>) -> Result<Self> {
        Self::new(KernelFamily::Gaussian, KernelParams::new(variance, lengths)?)
    }

    /// Same lengths, unit process variance. Correlation-matrix assembly uses
    /// this so entries come out as `k / sigma^2`.
    pub fn with_unit_variance(&self) -> Self {
        Self {
            family: self.family,
            params: KernelParams {
                variance: 1.0,
                lengths: self.params.lengths.clone(),
            },
        }
    }

    pub fn family(&self) -> KernelFamily {
        self.family
    }

    pub fn params(&self) -> &KernelParams {
        &self.params
    }

    pub fn dim(&self) -> usize {
        self.params.dim()
    }

    fn check_dims(&self, x: &Point, xp: &Point) -> Result<()> {
        let d = self.dim();
        if x.dim() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: x.dim(),
            });
        }
        if xp.dim() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: xp.dim(),
            });
        }
        Ok(())
    }

    /// `k(x, x') = sigma^2 * exp(-1/2 * ||x - x'||_w^2)`.
    pub fn eval(&self, x: &Point, xp: &Point) -> Result<f64> {
        self.check_dims(x, xp)?;
        let mut q = 0.0;
        for i in 0..self.dim() {
            let t = (x.coord(i) - xp.coord(i)) / self.params.lengths[i];
            q += t * t;
        }
        Ok(self.params.variance * (-0.5 * q).exp())
    }

    /// Gradient with respect to the first argument:
    /// component `i` is `-((x_i - x'_i) / l_i^2) * k(x, x')`.
    pub fn grad_x(&self, x: &Point, xp: &Point) -> Result<Vec<f64>> {
        let k = self.eval(x, xp)?;
        let d = self.dim();
        let mut g = vec![0.0; d];
        for (i, gi) in g.iter_mut().enumerate() {
            let l = self.params.lengths[i];
            *gi = -((x.coord(i) - xp.coord(i)) / (l * l)) * k;
        }
        Ok(g)
    }

    /// Gradient with respect to the second argument. For a stationary kernel
    /// this is exactly `-grad_x`.
    pub fn grad_xp(&self, x: &Point, xp: &Point) -> Result<Vec<f64>> {
        let mut g = self.grad_x(x, xp)?;
        for gi in &mut g {
            *gi = -*gi;
        }
        Ok(g)
    }

    /// Cross second derivatives: entry `(i, j)` is
    /// `d^2 k / (dx_i dx'_j) = (delta_ij / l_i^2
    ///   - (x_i - x'_i)(x_j - x'_j) / (l_i^2 l_j^2)) * k(x, x')`.
    pub fn hess_cross(&self, x: &Point, xp: &Point) -> Result<Vec<Vec<f64>>> {
        let k = self.eval(x, xp)?;
        let d = self.dim();
        let tau_over_l2: Vec<f64> = (0..d)
            .map(|i| {
                let l = self.params.lengths[i];
                (x.coord(i) - xp.coord(i)) / (l * l)
            })
            .collect();
        let mut h = vec![vec![0.0; d]; d];
        for i in 0..d {
            for j in 0..d {
                let delta = if i == j {
                    let l = self.params.lengths[i];
                    1.0 / (l * l)
                } else {
                    0.0
                };
                h[i][j] = (delta - tau_over_l2[i] * tau_over_l2[j]) * k;
            }
        }
        Ok(h)
    }

    /// Single cross second derivative `d^2 k / (dx_i dx'_j)` without building
    /// the full matrix.
    pub fn hess_cross_entry(&self, x: &Point, xp: &Point, i: usize, j: usize) -> Result<f64> {
        let k = self.eval(x, xp)?;
        let li = self.params.lengths[i];
        let lj = self.params.lengths[j];
        let ti = (x.coord(i) - xp.coord(i)) / (li * li);
        let tj = (x.coord(j) - xp.coord(j)) / (lj * lj);
        let delta = if i == j { 1.0 / (li * li) } else { 0.0 };
        Ok((delta - ti * tj) * k)
    }
}
