//! Covariance assembly and the regularized factorization/solve service.
//!
//! Four matrix shapes are produced here: the plain correlation matrix, its
//! gradient-augmented expansion, the two-fidelity auto-regressive covariance,
//! and the gradient-augmented two-fidelity covariance. All of them are built
//! from one entry function so value blocks, gradient blocks and the
//! prediction cross-covariance vectors can never drift apart.
//!
//! Block ordering is always `[values_low, values_high, gradients_low,
//! gradients_high]` with gradients location-major, matching the augmented
//! observation vector `(y_L, y_H, grad y_L, grad y_H)`.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::Kernel;
use crate::point::Point;

/// Jitter escalation floor: the first nonzero diagonal regularization tried.
pub const JITTER_FLOOR: f64 = 1e-14;
/// Jitter escalation ceiling: factorization failing here is an error.
pub const JITTER_CEIL: f64 = 1e-6;

/// Fidelity tier of an observation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Fidelity {
    Low,
    High,
}

/// What a single row/column of a covariance matrix refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum ObsKind {
    Value,
    /// Gradient component index.
    Grad(usize),
}

/// One observation: a fidelity tier, a kind, and a location.
#[derive(Clone, Copy)]
pub(crate) struct Obs<'a> {
    pub fid: Fidelity,
    pub kind: ObsKind,
    pub point: &'a Point,
}

/// Covariance of the base kernel between two observations, using the
/// derivative/covariance interchange identities: the covariance of a
/// gradient observation is the corresponding kernel derivative.
fn base_cov(kern: &Kernel, a: &Obs, b: &Obs) -> Result<f64> {
    match (a.kind, b.kind) {
        (ObsKind::Value, ObsKind::Value) => kern.eval(a.point, b.point),
        (ObsKind::Grad(m), ObsKind::Value) => Ok(kern.grad_x(a.point, b.point)?[m]),
        (ObsKind::Value, ObsKind::Grad(j)) => Ok(kern.grad_xp(a.point, b.point)?[j]),
        (ObsKind::Grad(m), ObsKind::Grad(j)) => kern.hess_cross_entry(a.point, b.point, m, j),
    }
}

/// Covariance between two observations under the auto-regressive two-fidelity
/// model `Y_H = rho * Y_L + Y_d`: low/low pairs see `k_L`, mixed pairs
/// `rho * k_L`, and high/high pairs `rho^2 * k_L + k_d`.
fn mf_cov(kern_l: &Kernel, kern_d: &Kernel, rho: f64, a: &Obs, b: &Obs) -> Result<f64> {
    let coeff = match (a.fid, b.fid) {
        (Fidelity::Low, Fidelity::Low) => 1.0,
        (Fidelity::High, Fidelity::High) => rho * rho,
        _ => rho,
    };
    let mut v = coeff * base_cov(kern_l, a, b)?;
    if a.fid == Fidelity::High && b.fid == Fidelity::High {
        v += base_cov(kern_d, a, b)?;
    }
    Ok(v)
}

/// The ordered observation list backing a covariance matrix.
pub(crate) struct ObsList<'a> {
    obs: Vec<Obs<'a>>,
    layout: BlockLayout,
}

impl<'a> ObsList<'a> {
    pub fn single_fidelity(points: &'a [Point], gradients: bool) -> Result<Self> {
        Self::build(points, &[], gradients, true)
    }

    pub fn multi_fidelity(low: &'a [Point], high: &'a [Point], gradients: bool) -> Result<Self> {
        Self::build(low, high, gradients, false)
    }

    fn build(
        low: &'a [Point],
        high: &'a [Point],
        gradients: bool,
        correlation_scaled: bool,
    ) -> Result<Self> {
        if low.is_empty() {
            return Err(Error::EmptyObservations);
        }
        let d = low[0].dim();
        for p in low.iter().chain(high.iter()) {
            if p.dim() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: p.dim(),
                });
            }
        }
        let layout = BlockLayout {
            dim: d,
            low_count: low.len(),
            high_count: high.len(),
            has_gradients: gradients,
            correlation_scaled,
        };
        let mut obs = Vec::with_capacity(layout.total());
        for p in low {
            obs.push(Obs {
                fid: Fidelity::Low,
                kind: ObsKind::Value,
                point: p,
            });
        }
        for p in high {
            obs.push(Obs {
                fid: Fidelity::High,
                kind: ObsKind::Value,
                point: p,
            });
        }
        if gradients {
            for (fid, pts) in [(Fidelity::Low, low), (Fidelity::High, high)] {
                for p in pts {
                    for c in 0..d {
                        obs.push(Obs {
                            fid,
                            kind: ObsKind::Grad(c),
                            point: p,
                        });
                    }
                }
            }
        }
        debug_assert_eq!(obs.len(), layout.total());
        Ok(Self { obs, layout })
    }

    /// Correlation-form matrix: entries of the unit-variance kernel, so the
    /// value diagonal is exactly 1.
    pub fn correlation_matrix(&self, kern: &Kernel) -> Result<CovMatrix> {
        let unit = kern.with_unit_variance();
        self.matrix_with(|a, b| base_cov(&unit, a, b))
    }

    /// Covariance-form matrix of the two-fidelity model.
    pub fn covariance_matrix(&self, kern_l: &Kernel, kern_d: &Kernel, rho: f64) -> Result<CovMatrix> {
        self.matrix_with(|a, b| mf_cov(kern_l, kern_d, rho, a, b))
    }

    fn matrix_with<F>(&self, entry: F) -> Result<CovMatrix>
    where
        F: Fn(&Obs, &Obs) -> Result<f64>,
    {
        let n = self.obs.len();
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let v = entry(&self.obs[i], &self.obs[j])?;
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        CovMatrix::new(m, self.layout.clone())
    }

    /// Correlation between each observation and a query observation.
    pub fn cross_correlation(&self, kern: &Kernel, query: &Obs) -> Result<DVector<f64>> {
        let unit = kern.with_unit_variance();
        self.vector_with(|a| base_cov(&unit, a, query))
    }

    /// Covariance between each observation and a query observation under the
    /// two-fidelity model. Queries address the high-fidelity process.
    pub fn cross_covariance(
        &self,
        kern_l: &Kernel,
        kern_d: &Kernel,
        rho: f64,
        query: &Obs,
    ) -> Result<DVector<f64>> {
        self.vector_with(|a| mf_cov(kern_l, kern_d, rho, a, query))
    }

    fn vector_with<F>(&self, entry: F) -> Result<DVector<f64>>
    where
        F: Fn(&Obs) -> Result<f64>,
    {
        let mut v = DVector::zeros(self.obs.len());
        for (i, o) in self.obs.iter().enumerate() {
            v[i] = entry(o)?;
        }
        Ok(v)
    }
}

/// Records what each row/column of an assembled matrix means.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockLayout {
    /// Input dimension.
    pub dim: usize,
    /// Number of low-fidelity locations (the only block for single-fidelity
    /// matrices).
    pub low_count: usize,
    /// Number of high-fidelity locations; zero for single-fidelity matrices.
    pub high_count: usize,
    /// Whether gradient blocks are present.
    pub has_gradients: bool,
    /// True when entries are `k / sigma^2` (single-fidelity correlation
    /// form), false for covariance form.
    pub correlation_scaled: bool,
}

impl BlockLayout {
    pub fn total(&self) -> usize {
        let per_location = 1 + if self.has_gradients { self.dim } else { 0 };
        (self.low_count + self.high_count) * per_location
    }

    /// Row/column of the value observation `i` of the given fidelity.
    pub fn value_index(&self, fid: Fidelity, i: usize) -> usize {
        match fid {
            Fidelity::Low => i,
            Fidelity::High => self.low_count + i,
        }
    }

    /// Row/column of gradient component `c` at location `i` of the given
    /// fidelity (gradient rows are location-major).
    pub fn gradient_index(&self, fid: Fidelity, i: usize, c: usize) -> usize {
        let values = self.low_count + self.high_count;
        match fid {
            Fidelity::Low => values + i * self.dim + c,
            Fidelity::High => values + self.low_count * self.dim + i * self.dim + c,
        }
    }
}

/// A dense symmetric covariance (or correlation) matrix plus its layout.
///
/// Construction symmetrizes via `(C + C^T) / 2`, so the stored entries are
/// exactly symmetric.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CovMatrix {
    entries: DMatrix<f64>,
    layout: BlockLayout,
}

impl CovMatrix {
    pub fn new(entries: DMatrix<f64>, layout: BlockLayout) -> Result<Self> {
        if entries.nrows() != entries.ncols() {
            return Err(Error::DimensionMismatch {
                expected: entries.nrows(),
                got: entries.ncols(),
            });
        }
        if entries.nrows() != layout.total() {
            return Err(Error::LengthMismatch {
                expected: layout.total(),
                got: entries.nrows(),
            });
        }
        let sym = (&entries + entries.transpose()) * 0.5;
        Ok(Self {
            entries: sym,
            layout,
        })
    }

    pub fn size(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn layout(&self) -> &BlockLayout {
        &self.layout
    }
}

/// Assembles the `N x N` correlation matrix of a single-fidelity design:
/// entries `k(x_i, x_j) / sigma^2`, unit diagonal.
pub fn assemble_kriging(kern: &Kernel, points: &[Point]) -> Result<CovMatrix> {
    ObsList::single_fidelity(points, false)?.correlation_matrix(kern)
}

/// Assembles the `N(1+d)` gradient-augmented correlation matrix: value/value
/// block, first-derivative blocks and the cross-derivative block, all scaled
/// by `1 / sigma^2`.
pub fn assemble_gekriging(kern: &Kernel, points: &[Point]) -> Result<CovMatrix> {
    ObsList::single_fidelity(points, true)?.correlation_matrix(kern)
}

/// Assembles the `(N_L + N_H)`-square two-fidelity covariance matrix of the
/// auto-regressive model.
pub fn assemble_cokriging(
    kern_l: &Kernel,
    kern_d: &Kernel,
    rho: f64,
    low: &[Point],
    high: &[Point],
) -> Result<CovMatrix> {
    if high.is_empty() {
        return Err(Error::EmptyObservations);
    }
    ObsList::multi_fidelity(low, high, false)?.covariance_matrix(kern_l, kern_d, rho)
}

/// Assembles the `(N_L + N_H)(1+d)`-square gradient-augmented two-fidelity
/// covariance matrix. Both off-diagonal gradient/value sub-blocks carry the
/// `rho` factor so the matrix is exactly symmetric and its value marginal
/// equals the plain two-fidelity covariance.
pub fn assemble_gecokriging(
    kern_l: &Kernel,
    kern_d: &Kernel,
    rho: f64,
    low: &[Point],
    high: &[Point],
) -> Result<CovMatrix> {
    if high.is_empty() {
        return Err(Error::EmptyObservations);
    }
    ObsList::multi_fidelity(low, high, true)?.covariance_matrix(kern_l, kern_d, rho)
}

/// Lower-triangular Cholesky factor of `C + alpha * I` with the jitter that
/// was actually applied and the log-determinant of the regularized matrix.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Factorization {
    lower: DMatrix<f64>,
    jitter_used: f64,
    logdet: f64,
}

impl Factorization {
    pub fn size(&self) -> usize {
        self.lower.nrows()
    }

    pub fn jitter_used(&self) -> f64 {
        self.jitter_used
    }

    /// Log-determinant of `C + jitter_used * I`.
    pub fn logdet(&self) -> f64 {
        self.logdet
    }

    pub fn lower(&self) -> &DMatrix<f64> {
        &self.lower
    }

    fn check_len(&self, b: &DVector<f64>) -> Result<()> {
        if b.len() != self.size() {
            return Err(Error::LengthMismatch {
                expected: self.size(),
                got: b.len(),
            });
        }
        Ok(())
    }

    /// `(C + alpha I)^{-1} b` via two triangular solves.
    pub fn solve(&self, b: &DVector<f64>) -> Result<DVector<f64>> {
        let y = self.forward(b)?;
        Ok(self
            .lower
            .tr_solve_lower_triangular(&y)
            .expect("factor diagonal is positive"))
    }

    /// `L^{-1} b`, the forward substitution half of a solve.
    pub fn forward(&self, b: &DVector<f64>) -> Result<DVector<f64>> {
        self.check_len(b)?;
        Ok(self
            .lower
            .solve_lower_triangular(b)
            .expect("factor diagonal is positive"))
    }

    /// Quadratic form `b^T (C + alpha I)^{-1} b`, computed as `||L^{-1}b||^2`
    /// so it is nonnegative by construction up to roundoff.
    pub fn quad_form(&self, b: &DVector<f64>) -> Result<f64> {
        let z = self.forward(b)?;
        Ok(z.norm_squared())
    }
}

/// Cholesky-factorizes `C + alpha I`, escalating the jitter tenfold from
/// [`JITTER_FLOOR`] up to [`JITTER_CEIL`] when the factorization fails.
///
/// Failure at the ceiling signals degenerate data or pathological
/// hyperparameters; the hyperparameter search treats it as `-inf` likelihood.
pub fn factorize(c: &CovMatrix, alpha: f64) -> Result<Factorization> {
    assert!(alpha >= 0.0, "jitter must be nonnegative");
    let n = c.size();
    let mut attempt = alpha;
    loop {
        let mut m = c.entries().clone();
        for i in 0..n {
            m[(i, i)] += attempt;
        }
        if let Some(chol) = try_cholesky(m) {
            let lower = chol.unpack();
            let logdet = 2.0 * (0..n).map(|i| lower[(i, i)].ln()).sum::<f64>();
            return Ok(Factorization {
                lower,
                jitter_used: attempt,
                logdet,
            });
        }
        attempt = if attempt < JITTER_FLOOR {
            JITTER_FLOOR
        } else {
            attempt * 10.0
        };
        if attempt > JITTER_CEIL * (1.0 + 1e-9) {
            return Err(Error::NotPositiveDefinite {
                max_jitter: JITTER_CEIL,
            });
        }
    }
}

fn try_cholesky(m: DMatrix<f64>) -> Option<Cholesky<f64, Dyn>> {
    if m.iter().any(|v| !v.is_finite()) {
        return None;
    }
    Cholesky::new(m)
}
