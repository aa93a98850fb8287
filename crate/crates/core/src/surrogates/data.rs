//! Observation containers shared by the surrogate models.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::point::Point;

/// `N` locations with QoI values and, optionally, full gradient vectors at
/// each location.
///
/// Gradients are all-or-nothing: either every location carries a complete
/// `d`-vector or the set is value-only.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GradObservationSet {
    points: Vec<Point>,
    values: Vec<f64>,
    gradients: Option<Vec<Vec<f64>>>,
}

impl GradObservationSet {
    /// Value-only observations.
    pub fn values_only(points: Vec<Point>, values: Vec<f64>) -> Result<Self> {
        Self::build(points, values, None)
    }

    /// Observations with gradients; `gradients[i]` is the full gradient at
    /// `points[i]`.
    pub fn with_gradients(
        points: Vec<Point>,
        values: Vec<f64>,
        gradients: Vec<Vec<f64>>,
    ) -> Result<Self> {
        Self::build(points, values, Some(gradients))
    }

    fn build(points: Vec<Point>, values: Vec<f64>, gradients: Option<Vec<Vec<f64>>>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptyObservations);
        }
        let d = points[0].dim();
        if d == 0 {
            return Err(Error::EmptyObservations);
        }
        if let Some(p) = points.iter().find(|p| p.dim() != d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: p.dim(),
            });
        }
        if values.len() != points.len() {
            return Err(Error::LengthMismatch {
                expected: points.len(),
                got: values.len(),
            });
        }
        if let Some(grads) = &gradients {
            if grads.len() != points.len() || grads.iter().any(|g| g.len() != d) {
                return Err(Error::GradientShape {
                    n: points.len(),
                    d,
                });
            }
        }
        // Duplicate locations make the covariance exactly singular; reject
        // them up front instead of relying on jitter.
        for i in 0..points.len() {
            for j in (i + 1)..points.len() {
                if points[i].coincides_with(&points[j]) {
                    return Err(Error::DuplicateLocation {
                        first: i,
                        second: j,
                    });
                }
            }
        }
        Ok(Self {
            points,
            values,
            gradients,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points[0].dim()
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn gradients(&self) -> Option<&[Vec<f64>]> {
        self.gradients.as_deref()
    }

    pub fn has_gradients(&self) -> bool {
        self.gradients.is_some()
    }

    /// Drops the gradient columns, keeping locations and values.
    pub fn without_gradients(&self) -> Self {
        Self {
            points: self.points.clone(),
            values: self.values.clone(),
            gradients: None,
        }
    }

    /// Replaces the values with the `component`-th gradient entry at each
    /// location, producing a value-only set. Used by the separate-model
    /// gradient baseline.
    pub fn gradient_component_as_values(&self, component: usize) -> Result<Self> {
        let grads = self.gradients().ok_or(Error::MissingGradients)?;
        if component >= self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: component,
            });
        }
        Ok(Self {
            points: self.points.clone(),
            values: grads.iter().map(|g| g[component]).collect(),
            gradients: None,
        })
    }
}

/// A low-fidelity and a high-fidelity observation set with nesting metadata.
///
/// The nesting vector maps each high-fidelity location to the index of its
/// matching low-fidelity location; construction fails with
/// [`Error::NotNested`] when any high-fidelity point has no match.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MultiFidelityData {
    low: GradObservationSet,
    high: GradObservationSet,
    nesting: Vec<usize>,
}

impl MultiFidelityData {
    pub fn new(low: GradObservationSet, high: GradObservationSet) -> Result<Self> {
        if low.dim() != high.dim() {
            return Err(Error::DimensionMismatch {
                expected: low.dim(),
                got: high.dim(),
            });
        }
        let mut nesting = Vec::with_capacity(high.len());
        for (i, hp) in high.points().iter().enumerate() {
            match low.points().iter().position(|lp| lp.coincides_with(hp)) {
                Some(j) => nesting.push(j),
                None => {
                    return Err(Error::NotNested {
                        index: i,
                        location: format!("{:?}", hp.coords()),
                    })
                }
            }
        }
        Ok(Self { low, high, nesting })
    }

    pub fn low(&self) -> &GradObservationSet {
        &self.low
    }

    pub fn high(&self) -> &GradObservationSet {
        &self.high
    }

    pub fn dim(&self) -> usize {
        self.low.dim()
    }

    /// Low-fidelity index matched to each high-fidelity location.
    pub fn nesting(&self) -> &[usize] {
        &self.nesting
    }

    /// Low-fidelity values at the high-fidelity locations.
    pub fn low_values_at_high(&self) -> Vec<f64> {
        self.nesting.iter().map(|&j| self.low.values()[j]).collect()
    }

    /// Low-fidelity gradients at the high-fidelity locations.
    pub fn low_gradients_at_high(&self) -> Result<Vec<Vec<f64>>> {
        let grads = self.low.gradients().ok_or(Error::MissingGradients)?;
        Ok(self.nesting.iter().map(|&j| grads[j].clone()).collect())
    }

    /// Keeps locations and values only, in both fidelities.
    pub fn without_gradients(&self) -> Self {
        Self {
            low: self.low.without_gradients(),
            high: self.high.without_gradients(),
            nesting: self.nesting.clone(),
        }
    }

    /// Multi-fidelity view of one gradient component, for the separate-model
    /// gradient baseline.
    pub fn gradient_component_as_values(&self, component: usize) -> Result<Self> {
        Ok(Self {
            low: self.low.gradient_component_as_values(component)?,
            high: self.high.gradient_component_as_values(component)?,
            nesting: self.nesting.clone(),
        })
    }
}
