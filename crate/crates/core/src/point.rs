//! Input-space locations.

use serde::{Deserialize, Serialize};

/// Tolerance under which two locations are considered identical, per
/// coordinate.
pub const LOCATION_TOL: f64 = 1e-12;

/// A location in input space: `d` real coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Point(Vec<f64>);

impl Point {
    pub fn new(coords: Vec<f64>) -> Self {
        Point(coords)
    }

    /// Convenience for one-dimensional inputs.
    pub fn scalar(x: f64) -> Self {
        Point(vec![x])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coord(&self, i: usize) -> f64 {
        self.0[i]
    }

    pub fn set_coord(&mut self, i: usize, v: f64) {
        self.0[i] = v;
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    /// True when every coordinate differs by at most [`LOCATION_TOL`].
    pub fn coincides_with(&self, other: &Point) -> bool {
        self.dim() == other.dim()
            && self
                .0
                .iter()
                .zip(&other.0)
                .all(|(a, b)| (a - b).abs() <= LOCATION_TOL)
    }
}

impl From<Vec<f64>> for Point {
    fn from(coords: Vec<f64>) -> Self {
        Point(coords)
    }
}
