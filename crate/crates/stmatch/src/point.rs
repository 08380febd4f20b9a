use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One detected space-time interest point: where and when it was found, how
/// confident the detector was, and an appearance descriptor of the local
/// space-time volume.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpaceTimePoint {
    /// Temporal coordinate in frames.
    pub frame: u32,
    /// Horizontal position in pixels.
    pub x: f64,
    /// Vertical position in pixels.
    pub y: f64,
    /// Detector confidence, unitless.
    pub saliency: f64,
    /// Appearance descriptor.
    pub features: Vec<f64>,
}

impl SpaceTimePoint {
    pub fn new(frame: u32, x: f64, y: f64, saliency: f64, features: Vec<f64>) -> Self {
        Self { frame, x, y, saliency, features }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite()
            && self.y.is_finite()
            && self.saliency.is_finite()
            && self.features.iter().all(|v| v.is_finite())
    }
}

/// Validates a raw point list: non-empty, uniform feature dimension, finite
/// values. Returns the feature dimension.
pub(crate) fn check_points(points: &[SpaceTimePoint]) -> Result<usize> {
    let first = points.first().ok_or(Error::EmptyPointSet)?;
    let dim = first.features.len();
    if dim == 0 {
        return Err(Error::InvalidParams("feature dimension must be at least 1".into()));
    }
    for p in points {
        if p.features.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: p.features.len() });
        }
        if !p.is_finite() {
            return Err(Error::NonFiniteValue);
        }
    }
    Ok(dim)
}
