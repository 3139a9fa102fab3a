use serde::{Deserialize, Serialize};

/// Affine map of outcomes onto [-0.5, 0.5]: `(y - center) / (2 * half_range)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OutcomeScaling {
    pub center: f64,
    pub half_range: f64,
}

impl OutcomeScaling {
    pub const IDENTITY_HALF: OutcomeScaling = OutcomeScaling {
        center: 0.0,
        half_range: 0.5,
    };

    /// Min/max scaling of `y`. Constant outcomes keep a unit-width interval.
    pub fn fit(y: &[f64]) -> OutcomeScaling {
        let min = y.iter().copied().fold(f64::INFINITY, f64::min);
        let max = y.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let half_range = if max > min { (max - min) / 2.0 } else { 0.5 };
        OutcomeScaling {
            center: (max + min) / 2.0,
            half_range,
        }
    }

    pub fn apply(&self, y: f64) -> f64 {
        (y - self.center) / (2.0 * self.half_range)
    }

    pub fn invert(&self, z: f64) -> f64 {
        z * (2.0 * self.half_range) + self.center
    }

    /// Converts a standardized scale (e.g. σ) back to outcome units.
    pub fn invert_scale(&self, s: f64) -> f64 {
        s * 2.0 * self.half_range
    }
}
