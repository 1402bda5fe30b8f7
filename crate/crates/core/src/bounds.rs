//! Certified bound intervals: the representation of every operational
//! quantity that is only accessible through two-sided lemma chains.

use serde::{Deserialize, Serialize};

/// Certified `[lower, upper]` pair in bits with provenance strings
/// naming the route that produced each end.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundInterval {
    pub lower: f64,
    pub upper: f64,
    pub lower_provenance: String,
    pub upper_provenance: String,
}

impl BoundInterval {
    pub fn new(lower: f64, upper: f64, lower_provenance: &str, upper_provenance: &str) -> Self {
        debug_assert!(
            lower <= upper + 1e-9,
            "interval inverted: [{lower}, {upper}]"
        );
        BoundInterval {
            lower,
            upper,
            lower_provenance: lower_provenance.to_string(),
            upper_provenance: upper_provenance.to_string(),
        }
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn contains(&self, v: f64, tol: f64) -> bool {
        v >= self.lower - tol && v <= self.upper + tol
    }
}

/// Smoothing radius in [0, 1]; per-lemma domain checks happen at the
/// call sites that consume it.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SmoothingRadius(pub f64);

impl SmoothingRadius {
    pub fn new(eps: f64) -> crate::error::Result<Self> {
        if !(0.0..=1.0).contains(&eps) {
            return Err(crate::error::QitError::Domain(format!(
                "smoothing radius {eps} outside [0,1]"
            )));
        }
        Ok(SmoothingRadius(eps))
    }
}
