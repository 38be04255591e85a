use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `|q|` at or above this is accepted but flagged as badly conditioned.
pub const HIGH_CONDITION_Q: f64 = 0.95;

pub fn is_high_condition(q: f64) -> bool {
    q.abs() >= HIGH_CONDITION_Q
}

/// Pass thresholds for identity residuals and inequality slacks.
/// Eigen-residual tolerance lives on [`crate::linalg::EigenSolver`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    pub identity: f64,
    pub inequality: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            identity: 1e-10,
            inequality: 1e-9,
        }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("identity", self.identity), ("inequality", self.inequality)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid(format!(
                    "{name} tolerance must be positive, got {v}"
                )));
            }
        }
        Ok(())
    }
}
