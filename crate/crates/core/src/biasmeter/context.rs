use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Weights below this are dropped from the exponential window.
pub const WEIGHT_FLOOR: f64 = 1e-9;

/// How co-occurrence with a gendered token is weighted by distance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ContextScheme {
    /// Unit weight for every gendered token within `k` positions.
    Fixed { k: usize },
    /// Weight `adjacent_weight · decay^(d−1)` at distance `d`, unbounded
    /// except for the [`WEIGHT_FLOOR`] cut-off.
    Exponential { adjacent_weight: f64, decay: f64 },
}

impl Default for ContextScheme {
    fn default() -> Self {
        ContextScheme::Fixed { k: 10 }
    }
}

impl ContextScheme {
    pub const fn fixed() -> Self {
        ContextScheme::Fixed { k: 10 }
    }

    pub const fn exponential() -> Self {
        ContextScheme::Exponential {
            adjacent_weight: 0.05,
            decay: 0.95,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            ContextScheme::Fixed { k: 0 } => {
                Err(Error::InvalidArgument("fixed window radius must be ≥ 1".into()))
            }
            ContextScheme::Exponential {
                adjacent_weight,
                decay,
            } if !(adjacent_weight > 0.0 && adjacent_weight <= 1.0) || !(decay > 0.0 && decay < 1.0) => {
                Err(Error::InvalidArgument(format!(
                    "exponential scheme needs 0 < adjacent_weight ≤ 1 and 0 < decay < 1, got {adjacent_weight}, {decay}"
                )))
            }
            _ => Ok(()),
        }
    }

    /// Weight of a gendered token at distance `d ≥ 1`, zero past the reach.
    pub fn weight(&self, d: usize) -> f64 {
        match *self {
            ContextScheme::Fixed { k } => {
                if d >= 1 && d <= k {
                    1.0
                } else {
                    0.0
                }
            }
            ContextScheme::Exponential {
                adjacent_weight,
                decay,
            } => {
                if d == 0 {
                    return 0.0;
                }
                let w = adjacent_weight * decay.powi((d - 1) as i32);
                if w >= WEIGHT_FLOOR {
                    w
                } else {
                    0.0
                }
            }
        }
    }

    /// Largest distance with non-zero weight.
    pub fn reach(&self) -> usize {
        match *self {
            ContextScheme::Fixed { k } => k,
            ContextScheme::Exponential { .. } => {
                let mut d = 1;
                while self.weight(d + 1) > 0.0 {
                    d += 1;
                }
                d
            }
        }
    }

    /// `weights[d]` for `d` in `0..=reach`; `weights[0] == 0`.
    pub fn weight_table(&self) -> Vec<f64> {
        (0..=self.reach()).map(|d| self.weight(d)).collect()
    }

    /// Short name used in file names and reports.
    pub fn name(&self) -> &'static str {
        match self {
            ContextScheme::Fixed { .. } => "fixed",
            ContextScheme::Exponential { .. } => "exponential",
        }
    }
}

impl fmt::Display for ContextScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ContextScheme::Fixed { k } => write!(f, "fixed(k={k})"),
            ContextScheme::Exponential {
                adjacent_weight,
                decay,
            } => write!(f, "exponential(w={adjacent_weight}, decay={decay})"),
        }
    }
}
