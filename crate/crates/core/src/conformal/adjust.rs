//! Snapping continuous intervals onto integer rating labels.

use serde::{Deserialize, Serialize};

use crate::domain::{Interval, RatingScale};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AdjustDirection {
    /// `[floor(l), ceil(u)]`: never loses a label the raw interval touched.
    #[default]
    Outward,
    /// `[ceil(l), floor(u)]`: exactly the labels inside the raw interval;
    /// may be empty.
    Inward,
    Off,
}

impl std::fmt::Display for AdjustDirection {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Outward => "outward",
            Self::Inward => "inward",
            Self::Off => "off",
        })
    }
}

impl std::str::FromStr for AdjustDirection {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "outward" => Ok(Self::Outward),
            "inward" => Ok(Self::Inward),
            "off" => Ok(Self::Off),
            other => Err(Error::Config(format!("unknown adjustment {other:?}"))),
        }
    }
}

/// Set the integer-aligned endpoints of a clamped interval.
///
/// An inward adjustment that leaves no label produces no aligned endpoints,
/// which counts as an empty label set.
pub fn boundary_adjust(iv: Interval, scale: &RatingScale, direction: AdjustDirection) -> Interval {
    let lo = RatingScale::MIN_LABEL;
    let hi = scale.k_max();
    let (a, b) = match direction {
        AdjustDirection::Off => {
            return Interval {
                adj_lower: None,
                adj_upper: None,
                ..iv
            }
        }
        AdjustDirection::Outward => (
            (iv.lower.floor() as i32).max(lo),
            (iv.upper.ceil() as i32).min(hi),
        ),
        AdjustDirection::Inward => (
            (iv.lower.ceil() as i32).max(lo),
            (iv.upper.floor() as i32).min(hi),
        ),
    };
    if a <= b {
        Interval {
            adj_lower: Some(a),
            adj_upper: Some(b),
            ..iv
        }
    } else {
        Interval {
            adj_lower: None,
            adj_upper: None,
            ..iv
        }
    }
}
