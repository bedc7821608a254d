//! Shared domain types: rating scales, feature vectors, labeled samples,
//! intervals and calibration/test splits.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

/// A discrete Likert scale `{1, ..., k_max}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RatingScale {
    k_max: i32,
}

impl RatingScale {
    pub const MIN_LABEL: i32 = 1;

    pub fn new(k_max: i32) -> Result<Self> {
        if k_max < 2 {
            return Err(Error::Config(format!(
                "rating scale needs k_max >= 2, got {k_max}"
            )));
        }
        Ok(Self { k_max })
    }

    /// The five-point scale used throughout the judge benchmarks.
    pub fn likert5() -> Self {
        Self { k_max: 5 }
    }

    pub fn k_max(&self) -> i32 {
        self.k_max
    }

    pub fn min_label(&self) -> i32 {
        Self::MIN_LABEL
    }

    /// Number of levels, `K`.
    pub fn levels(&self) -> usize {
        self.k_max as usize
    }

    /// Largest possible interval width, `K - 1`.
    pub fn max_width(&self) -> f64 {
        (self.k_max - Self::MIN_LABEL) as f64
    }

    pub fn contains(&self, label: i32) -> bool {
        (Self::MIN_LABEL..=self.k_max).contains(&label)
    }

    pub fn labels(&self) -> impl Iterator<Item = i32> {
        Self::MIN_LABEL..=self.k_max
    }

    /// The full-range interval `[1, K]`.
    pub fn full_interval(&self) -> Interval {
        Interval::new(Self::MIN_LABEL as f64, self.k_max as f64)
    }
}

impl Default for RatingScale {
    fn default() -> Self {
        Self::likert5()
    }
}

/// Score-token log-probabilities, `K` per judge, concatenated in judge order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FeatureVector(Vec<f64>);

impl FeatureVector {
    pub fn new(values: Vec<f64>, scale: &RatingScale) -> Result<Self> {
        let k = scale.levels();
        if values.is_empty() || !values.len().is_multiple_of(k) {
            return Err(Error::Data(format!(
                "feature length {} is not a positive multiple of {k}",
                values.len()
            )));
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite() || **v > 0.0) {
            return Err(Error::Data(format!(
                "feature value {bad} is not a finite log-probability"
            )));
        }
        Ok(Self(values))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    /// Label with the largest log-probability in the first judge block.
    /// Ties go to the lower label.
    pub fn argmax_label(&self, scale: &RatingScale) -> i32 {
        let block = &self.0[..scale.levels()];
        let mut best = 0;
        for (i, v) in block.iter().enumerate() {
            if *v > block[best] {
                best = i;
            }
        }
        best as i32 + RatingScale::MIN_LABEL
    }
}

/// One evaluation instance with its human ground truth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledSample {
    pub sample_id: String,
    pub features: FeatureVector,
    pub gt_score: i32,
    pub dataset_tag: String,
    pub judge_tag: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group_tag: Option<String>,
    /// The score the judge actually emitted, when recorded.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub judge_score: Option<i32>,
}

impl LabeledSample {
    pub fn validate(&self, scale: &RatingScale) -> Result<()> {
        if !scale.contains(self.gt_score) {
            return Err(Error::Data(format!(
                "sample {}: gt_score {} outside [1, {}]",
                self.sample_id,
                self.gt_score,
                scale.k_max()
            )));
        }
        if let Some(js) = self.judge_score {
            if !scale.contains(js) {
                return Err(Error::Data(format!(
                    "sample {}: judge_score {js} outside [1, {}]",
                    self.sample_id,
                    scale.k_max()
                )));
            }
        }
        FeatureVector::new(self.features.as_slice().to_vec(), scale).map(|_| ())
    }

    /// The judge's point score: the recorded one, else the feature argmax.
    pub fn point_score(&self, scale: &RatingScale) -> i32 {
        self.judge_score
            .unwrap_or_else(|| self.features.argmax_label(scale))
    }
}

/// A continuous prediction interval with its optional integer-aligned form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lower: f64,
    pub upper: f64,
    pub adj_lower: Option<i32>,
    pub adj_upper: Option<i32>,
}

impl Interval {
    pub fn new(lower: f64, upper: f64) -> Self {
        Self {
            lower,
            upper,
            adj_lower: None,
            adj_upper: None,
        }
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn covers(&self, y: f64) -> bool {
        self.lower <= y && y <= self.upper
    }

    pub fn is_adjusted(&self) -> bool {
        self.adj_lower.is_some() && self.adj_upper.is_some()
    }

    /// Width of the integer-aligned interval; an empty aligned set has width 0.
    pub fn adj_width(&self) -> f64 {
        match (self.adj_lower, self.adj_upper) {
            (Some(l), Some(u)) => (u - l) as f64,
            _ => 0.0,
        }
    }

    pub fn covers_adj(&self, y: i32) -> bool {
        match (self.adj_lower, self.adj_upper) {
            (Some(l), Some(u)) => l <= y && y <= u,
            _ => false,
        }
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lower + self.upper)
    }
}

/// Clip a raw interval to the label range `[1, K]`.
///
/// An interval lying entirely outside the range collapses onto the nearest
/// boundary label.
pub fn clamp_interval(iv: Interval, scale: &RatingScale) -> Interval {
    let lo = RatingScale::MIN_LABEL as f64;
    let hi = scale.k_max() as f64;
    let lower = iv.lower.clamp(lo, hi);
    let upper = iv.upper.clamp(lo, hi);
    Interval {
        lower,
        upper: upper.max(lower),
        ..iv
    }
}

/// Disjoint calibration and test index sets covering `0..n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitPlan {
    pub seed: u64,
    pub cal_fraction: f64,
    pub cal_indices: Vec<usize>,
    pub test_indices: Vec<usize>,
}

/// Calibration-set size: `round(cal_fraction * n)`, halves rounded up.
pub fn cal_count(n: usize, cal_fraction: f64) -> usize {
    (cal_fraction * n as f64 + 0.5).floor() as usize
}

/// Shuffle `0..n` with the seeded generator and cut off the calibration prefix.
pub fn make_split(n: usize, cal_fraction: f64, seed: u64) -> Result<SplitPlan> {
    if n < 2 || !(cal_fraction > 0.0 && cal_fraction < 1.0) {
        return Err(Error::Split { n, cal_fraction });
    }
    let n_cal = cal_count(n, cal_fraction);
    if n_cal == 0 || n_cal == n {
        return Err(Error::Split { n, cal_fraction });
    }
    let mut order: Vec<usize> = (0..n).collect();
    rng::shuffle(&mut rng::seeded(seed), &mut order);
    let test_indices = order.split_off(n_cal);
    Ok(SplitPlan {
        seed,
        cal_fraction,
        cal_indices: order,
        test_indices,
    })
}
