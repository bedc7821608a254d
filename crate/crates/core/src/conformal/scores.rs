//! Nonconformity scores and the interval each one induces at a threshold.
//!
//! A [`Nonconformity`] turns a fitted learner into two operations: scoring a
//! labeled calibration point, and inverting a calibrated threshold into an
//! interval for a new input. Two-sided scores (asymmetric CQR) carry one
//! score and one threshold per side.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::domain::{Interval, RatingScale};
use crate::learners::{GridClassifier, HistDensityModel, PointVarModel, QuantileModel};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Score {
    One(f64),
    Two { lo: f64, hi: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Threshold {
    One(f64),
    Two { lo: f64, hi: f64 },
}

impl Threshold {
    pub fn one(&self) -> f64 {
        match self {
            Threshold::One(t) => *t,
            Threshold::Two { lo, hi } => lo.max(*hi),
        }
    }

    pub fn two(&self) -> (f64, f64) {
        match self {
            Threshold::One(t) => (*t, *t),
            Threshold::Two { lo, hi } => (*lo, *hi),
        }
    }
}

pub trait Nonconformity: Send + Sync {
    fn score(&self, x: &[f64], y: f64) -> Score;

    /// Raw interval for `x` at threshold `t`, before clamping to the scale.
    fn interval(&self, x: &[f64], t: &Threshold) -> Interval;

    /// Point estimate reported alongside the interval.
    fn point(&self, x: &[f64]) -> f64;
}

/// A point predictor with a local spread.
pub trait MeanScale: Send + Sync {
    fn mean(&self, x: &[f64]) -> f64;
    fn scale(&self, x: &[f64]) -> f64;
}

impl MeanScale for PointVarModel {
    fn mean(&self, x: &[f64]) -> f64 {
        self.predict_mean(x)
    }

    fn scale(&self, x: &[f64]) -> f64 {
        self.predict_scale(x)
    }
}

impl<T: MeanScale + ?Sized> MeanScale for Arc<T> {
    fn mean(&self, x: &[f64]) -> f64 {
        (**self).mean(x)
    }

    fn scale(&self, x: &[f64]) -> f64 {
        (**self).scale(x)
    }
}

/// Lower and upper conditional quantile estimates.
pub trait QuantilePair: Send + Sync {
    fn bounds(&self, x: &[f64]) -> (f64, f64);
}

impl QuantilePair for QuantileModel {
    fn bounds(&self, x: &[f64]) -> (f64, f64) {
        let q = self.predict(x);
        (q[0], q[q.len() - 1])
    }
}

impl<T: QuantilePair + ?Sized> QuantilePair for Arc<T> {
    fn bounds(&self, x: &[f64]) -> (f64, f64) {
        (**self).bounds(x)
    }
}

/// A predicted distribution over a finite, ordered set of support points.
pub trait DiscreteDensity: Send + Sync {
    fn support(&self) -> &[f64];
    fn log_probs(&self, x: &[f64]) -> Vec<f64>;
    /// Support index that a label is scored at.
    fn locate(&self, y: f64) -> usize;
}

impl<T: DiscreteDensity + ?Sized> DiscreteDensity for Arc<T> {
    fn support(&self) -> &[f64] {
        (**self).support()
    }

    fn log_probs(&self, x: &[f64]) -> Vec<f64> {
        (**self).log_probs(x)
    }

    fn locate(&self, y: f64) -> usize {
        (**self).locate(y)
    }
}

/// A grid classifier with its support points materialized.
pub struct GridDensity {
    pub model: GridClassifier,
    support: Vec<f64>,
}

impl GridDensity {
    pub fn new(model: GridClassifier) -> Self {
        let support = (0..model.grid.n_points)
            .map(|i| model.grid.value(i))
            .collect();
        Self { model, support }
    }
}

impl DiscreteDensity for GridDensity {
    fn support(&self) -> &[f64] {
        &self.support
    }

    fn log_probs(&self, x: &[f64]) -> Vec<f64> {
        self.model.log_probs(x)
    }

    fn locate(&self, y: f64) -> usize {
        self.model.grid.nearest_index(y)
    }
}

impl DiscreteDensity for HistDensityModel {
    fn support(&self) -> &[f64] {
        &self.centers
    }

    fn log_probs(&self, x: &[f64]) -> Vec<f64> {
        HistDensityModel::log_probs(self, x)
    }

    fn locate(&self, y: f64) -> usize {
        self.bin_of(y)
    }
}

/// `|y - f(x)|`, interval `f(x) ± t`. With `normalized`, the residual is
/// divided by the local spread and the interval is `f(x) ± t·s(x)`.
pub struct ResidualScore<M> {
    pub model: M,
    pub normalized: bool,
}

impl<M: MeanScale> Nonconformity for ResidualScore<M> {
    fn score(&self, x: &[f64], y: f64) -> Score {
        let r = (y - self.model.mean(x)).abs();
        Score::One(if self.normalized {
            r / self.model.scale(x)
        } else {
            r
        })
    }

    fn interval(&self, x: &[f64], t: &Threshold) -> Interval {
        let m = self.model.mean(x);
        let half = if self.normalized {
            t.one() * self.model.scale(x)
        } else {
            t.one()
        };
        Interval::new(m - half, m + half)
    }

    fn point(&self, x: &[f64]) -> f64 {
        self.model.mean(x)
    }
}

/// Conformalized quantile regression, symmetric or per-side.
pub struct QuantileScore<Q> {
    pub model: Q,
    pub asymmetric: bool,
}

impl<Q: QuantilePair> Nonconformity for QuantileScore<Q> {
    fn score(&self, x: &[f64], y: f64) -> Score {
        let (lo, hi) = self.model.bounds(x);
        if self.asymmetric {
            Score::Two {
                lo: lo - y,
                hi: y - hi,
            }
        } else {
            Score::One((lo - y).max(y - hi))
        }
    }

    fn interval(&self, x: &[f64], t: &Threshold) -> Interval {
        let (lo, hi) = self.model.bounds(x);
        let (tl, th) = if self.asymmetric {
            t.two()
        } else {
            (t.one(), t.one())
        };
        let (a, b) = (lo - tl, hi + th);
        if a <= b {
            Interval::new(a, b)
        } else {
            // a negative correction can cross the endpoints; keep a point interval
            let mid = 0.5 * (a + b);
            Interval::new(mid, mid)
        }
    }

    fn point(&self, x: &[f64]) -> f64 {
        let (lo, hi) = self.model.bounds(x);
        0.5 * (lo + hi)
    }
}

/// Negative log-density at the label; interval is the hull of all support
/// points whose negative log-density is within the threshold.
pub struct DensityScore<D> {
    pub model: D,
    pub scale: RatingScale,
}

impl<D: DiscreteDensity> DensityScore<D> {
    /// Indices of support points with `-log p <= t`.
    pub fn qualifying(&self, x: &[f64], t: f64) -> Vec<usize> {
        self.model
            .log_probs(x)
            .iter()
            .enumerate()
            .filter(|(_, lp)| -**lp <= t)
            .map(|(i, _)| i)
            .collect()
    }
}

impl<D: DiscreteDensity> Nonconformity for DensityScore<D> {
    fn score(&self, x: &[f64], y: f64) -> Score {
        Score::One(-self.model.log_probs(x)[self.model.locate(y)])
    }

    fn interval(&self, x: &[f64], t: &Threshold) -> Interval {
        let q = self.qualifying(x, t.one());
        let support = self.model.support();
        match (q.first(), q.last()) {
            (Some(a), Some(b)) => Interval::new(support[*a], support[*b]),
            _ => self.scale.full_interval(),
        }
    }

    fn point(&self, x: &[f64]) -> f64 {
        let support = self.model.support();
        self.model
            .log_probs(x)
            .iter()
            .zip(support)
            .map(|(lp, v)| lp.exp() * v)
            .sum()
    }
}

/// Contiguous ordinal prediction sets grown greedily from the mode.
///
/// Starting at the most probable label, the set repeatedly absorbs whichever
/// neighbor (left or right) is more probable, ties going left. A label's
/// score is the cumulative mass at the moment it joins the set.
pub struct OrdinalApsScore<D> {
    pub model: D,
}

/// Labels (as support indices) in the order the greedy growth adds them,
/// with the cumulative mass after each addition.
pub fn ordinal_growth(probs: &[f64]) -> Vec<(usize, f64)> {
    let n = probs.len();
    let mut mode = 0;
    for (i, p) in probs.iter().enumerate() {
        if *p > probs[mode] {
            mode = i;
        }
    }
    let (mut lo, mut hi) = (mode, mode);
    let mut cum = probs[mode];
    let mut order = vec![(mode, cum)];
    while order.len() < n {
        let left = (lo > 0).then(|| probs[lo - 1]);
        let right = (hi + 1 < n).then(|| probs[hi + 1]);
        let take_left = match (left, right) {
            (Some(l), Some(r)) => l >= r,
            (Some(_), None) => true,
            _ => false,
        };
        let idx = if take_left {
            lo -= 1;
            lo
        } else {
            hi += 1;
            hi
        };
        cum += probs[idx];
        order.push((idx, cum));
    }
    order
}

impl<D: DiscreteDensity> OrdinalApsScore<D> {
    fn probs(&self, x: &[f64]) -> Vec<f64> {
        self.model.log_probs(x).into_iter().map(f64::exp).collect()
    }

    /// Support indices in the set at threshold `t`.
    pub fn set(&self, x: &[f64], t: f64) -> Vec<usize> {
        let growth = ordinal_growth(&self.probs(x));
        let stop = growth
            .iter()
            .position(|(_, cum)| *cum >= t)
            .unwrap_or(growth.len() - 1);
        growth[..=stop].iter().map(|(i, _)| *i).collect()
    }
}

impl<D: DiscreteDensity> Nonconformity for OrdinalApsScore<D> {
    fn score(&self, x: &[f64], y: f64) -> Score {
        let target = self.model.locate(y);
        let growth = ordinal_growth(&self.probs(x));
        let cum = growth
            .iter()
            .find(|(i, _)| *i == target)
            .map(|(_, c)| *c)
            .unwrap_or(f64::INFINITY);
        Score::One(cum)
    }

    fn interval(&self, x: &[f64], t: &Threshold) -> Interval {
        let set = self.set(x, t.one());
        let support = self.model.support();
        let a = set.iter().min().unwrap();
        let b = set.iter().max().unwrap();
        Interval::new(support[*a], support[*b])
    }

    fn point(&self, x: &[f64]) -> f64 {
        self.probs(x)
            .iter()
            .zip(self.model.support())
            .map(|(p, v)| p * v)
            .sum()
    }
}
