//! Split conformal interval construction.
//!
//! Every method follows the same recipe. The calibration set is cut in two:
//! the first half trains the method's learner, the second half is scored to
//! produce a threshold. Test inputs then get the interval that threshold
//! induces, clamped to the rating range and optionally snapped to labels.

pub mod adjust;
pub mod fit;
pub mod mondrian;
pub mod quantile;
pub mod scores;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::domain::{clamp_interval, Interval, LabeledSample, RatingScale};
use crate::error::{Error, Result};
use crate::learners::{BoostConfig, Design, GridConfig, TrainConfig, DEFAULT_SCALE_FLOOR};

pub use adjust::{boundary_adjust, AdjustDirection};
pub use fit::Learners;
pub use mondrian::{run_mondrian, GroupPartition};
pub use quantile::{conformal_quantile, conformal_rank};
pub use scores::{Nonconformity, Score, Threshold};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    NaiveSplit,
    Cqr,
    CqrAsym,
    Chr,
    Lvd,
    BoostedCqr,
    BoostedLcp,
    R2ccp,
    OrdinalAps,
}

impl Method {
    pub const ALL: [Method; 9] = [
        Method::NaiveSplit,
        Method::Cqr,
        Method::CqrAsym,
        Method::Chr,
        Method::Lvd,
        Method::BoostedCqr,
        Method::BoostedLcp,
        Method::R2ccp,
        Method::OrdinalAps,
    ];

    pub fn id(&self) -> &'static str {
        match self {
            Method::NaiveSplit => "naive_split",
            Method::Cqr => "cqr",
            Method::CqrAsym => "cqr_asym",
            Method::Chr => "chr",
            Method::Lvd => "lvd",
            Method::BoostedCqr => "boosted_cqr",
            Method::BoostedLcp => "boosted_lcp",
            Method::R2ccp => "r2ccp",
            Method::OrdinalAps => "ordinal_aps",
        }
    }

    /// Methods whose output is a label set rather than a continuous interval.
    pub fn is_set_valued(&self) -> bool {
        matches!(self, Method::OrdinalAps)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.id() == s)
            .ok_or_else(|| Error::Config(format!("unknown method {s:?}")))
    }
}

/// Parse a comma-separated method list; `all` selects every method.
pub fn parse_methods(list: &str) -> Result<Vec<Method>> {
    if list.trim() == "all" {
        return Ok(Method::ALL.to_vec());
    }
    list.split(',').map(|s| s.trim().parse()).collect()
}

/// Where the naive split method takes its point prediction from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PointSource {
    /// A mean regressor trained on the features.
    #[default]
    Learned,
    /// The judge's most probable label.
    JudgeArgmax,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MethodConfig {
    pub train: TrainConfig,
    pub grid: GridConfig,
    pub chr_bins: usize,
    pub boost: BoostConfig,
    pub scale_floor: f64,
    pub point_source: PointSource,
    pub adjust: AdjustDirection,
    /// Smallest conformal-portion count a Mondrian group may have.
    pub min_group: usize,
}

impl Default for MethodConfig {
    fn default() -> Self {
        Self {
            train: TrainConfig::default(),
            grid: GridConfig::default(),
            chr_bins: crate::learners::hist::DEFAULT_BINS,
            boost: BoostConfig::default(),
            scale_floor: DEFAULT_SCALE_FLOOR,
            point_source: PointSource::default(),
            adjust: AdjustDirection::default(),
            min_group: 50,
        }
    }
}

/// One test-time output: the clamped (and possibly label-aligned) interval
/// and the method's point estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub interval: Interval,
    pub y_hat: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QHat {
    Global(Threshold),
    PerGroup(BTreeMap<String, Threshold>),
}

/// A calibrated method, ready to produce intervals. Immutable once built.
#[derive(Clone)]
pub struct ConformalCalibration {
    pub method: Method,
    pub alpha: f64,
    pub q_hat: QHat,
    pub model: Arc<dyn Nonconformity>,
    pub scale: RatingScale,
    pub adjust: AdjustDirection,
}

impl fmt::Debug for ConformalCalibration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ConformalCalibration")
            .field("method", &self.method)
            .field("alpha", &self.alpha)
            .field("q_hat", &self.q_hat)
            .finish_non_exhaustive()
    }
}

impl ConformalCalibration {
    fn emit(&self, x: &[f64], t: &Threshold) -> Prediction {
        let raw = self.model.interval(x, t);
        let clamped = clamp_interval(raw, &self.scale);
        let lo = RatingScale::MIN_LABEL as f64;
        let hi = self.scale.k_max() as f64;
        Prediction {
            interval: boundary_adjust(clamped, &self.scale, self.adjust),
            y_hat: self.model.point(x).clamp(lo, hi),
        }
    }

    /// Interval for `x` under a global calibration.
    pub fn predict(&self, x: &[f64]) -> Result<Prediction> {
        match &self.q_hat {
            QHat::Global(t) => Ok(self.emit(x, t)),
            QHat::PerGroup(_) => Err(Error::Config(format!(
                "{} was calibrated per group; a group label is required",
                self.method
            ))),
        }
    }

    /// Interval for `x` using its group's threshold when calibrated per group.
    pub fn predict_in_group(&self, x: &[f64], group: &str) -> Result<Prediction> {
        match &self.q_hat {
            QHat::Global(t) => Ok(self.emit(x, t)),
            QHat::PerGroup(map) => map
                .get(group)
                .map(|t| self.emit(x, t))
                .ok_or_else(|| Error::Data(format!("group {group:?} has no calibration"))),
        }
    }
}

/// Threshold from a batch of conformal scores. Two-sided scores get a
/// quantile per side at `alpha / 2` each.
pub fn calibrate_threshold(scores: &[Score], alpha: f64) -> Result<Threshold> {
    match scores.first() {
        None => Err(Error::Empty("conformal scores")),
        Some(Score::One(_)) => {
            let s: Vec<f64> = scores
                .iter()
                .map(|s| match s {
                    Score::One(v) => *v,
                    Score::Two { lo, hi } => lo.max(*hi),
                })
                .collect();
            Ok(Threshold::One(conformal_quantile(&s, alpha)?))
        }
        Some(Score::Two { .. }) => {
            let (lo, hi): (Vec<f64>, Vec<f64>) = scores
                .iter()
                .map(|s| match s {
                    Score::Two { lo, hi } => (*lo, *hi),
                    Score::One(v) => (*v, *v),
                })
                .unzip();
            Ok(Threshold::Two {
                lo: conformal_quantile(&lo, alpha / 2.0)?,
                hi: conformal_quantile(&hi, alpha / 2.0)?,
            })
        }
    }
}

pub fn score_all(model: &dyn Nonconformity, data: &Design) -> Vec<Score> {
    data.x
        .iter()
        .zip(&data.y)
        .map(|(x, y)| model.score(x, *y))
        .collect()
}

/// The calibration set cut into learner-training and conformal portions:
/// the first `floor(n / 2)` samples train, the rest calibrate.
pub fn split_calibration<T: Clone>(cal: &[T]) -> Result<(Vec<T>, Vec<T>)> {
    if cal.len() < 2 {
        return Err(Error::Data(format!(
            "calibration set of {} cannot be split into training and conformal parts",
            cal.len()
        )));
    }
    let (a, b) = cal.split_at(cal.len() / 2);
    Ok((a.to_vec(), b.to_vec()))
}

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::Config(format!("alpha {alpha} outside (0, 1)")))
    }
}

/// Calibrate `method` globally against a conformal portion, with learners
/// already bound to the training portion.
pub fn calibrate(
    method: Method,
    learners: &Learners,
    conformal: &Design,
) -> Result<ConformalCalibration> {
    check_alpha(learners.alpha)?;
    let model = learners.nonconformity(method)?;
    let t = calibrate_threshold(&score_all(model.as_ref(), conformal), learners.alpha)?;
    Ok(ConformalCalibration {
        method,
        alpha: learners.alpha,
        q_hat: QHat::Global(t),
        model,
        scale: learners.scale,
        adjust: learners.config.adjust,
    })
}

/// Calibrate on `cal` and predict every `test` sample.
pub fn run_method(
    method: Method,
    cal: &[LabeledSample],
    test: &[LabeledSample],
    alpha: f64,
    scale: RatingScale,
    config: &MethodConfig,
) -> Result<Vec<Prediction>> {
    check_alpha(alpha)?;
    let (train, conf) = split_calibration(cal)?;
    let train = Design::from_samples(&train);
    let conf = Design::from_samples(&conf);
    let learners = Learners::new(&train, scale, alpha, config);
    let calib = calibrate(method, &learners, &conf)?;
    test.iter()
        .map(|s| calib.predict(s.features.as_slice()))
        .collect()
}

pub fn run_naive_split(
    cal: &[LabeledSample],
    test: &[LabeledSample],
    alpha: f64,
    scale: RatingScale,
    config: &MethodConfig,
) -> Result<Vec<Prediction>> {
    run_method(Method::NaiveSplit, cal, test, alpha, scale, config)
}

pub fn run_cqr(
    cal: &[LabeledSample],
    test: &[LabeledSample],
    alpha: f64,
    symmetric: bool,
    scale: RatingScale,
    config: &MethodConfig,
) -> Result<Vec<Prediction>> {
    let m = if symmetric {
        Method::Cqr
    } else {
        Method::CqrAsym
    };
    run_method(m, cal, test, alpha, scale, config)
}

pub fn run_chr(
    cal: &[LabeledSample],
    test: &[LabeledSample],
    alpha: f64,
    scale: RatingScale,
    config: &MethodConfig,
) -> Result<Vec<Prediction>> {
    run_method(Method::Chr, cal, test, alpha, scale, config)
}

pub fn run_lvd(
    cal: &[LabeledSample],
    test: &[LabeledSample],
    alpha: f64,
    scale: RatingScale,
    config: &MethodConfig,
) -> Result<Vec<Prediction>> {
    run_method(Method::Lvd, cal, test, alpha, scale, config)
}

pub fn run_r2ccp(
    cal: &[LabeledSample],
    test: &[LabeledSample],
    alpha: f64,
    scale: RatingScale,
    config: &MethodConfig,
) -> Result<Vec<Prediction>> {
    run_method(Method::R2ccp, cal, test, alpha, scale, config)
}

pub fn run_ordinal_aps(
    cal: &[LabeledSample],
    test: &[LabeledSample],
    alpha: f64,
    scale: RatingScale,
    config: &MethodConfig,
) -> Result<Vec<Prediction>> {
    run_method(Method::OrdinalAps, cal, test, alpha, scale, config)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoostVariant {
    Cqr,
    Lcp,
}

pub fn run_boosted(
    cal: &[LabeledSample],
    test: &[LabeledSample],
    alpha: f64,
    variant: BoostVariant,
    scale: RatingScale,
    config: &MethodConfig,
) -> Result<Vec<Prediction>> {
    let m = match variant {
        BoostVariant::Cqr => Method::BoostedCqr,
        BoostVariant::Lcp => Method::BoostedLcp,
    };
    run_method(m, cal, test, alpha, scale, config)
}
