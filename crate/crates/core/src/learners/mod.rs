//! Trainable regression backends behind the conformal methods.
//!
//! Everything here is written from scratch on top of [`mlp::Mlp`] (a small
//! tanh network trained by mini-batch gradient steps) and
//! [`boost::BoostedModel`] (gradient-boosted shallow regression trees).

pub mod boost;
pub mod grid;
pub mod hist;
pub mod loss;
pub mod mlp;
pub mod pointvar;
pub mod quantile;

use serde::{Deserialize, Serialize};

use crate::domain::LabeledSample;
use crate::error::{Error, Result};

pub use boost::{fit_boosted, fit_boosted_with_offset, BoostConfig, BoostLoss, BoostedModel};
pub use grid::{fit_grid_classifier, GridClassifier, GridConfig};
pub use hist::{fit_hist_density, HistDensityModel};
pub use mlp::Mlp;
pub use pointvar::{fit_point_var, PointVarModel, DEFAULT_SCALE_FLOOR};
pub use quantile::{fit_quantile, QuantileModel, RegressionNet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Optimizer {
    Sgd,
    Adam,
}

/// Network shape and optimization budget shared by every network learner.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub hidden: Vec<usize>,
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub optimizer: Optimizer,
    pub weight_decay: f64,
    /// Seeds both weight initialization and mini-batch order.
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            hidden: vec![64, 32],
            epochs: 200,
            batch_size: 128,
            learning_rate: 1e-3,
            optimizer: Optimizer::Adam,
            weight_decay: 0.0,
            seed: 42,
        }
    }
}

impl TrainConfig {
    pub(crate) fn layer_sizes(&self, input: usize, output: usize) -> Vec<usize> {
        let mut sizes = vec![input];
        sizes.extend(self.hidden.iter().copied().filter(|h| *h > 0));
        sizes.push(output);
        sizes
    }
}

/// Features and real-valued targets for one fit.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Design {
    pub x: Vec<Vec<f64>>,
    pub y: Vec<f64>,
}

impl Design {
    pub fn new(x: Vec<Vec<f64>>, y: Vec<f64>) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::LengthMismatch {
                left: x.len(),
                right: y.len(),
            });
        }
        if let Some(first) = x.first() {
            if x.iter().any(|r| r.len() != first.len()) {
                return Err(Error::Data("ragged feature rows".into()));
            }
        }
        Ok(Self { x, y })
    }

    pub fn from_samples<'a>(samples: impl IntoIterator<Item = &'a LabeledSample>) -> Self {
        let (x, y) = samples
            .into_iter()
            .map(|s| (s.features.as_slice().to_vec(), s.gt_score as f64))
            .unzip();
        Self { x, y }
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.x.first().map_or(0, Vec::len)
    }

    pub fn rows(&self) -> Vec<&[f64]> {
        self.x.iter().map(Vec::as_slice).collect()
    }

    pub(crate) fn require_nonempty(&self) -> Result<()> {
        if self.is_empty() {
            Err(Error::EmptyTrainingSet)
        } else {
            Ok(())
        }
    }
}

/// Smallest value whose empirical CDF reaches `tau` (a minimizer of the
/// mean pinball loss over constants).
pub fn lower_quantile(values: &[f64], tau: f64) -> f64 {
    assert!(!values.is_empty());
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    let idx = ((tau * n as f64 - 1e-9).ceil() as usize).clamp(1, n) - 1;
    v[idx]
}
