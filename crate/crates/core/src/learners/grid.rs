//! Regression recast as classification over a fine grid of score values.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::loss::{log_softmax, softmax, SoftmaxCrossEntropy};
use super::{Design, Mlp, TrainConfig};

/// Evenly spaced score grid `lo, lo + resolution, ..., hi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridConfig {
    pub lo: f64,
    pub hi: f64,
    pub resolution: f64,
    pub n_points: usize,
}

impl Default for GridConfig {
    /// 41 points over `[0.5, 5.5]` at 0.125 spacing.
    fn default() -> Self {
        Self {
            lo: 0.5,
            hi: 5.5,
            resolution: 0.125,
            n_points: 41,
        }
    }
}

impl GridConfig {
    pub fn new(lo: f64, hi: f64, resolution: f64) -> Result<Self> {
        if !(resolution > 0.0 && hi > lo) {
            return Err(Error::Config(format!(
                "bad grid [{lo}, {hi}] step {resolution}"
            )));
        }
        let steps = (hi - lo) / resolution;
        if (steps - steps.round()).abs() > 1e-9 {
            return Err(Error::Config(format!(
                "grid span {} is not a multiple of {resolution}",
                hi - lo
            )));
        }
        Ok(Self {
            lo,
            hi,
            resolution,
            n_points: steps.round() as usize + 1,
        })
    }

    /// Grid covering `[0.5, K + 0.5]` at the given resolution.
    pub fn for_scale(k_max: i32, resolution: f64) -> Result<Self> {
        Self::new(0.5, k_max as f64 + 0.5, resolution)
    }

    pub fn value(&self, i: usize) -> f64 {
        self.lo + i as f64 * self.resolution
    }

    pub fn contains(&self, y: f64) -> bool {
        y >= self.lo - 1e-12 && y <= self.hi + 1e-12
    }

    /// Index of the grid point nearest `y`; exact midpoints go to the lower point.
    pub fn nearest_index(&self, y: f64) -> usize {
        let t = (y - self.lo) / self.resolution;
        let k = (t - 0.5).ceil();
        k.clamp(0.0, (self.n_points - 1) as f64) as usize
    }
}

/// Softmax network over grid points: an estimate of `p(y | x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridClassifier {
    pub net: Mlp,
    pub grid: GridConfig,
}

impl GridClassifier {
    pub fn from_parts(net: Mlp, grid: GridConfig) -> Result<Self> {
        if net.output_dim() != grid.n_points {
            return Err(Error::Config(format!(
                "network has {} outputs for a {}-point grid",
                net.output_dim(),
                grid.n_points
            )));
        }
        Ok(Self { net, grid })
    }

    pub fn probs(&self, x: &[f64]) -> Vec<f64> {
        softmax(&self.net.forward(x))
    }

    pub fn log_probs(&self, x: &[f64]) -> Vec<f64> {
        log_softmax(&self.net.forward(x))
    }

    /// `log p(y | x)` at the grid point nearest `y`.
    pub fn grid_log_density(&self, x: &[f64], y: f64) -> Result<f64> {
        if !self.grid.contains(y) {
            return Err(Error::OutsideGrid {
                y,
                lo: self.grid.lo,
                hi: self.grid.hi,
            });
        }
        Ok(self.log_probs(x)[self.grid.nearest_index(y)])
    }
}

/// Cross-entropy fit against the nearest-grid-point label of each target.
pub fn fit_grid_classifier(
    data: &Design,
    grid: GridConfig,
    cfg: &TrainConfig,
) -> Result<GridClassifier> {
    data.require_nonempty()?;
    if let Some(y) = data.y.iter().find(|y| !grid.contains(**y)) {
        return Err(Error::OutsideGrid {
            y: *y,
            lo: grid.lo,
            hi: grid.hi,
        });
    }
    let rows = data.rows();
    let targets: Vec<f64> = data
        .y
        .iter()
        .map(|y| grid.nearest_index(*y) as f64)
        .collect();
    let mut net = Mlp::new(&cfg.layer_sizes(data.dim(), grid.n_points), cfg.seed);
    net.fit_standardizer(&rows);
    net.train(&rows, &targets, &SoftmaxCrossEntropy, cfg);
    Ok(GridClassifier { net, grid })
}
