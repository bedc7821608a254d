//! Conditional histogram over the label range.
//!
//! Bins are centered on evenly spaced points from 1 to `K`; with
//! `n_bins = K` each bin is exactly one label, with `n_bins = 2K - 1` the
//! bins sit at half-label resolution.

use serde::{Deserialize, Serialize};

use crate::domain::RatingScale;
use crate::error::{Error, Result};

use super::loss::{log_softmax, softmax, SoftmaxCrossEntropy};
use super::{Design, Mlp, TrainConfig};

pub const DEFAULT_BINS: usize = 9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistDensityModel {
    pub net: Mlp,
    pub centers: Vec<f64>,
}

pub fn bin_centers(scale: &RatingScale, n_bins: usize) -> Vec<f64> {
    let lo = RatingScale::MIN_LABEL as f64;
    let step = scale.max_width() / (n_bins - 1) as f64;
    (0..n_bins).map(|i| lo + i as f64 * step).collect()
}

/// Nearest bin center; ties go to the lower bin.
pub fn nearest_bin(centers: &[f64], y: f64) -> usize {
    let lo = centers[0];
    let step = centers[1] - lo;
    let k = ((y - lo) / step - 0.5).ceil();
    k.clamp(0.0, (centers.len() - 1) as f64) as usize
}

impl HistDensityModel {
    pub fn from_parts(net: Mlp, centers: Vec<f64>) -> Result<Self> {
        if net.output_dim() != centers.len() {
            return Err(Error::Config(
                "bin count does not match network outputs".into(),
            ));
        }
        Ok(Self { net, centers })
    }

    pub fn n_bins(&self) -> usize {
        self.centers.len()
    }

    pub fn bin_of(&self, y: f64) -> usize {
        nearest_bin(&self.centers, y)
    }

    pub fn probs(&self, x: &[f64]) -> Vec<f64> {
        softmax(&self.net.forward(x))
    }

    pub fn log_probs(&self, x: &[f64]) -> Vec<f64> {
        log_softmax(&self.net.forward(x))
    }

    /// Mean held-out negative log-likelihood of the binned targets.
    pub fn log_loss(&self, data: &Design) -> f64 {
        data.x
            .iter()
            .zip(&data.y)
            .map(|(x, y)| -self.log_probs(x)[self.bin_of(*y)])
            .sum::<f64>()
            / data.len() as f64
    }
}

pub fn fit_hist_density(
    data: &Design,
    scale: &RatingScale,
    n_bins: usize,
    cfg: &TrainConfig,
) -> Result<HistDensityModel> {
    data.require_nonempty()?;
    if n_bins < scale.levels() {
        return Err(Error::Config(format!(
            "histogram needs at least {} bins, got {n_bins}",
            scale.levels()
        )));
    }
    let centers = bin_centers(scale, n_bins);
    let rows = data.rows();
    let mut net = Mlp::new(&cfg.layer_sizes(data.dim(), n_bins), cfg.seed);
    net.fit_standardizer(&rows);
    let targets: Vec<f64> = data
        .y
        .iter()
        .map(|y| nearest_bin(&centers, *y) as f64)
        .collect();
    net.train(&rows, &targets, &SoftmaxCrossEntropy, cfg);
    Ok(HistDensityModel { net, centers })
}
