//! Scalar regression networks and the pinball-loss quantile model.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::loss::{OutputLoss, Pinball, SquaredError};
use super::{Design, Mlp, TrainConfig};

/// A scalar-output network trained on standardized targets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionNet {
    pub net: Mlp,
    pub target_shift: f64,
    pub target_scale: f64,
}

impl RegressionNet {
    pub(crate) fn fit(data: &Design, loss: &dyn OutputLoss, cfg: &TrainConfig) -> Result<Self> {
        data.require_nonempty()?;
        let n = data.len() as f64;
        let mean = data.y.iter().sum::<f64>() / n;
        let sd = (data.y.iter().map(|y| (y - mean).powi(2)).sum::<f64>() / n).sqrt();
        let scale = if sd > 1e-12 { sd } else { 1.0 };
        let targets: Vec<f64> = data.y.iter().map(|y| (y - mean) / scale).collect();
        let rows = data.rows();
        let mut net = Mlp::new(&cfg.layer_sizes(data.dim(), 1), cfg.seed);
        net.fit_standardizer(&rows);
        net.train(&rows, &targets, loss, cfg);
        Ok(Self {
            net,
            target_shift: mean,
            target_scale: scale,
        })
    }

    pub fn predict(&self, x: &[f64]) -> f64 {
        self.target_shift + self.target_scale * self.net.forward(x)[0]
    }
}

/// Mean regression by squared error.
pub fn fit_mean(data: &Design, cfg: &TrainConfig) -> Result<RegressionNet> {
    RegressionNet::fit(data, &SquaredError, cfg)
}

/// Conditional `tau`-quantile by mean pinball loss.
pub fn fit_quantile(data: &Design, tau: f64, cfg: &TrainConfig) -> Result<RegressionNet> {
    if !(tau > 0.0 && tau < 1.0) {
        return Err(Error::Config(format!(
            "quantile level {tau} outside (0, 1)"
        )));
    }
    RegressionNet::fit(data, &Pinball { tau }, cfg)
}

/// One regressor per quantile level. Predictions are sorted so they never cross.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantileModel {
    pub taus: Vec<f64>,
    pub nets: Vec<RegressionNet>,
}

impl QuantileModel {
    pub fn fit(data: &Design, taus: &[f64], cfg: &TrainConfig) -> Result<Self> {
        let mut levels = taus.to_vec();
        levels.sort_by(f64::total_cmp);
        let nets = levels
            .iter()
            .map(|t| fit_quantile(data, *t, cfg))
            .collect::<Result<_>>()?;
        Ok(Self { taus: levels, nets })
    }

    pub fn predict(&self, x: &[f64]) -> Vec<f64> {
        let mut q: Vec<f64> = self.nets.iter().map(|n| n.predict(x)).collect();
        q.sort_by(f64::total_cmp);
        q
    }
}
