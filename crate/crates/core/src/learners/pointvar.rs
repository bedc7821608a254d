//! Mean regressor with a local spread head.
//!
//! The mean head minimizes squared error. The spread head is then fit to the
//! absolute residuals of the frozen mean head, through
//! `floor + softplus(z)` so the spread never drops below the floor.

use serde::{Deserialize, Serialize};

use crate::error::Result;

use super::loss::{softplus, softplus_inv, SoftplusSquared};
use super::quantile::{fit_mean, RegressionNet};
use super::{Design, Mlp, TrainConfig};

pub const DEFAULT_SCALE_FLOOR: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaleNet {
    pub net: Mlp,
    pub floor: f64,
}

impl ScaleNet {
    pub fn predict(&self, x: &[f64]) -> f64 {
        self.floor + softplus(self.net.forward(x)[0])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointVarModel {
    pub mean: RegressionNet,
    pub scale: ScaleNet,
}

impl PointVarModel {
    pub fn predict_mean(&self, x: &[f64]) -> f64 {
        self.mean.predict(x)
    }

    pub fn predict_scale(&self, x: &[f64]) -> f64 {
        self.scale.predict(x)
    }

    pub fn residuals(&self, data: &Design) -> Vec<f64> {
        data.x
            .iter()
            .zip(&data.y)
            .map(|(x, y)| (y - self.predict_mean(x)).abs())
            .collect()
    }
}

pub fn fit_scale(
    data: &Design,
    abs_residuals: &[f64],
    floor: f64,
    cfg: &TrainConfig,
) -> Result<ScaleNet> {
    let target = Design::new(data.x.clone(), abs_residuals.to_vec())?;
    target.require_nonempty()?;
    let rows = target.rows();
    let mut net = Mlp::new(&cfg.layer_sizes(target.dim(), 1), cfg.seed);
    net.fit_standardizer(&rows);
    let mean_abs = abs_residuals.iter().sum::<f64>() / abs_residuals.len() as f64;
    // start at the homoscedastic answer
    net.set_output_bias(0, softplus_inv((mean_abs - floor).max(1e-6)));
    net.train(&rows, &target.y, &SoftplusSquared { floor }, cfg);
    Ok(ScaleNet { net, floor })
}

pub fn fit_point_var(data: &Design, floor: f64, cfg: &TrainConfig) -> Result<PointVarModel> {
    let mean = fit_mean(data, cfg)?;
    let resid: Vec<f64> = data
        .x
        .iter()
        .zip(&data.y)
        .map(|(x, y)| (y - mean.predict(x)).abs())
        .collect();
    let scale = fit_scale(data, &resid, floor, cfg)?;
    Ok(PointVarModel { mean, scale })
}
