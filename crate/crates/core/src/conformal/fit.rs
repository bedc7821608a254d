//! Learner fitting shared across methods.
//!
//! Several methods reuse one fitted learner (naive split and LVD share the
//! point/spread model, both CQR variants share the quantile pair, and the
//! boosted variants refine those). [`Learners`] fits each learner at most
//! once per training design.

use std::sync::{Arc, Mutex};

use crate::domain::RatingScale;
use crate::error::Result;
use crate::learners::{
    fit_boosted_with_offset, fit_grid_classifier, fit_hist_density, fit_point_var, BoostLoss,
    BoostedModel, Design, HistDensityModel, PointVarModel, QuantileModel,
};

use super::scores::{
    DensityScore, GridDensity, MeanScale, Nonconformity, OrdinalApsScore, QuantilePair,
    QuantileScore, ResidualScore,
};
use super::{Method, MethodConfig, PointSource};

/// A point/spread model refined by boosting the spread on absolute residuals.
pub struct BoostedSpread {
    pub base: Arc<PointVarModel>,
    pub boost: BoostedModel,
    pub floor: f64,
}

impl MeanScale for BoostedSpread {
    fn mean(&self, x: &[f64]) -> f64 {
        self.base.predict_mean(x)
    }

    fn scale(&self, x: &[f64]) -> f64 {
        self.boost
            .predict_with_offset(x, self.base.predict_scale(x))
            .max(self.floor)
    }
}

/// A quantile pair with each side refined by pinball-loss boosting.
pub struct BoostedQuantiles {
    pub base: Arc<QuantileModel>,
    pub lo: BoostedModel,
    pub hi: BoostedModel,
}

impl QuantilePair for BoostedQuantiles {
    fn bounds(&self, x: &[f64]) -> (f64, f64) {
        let (a, b) = self.base.bounds(x);
        let (a, b) = (
            self.lo.predict_with_offset(x, a),
            self.hi.predict_with_offset(x, b),
        );
        (a.min(b), a.max(b))
    }
}

/// Point prediction read off the judge's own score distribution: the most
/// probable label of the first `K`-wide feature block.
pub struct JudgeArgmax {
    pub levels: usize,
}

impl MeanScale for JudgeArgmax {
    fn mean(&self, x: &[f64]) -> f64 {
        let mut best = 0;
        for (i, v) in x[..self.levels].iter().enumerate() {
            if *v > x[best] {
                best = i;
            }
        }
        (best + 1) as f64
    }

    fn scale(&self, _x: &[f64]) -> f64 {
        1.0
    }
}

type Slot<T> = Mutex<Option<Arc<T>>>;

fn cached<T>(slot: &Slot<T>, fit: impl FnOnce() -> Result<T>) -> Result<Arc<T>> {
    let mut guard = slot.lock().unwrap_or_else(|e| e.into_inner());
    if let Some(m) = guard.as_ref() {
        return Ok(m.clone());
    }
    let m = Arc::new(fit()?);
    *guard = Some(m.clone());
    Ok(m)
}

/// Lazily fitted learners over one training design.
pub struct Learners<'a> {
    pub data: &'a Design,
    pub scale: RatingScale,
    pub alpha: f64,
    pub config: &'a MethodConfig,
    point_var: Slot<PointVarModel>,
    quantiles: Slot<QuantileModel>,
    chr_hist: Slot<HistDensityModel>,
    label_hist: Slot<HistDensityModel>,
    grid: Slot<GridDensity>,
}

impl<'a> Learners<'a> {
    pub fn new(data: &'a Design, scale: RatingScale, alpha: f64, config: &'a MethodConfig) -> Self {
        Self {
            data,
            scale,
            alpha,
            config,
            point_var: Slot::default(),
            quantiles: Slot::default(),
            chr_hist: Slot::default(),
            label_hist: Slot::default(),
            grid: Slot::default(),
        }
    }

    pub fn point_var(&self) -> Result<Arc<PointVarModel>> {
        cached(&self.point_var, || {
            fit_point_var(self.data, self.config.scale_floor, &self.config.train)
        })
    }

    pub fn quantiles(&self) -> Result<Arc<QuantileModel>> {
        let taus = [self.alpha / 2.0, 1.0 - self.alpha / 2.0];
        cached(&self.quantiles, || {
            QuantileModel::fit(self.data, &taus, &self.config.train)
        })
    }

    pub fn chr_hist(&self) -> Result<Arc<HistDensityModel>> {
        cached(&self.chr_hist, || {
            fit_hist_density(
                self.data,
                &self.scale,
                self.config.chr_bins,
                &self.config.train,
            )
        })
    }

    pub fn label_hist(&self) -> Result<Arc<HistDensityModel>> {
        cached(&self.label_hist, || {
            fit_hist_density(
                self.data,
                &self.scale,
                self.scale.levels(),
                &self.config.train,
            )
        })
    }

    pub fn grid(&self) -> Result<Arc<GridDensity>> {
        cached(&self.grid, || {
            fit_grid_classifier(self.data, self.config.grid, &self.config.train)
                .map(GridDensity::new)
        })
    }

    pub fn boosted_spread(&self) -> Result<BoostedSpread> {
        let base = self.point_var()?;
        let abs_resid = base.residuals(self.data);
        let target = Design::new(self.data.x.clone(), abs_resid)?;
        let offsets: Vec<f64> = self.data.x.iter().map(|x| base.predict_scale(x)).collect();
        let boost =
            fit_boosted_with_offset(&target, &offsets, BoostLoss::Absolute, &self.config.boost)?;
        Ok(BoostedSpread {
            base,
            boost,
            floor: self.config.scale_floor,
        })
    }

    pub fn boosted_quantiles(&self) -> Result<BoostedQuantiles> {
        let base = self.quantiles()?;
        let (lo_off, hi_off): (Vec<f64>, Vec<f64>) =
            self.data.x.iter().map(|x| base.bounds(x)).unzip();
        let cfg = &self.config.boost;
        let lo = fit_boosted_with_offset(
            self.data,
            &lo_off,
            BoostLoss::Pinball(self.alpha / 2.0),
            cfg,
        )?;
        let hi = fit_boosted_with_offset(
            self.data,
            &hi_off,
            BoostLoss::Pinball(1.0 - self.alpha / 2.0),
            cfg,
        )?;
        Ok(BoostedQuantiles { base, lo, hi })
    }

    /// The nonconformity score a method calibrates, with its learner fitted.
    pub fn nonconformity(&self, method: Method) -> Result<Arc<dyn Nonconformity>> {
        let scale = self.scale;
        Ok(match method {
            Method::NaiveSplit => match self.config.point_source {
                PointSource::Learned => Arc::new(ResidualScore {
                    model: self.point_var()?,
                    normalized: false,
                }),
                PointSource::JudgeArgmax => Arc::new(ResidualScore {
                    model: JudgeArgmax {
                        levels: scale.levels(),
                    },
                    normalized: false,
                }),
            },
            Method::Lvd => Arc::new(ResidualScore {
                model: self.point_var()?,
                normalized: true,
            }),
            Method::BoostedLcp => Arc::new(ResidualScore {
                model: self.boosted_spread()?,
                normalized: true,
            }),
            Method::Cqr => Arc::new(QuantileScore {
                model: self.quantiles()?,
                asymmetric: false,
            }),
            Method::CqrAsym => Arc::new(QuantileScore {
                model: self.quantiles()?,
                asymmetric: true,
            }),
            Method::BoostedCqr => Arc::new(QuantileScore {
                model: self.boosted_quantiles()?,
                asymmetric: false,
            }),
            Method::Chr => Arc::new(DensityScore {
                model: self.chr_hist()?,
                scale,
            }),
            Method::R2ccp => Arc::new(DensityScore {
                model: self.grid()?,
                scale,
            }),
            Method::OrdinalAps => Arc::new(OrdinalApsScore {
                model: self.label_hist()?,
            }),
        })
    }
}
