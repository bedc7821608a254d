//! Gradient tree boosting for pinball and absolute loss.
//!
//! Each round fits a shallow least-squares regression tree to the negative
//! loss gradient at the current predictions, then replaces every leaf value
//! with the loss-optimal shift of the residuals falling in that leaf (the
//! leaf's empirical quantile) and adds it scaled by the learning rate.
//! Since the per-leaf loss is convex in the shift, any rate in `(0, 1]`
//! never increases the training loss.
//!
//! A model may start from the constant minimizer of the loss or refine a
//! supplied per-sample base prediction (an offset).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::loss::Pinball;
use super::{lower_quantile, Design};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind", content = "tau")]
pub enum BoostLoss {
    Pinball(f64),
    Absolute,
}

impl BoostLoss {
    fn tau(&self) -> f64 {
        match self {
            BoostLoss::Pinball(t) => *t,
            BoostLoss::Absolute => 0.5,
        }
    }

    pub fn value(&self, residual: f64) -> f64 {
        match self {
            BoostLoss::Pinball(t) => Pinball::value(*t, residual),
            BoostLoss::Absolute => residual.abs(),
        }
    }

    /// Negative derivative with respect to the prediction.
    pub fn negative_gradient(&self, residual: f64) -> f64 {
        match self {
            BoostLoss::Pinball(t) => -Pinball::derivative(*t, residual),
            BoostLoss::Absolute => {
                if residual > 0.0 {
                    1.0
                } else {
                    -1.0
                }
            }
        }
    }

    pub fn mean(&self, residuals: impl Iterator<Item = f64>) -> f64 {
        let (s, n) = residuals.fold((0.0, 0usize), |(s, n), r| (s + self.value(r), n + 1));
        s / n.max(1) as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BoostConfig {
    pub rounds: usize,
    pub max_depth: usize,
    pub learning_rate: f64,
    pub min_leaf: usize,
}

impl Default for BoostConfig {
    fn default() -> Self {
        Self {
            rounds: 50,
            max_depth: 3,
            learning_rate: 0.1,
            min_leaf: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Node {
    Leaf(f64),
    Split {
        feature: usize,
        threshold: f64,
        left: Box<Node>,
        right: Box<Node>,
    },
}

impl Node {
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            Node::Leaf(v) => *v,
            Node::Split {
                feature,
                threshold,
                left,
                right,
            } => {
                if x[*feature] <= *threshold {
                    left.eval(x)
                } else {
                    right.eval(x)
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Node::Leaf(_) => 0,
            Node::Split { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoostedModel {
    /// Starting constant; zero when the model refines an offset.
    pub init: f64,
    pub trees: Vec<Node>,
    pub learning_rate: f64,
    pub loss: BoostLoss,
    /// Mean training loss before the first tree and after each round.
    pub train_loss: Vec<f64>,
}

impl BoostedModel {
    /// Sum of scaled tree outputs on top of `init`.
    pub fn predict(&self, x: &[f64]) -> f64 {
        self.init
            + self
                .trees
                .iter()
                .map(|t| self.learning_rate * t.eval(x))
                .sum::<f64>()
    }

    /// Prediction when the model was fit on top of a base prediction.
    pub fn predict_with_offset(&self, x: &[f64], offset: f64) -> f64 {
        offset + self.predict(x)
    }
}

/// Boosting from the constant loss minimizer.
pub fn fit_boosted(data: &Design, loss: BoostLoss, cfg: &BoostConfig) -> Result<BoostedModel> {
    data.require_nonempty()?;
    let init = lower_quantile(&data.y, loss.tau());
    let offsets = vec![init; data.len()];
    let mut model = boost(data, &offsets, loss, cfg)?;
    model.init = init;
    Ok(model)
}

/// Boosting on top of per-sample base predictions.
pub fn fit_boosted_with_offset(
    data: &Design,
    offsets: &[f64],
    loss: BoostLoss,
    cfg: &BoostConfig,
) -> Result<BoostedModel> {
    data.require_nonempty()?;
    if offsets.len() != data.len() {
        return Err(Error::LengthMismatch {
            left: offsets.len(),
            right: data.len(),
        });
    }
    boost(data, offsets, loss, cfg)
}

fn boost(data: &Design, start: &[f64], loss: BoostLoss, cfg: &BoostConfig) -> Result<BoostedModel> {
    if cfg.max_depth > 3 {
        return Err(Error::Config(format!(
            "tree depth {} exceeds 3",
            cfg.max_depth
        )));
    }
    if let BoostLoss::Pinball(t) = loss {
        if !(t > 0.0 && t < 1.0) {
            return Err(Error::Config(format!("quantile level {t} outside (0, 1)")));
        }
    }
    if !(cfg.learning_rate > 0.0 && cfg.learning_rate <= 1.0) {
        return Err(Error::Config("boosting rate must lie in (0, 1]".into()));
    }
    let n = data.len();
    let mut pred = start.to_vec();
    let mut residual: Vec<f64> = data.y.iter().zip(&pred).map(|(y, p)| y - p).collect();
    let mut trees = Vec::with_capacity(cfg.rounds);
    let mut train_loss = vec![loss.mean(residual.iter().copied())];
    let all: Vec<usize> = (0..n).collect();
    for _ in 0..cfg.rounds {
        let grad: Vec<f64> = residual
            .iter()
            .map(|r| loss.negative_gradient(*r))
            .collect();
        let builder = TreeBuilder {
            x: &data.x,
            grad: &grad,
            residual: &residual,
            tau: loss.tau(),
            min_leaf: cfg.min_leaf.max(1),
        };
        let tree = builder.build(&all, cfg.max_depth);
        for i in 0..n {
            let step = cfg.learning_rate * tree.eval(&data.x[i]);
            pred[i] += step;
            residual[i] = data.y[i] - pred[i];
        }
        train_loss.push(loss.mean(residual.iter().copied()));
        trees.push(tree);
    }
    Ok(BoostedModel {
        init: 0.0,
        trees,
        learning_rate: cfg.learning_rate,
        loss,
        train_loss,
    })
}

struct TreeBuilder<'a> {
    x: &'a [Vec<f64>],
    grad: &'a [f64],
    residual: &'a [f64],
    tau: f64,
    min_leaf: usize,
}

impl TreeBuilder<'_> {
    fn leaf(&self, idx: &[usize]) -> Node {
        let r: Vec<f64> = idx.iter().map(|&i| self.residual[i]).collect();
        Node::Leaf(lower_quantile(&r, self.tau))
    }

    fn build(&self, idx: &[usize], depth: usize) -> Node {
        if depth == 0 || idx.len() < 2 * self.min_leaf {
            return self.leaf(idx);
        }
        match self.best_split(idx) {
            None => self.leaf(idx),
            Some((feature, threshold)) => {
                let (l, r): (Vec<usize>, Vec<usize>) =
                    idx.iter().partition(|&&i| self.x[i][feature] <= threshold);
                Node::Split {
                    feature,
                    threshold,
                    left: Box::new(self.build(&l, depth - 1)),
                    right: Box::new(self.build(&r, depth - 1)),
                }
            }
        }
    }

    /// Least-squares split on the gradient targets.
    fn best_split(&self, idx: &[usize]) -> Option<(usize, f64)> {
        let n = idx.len();
        let total: f64 = idx.iter().map(|&i| self.grad[i]).sum();
        let base = total * total / n as f64;
        let mut best: Option<(f64, usize, f64)> = None;
        let dim = self.x[idx[0]].len();
        let mut order = idx.to_vec();
        for f in 0..dim {
            order.sort_by(|a, b| self.x[*a][f].total_cmp(&self.x[*b][f]));
            let mut left = 0.0;
            for k in 0..n - 1 {
                left += self.grad[order[k]];
                let (nl, nr) = (k + 1, n - k - 1);
                if nl < self.min_leaf || nr < self.min_leaf {
                    continue;
                }
                let (a, b) = (self.x[order[k]][f], self.x[order[k + 1]][f]);
                if a == b {
                    continue;
                }
                let right = total - left;
                let gain = left * left / nl as f64 + right * right / nr as f64 - base;
                if gain > 1e-12 && best.is_none_or(|(g, _, _)| gain > g) {
                    best = Some((gain, f, 0.5 * (a + b)));
                }
            }
        }
        best.map(|(_, f, t)| (f, t))
    }
}
