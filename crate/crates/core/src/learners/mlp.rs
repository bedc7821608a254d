//! A small dense network with tanh hidden layers and a linear output layer.
//!
//! Parameters live in one flat vector (per layer: row-major weights with one
//! row per output unit, then biases) so the optimizer and the finite
//! difference checks can treat them uniformly.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{self, Rng};

use super::loss::OutputLoss;
use super::{Optimizer, TrainConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    sizes: Vec<usize>,
    params: Vec<f64>,
    input_shift: Vec<f64>,
    input_scale: Vec<f64>,
}

/// Scratch buffers for one forward/backward pass.
pub struct Workspace {
    acts: Vec<Vec<f64>>,
    delta: Vec<f64>,
    delta_prev: Vec<f64>,
    out_grad: Vec<f64>,
}

impl Mlp {
    /// Glorot-uniform weights and zero biases drawn from `seed`.
    pub fn new(sizes: &[usize], seed: u64) -> Self {
        assert!(sizes.len() >= 2 && sizes.iter().all(|s| *s > 0));
        let mut rng = rng::seeded(seed);
        let mut params = Vec::new();
        for pair in sizes.windows(2) {
            let (n_in, n_out) = (pair[0], pair[1]);
            let limit = (6.0 / (n_in + n_out) as f64).sqrt();
            params.extend((0..n_in * n_out).map(|_| (2.0 * rng::unit(&mut rng) - 1.0) * limit));
            params.extend(std::iter::repeat_n(0.0, n_out));
        }
        Self {
            sizes: sizes.to_vec(),
            params,
            input_shift: vec![0.0; sizes[0]],
            input_scale: vec![1.0; sizes[0]],
        }
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn input_dim(&self) -> usize {
        self.sizes[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.sizes.last().unwrap()
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    /// Set per-feature standardization from the training inputs.
    pub fn fit_standardizer(&mut self, xs: &[&[f64]]) {
        let d = self.input_dim();
        let n = xs.len().max(1) as f64;
        for j in 0..d {
            let mean = xs.iter().map(|x| x[j]).sum::<f64>() / n;
            let var = xs.iter().map(|x| (x[j] - mean).powi(2)).sum::<f64>() / n;
            self.input_shift[j] = mean;
            // constant features pass through centered
            self.input_scale[j] = if var.sqrt() > 1e-12 {
                1.0 / var.sqrt()
            } else {
                1.0
            };
        }
    }

    /// Bias of output unit `k`.
    pub fn set_output_bias(&mut self, k: usize, value: f64) {
        let n = self.output_dim();
        let len = self.params.len();
        self.params[len - n + k] = value;
    }

    pub fn workspace(&self) -> Workspace {
        Workspace {
            acts: self.sizes.iter().map(|s| vec![0.0; *s]).collect(),
            delta: Vec::new(),
            delta_prev: Vec::new(),
            out_grad: vec![0.0; self.output_dim()],
        }
    }

    fn layer_offsets(&self) -> impl Iterator<Item = (usize, usize, usize, usize)> + '_ {
        let mut off = 0;
        self.sizes.windows(2).map(move |p| {
            let (n_in, n_out) = (p[0], p[1]);
            let w = off;
            let b = off + n_in * n_out;
            off = b + n_out;
            (n_in, n_out, w, b)
        })
    }

    fn forward_ws<'w>(&self, x: &[f64], ws: &'w mut Workspace) -> &'w [f64] {
        debug_assert_eq!(x.len(), self.input_dim());
        for (j, v) in x.iter().enumerate() {
            ws.acts[0][j] = (v - self.input_shift[j]) * self.input_scale[j];
        }
        let n_layers = self.sizes.len() - 1;
        for (l, (n_in, n_out, w, b)) in self.layer_offsets().enumerate() {
            let (prev, next) = ws.acts.split_at_mut(l + 1);
            let input = &prev[l];
            let out = &mut next[0];
            for o in 0..n_out {
                let row = &self.params[w + o * n_in..w + (o + 1) * n_in];
                let z = self.params[b + o] + row.iter().zip(input).map(|(a, c)| a * c).sum::<f64>();
                out[o] = if l + 1 < n_layers { z.tanh() } else { z };
            }
        }
        &ws.acts[n_layers]
    }

    /// Raw output (logits or regression value) for one input.
    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        let mut ws = self.workspace();
        self.forward_ws(x, &mut ws).to_vec()
    }

    /// Accumulate `d loss / d params` for one sample into `grad`, given
    /// `d loss / d output` already stored in `ws.out_grad`.
    fn backward_ws(&self, ws: &mut Workspace, grad: &mut [f64]) {
        let layers: Vec<_> = self.layer_offsets().collect();
        ws.delta.clear();
        ws.delta.extend_from_slice(&ws.out_grad);
        for (l, &(n_in, n_out, w, b)) in layers.iter().enumerate().rev() {
            let input = &ws.acts[l];
            for o in 0..n_out {
                let d = ws.delta[o];
                if d == 0.0 {
                    continue;
                }
                grad[b + o] += d;
                let g = &mut grad[w + o * n_in..w + (o + 1) * n_in];
                for (gi, a) in g.iter_mut().zip(input) {
                    *gi += d * a;
                }
            }
            if l == 0 {
                break;
            }
            ws.delta_prev.clear();
            ws.delta_prev.resize(n_in, 0.0);
            for o in 0..n_out {
                let d = ws.delta[o];
                if d == 0.0 {
                    continue;
                }
                let row = &self.params[w + o * n_in..w + (o + 1) * n_in];
                for (dp, wv) in ws.delta_prev.iter_mut().zip(row) {
                    *dp += d * wv;
                }
            }
            for (dp, a) in ws.delta_prev.iter_mut().zip(input) {
                *dp *= 1.0 - a * a;
            }
            std::mem::swap(&mut ws.delta, &mut ws.delta_prev);
        }
    }

    /// Mean loss over a batch and its gradient with respect to all parameters.
    pub fn loss_and_grad(
        &self,
        xs: &[&[f64]],
        ys: &[f64],
        loss: &dyn OutputLoss,
    ) -> (f64, Vec<f64>) {
        let mut ws = self.workspace();
        let mut grad = vec![0.0; self.params.len()];
        let total = self.accumulate(xs, ys, loss, &mut ws, &mut grad);
        let n = xs.len() as f64;
        grad.iter_mut().for_each(|g| *g /= n);
        (total / n, grad)
    }

    /// Mean loss over a batch, forward only.
    pub fn mean_loss(&self, xs: &[&[f64]], ys: &[f64], loss: &dyn OutputLoss) -> f64 {
        let mut ws = self.workspace();
        let mut total = 0.0;
        for (x, y) in xs.iter().zip(ys) {
            let out = self.forward_ws(x, &mut ws).to_vec();
            total += loss.loss_grad(&out, *y, &mut ws.out_grad);
        }
        total / xs.len() as f64
    }

    fn accumulate(
        &self,
        xs: &[&[f64]],
        ys: &[f64],
        loss: &dyn OutputLoss,
        ws: &mut Workspace,
        grad: &mut [f64],
    ) -> f64 {
        let mut total = 0.0;
        let n_out = self.output_dim();
        let mut out = vec![0.0; n_out];
        for (x, y) in xs.iter().zip(ys) {
            out.copy_from_slice(self.forward_ws(x, ws));
            total += loss.loss_grad(&out, *y, &mut ws.out_grad);
            self.backward_ws(ws, grad);
        }
        total
    }

    /// Mini-batch training with a per-epoch reshuffle drawn from `cfg.seed`.
    pub fn train(&mut self, xs: &[&[f64]], ys: &[f64], loss: &dyn OutputLoss, cfg: &TrainConfig) {
        let n = xs.len();
        if n == 0 || cfg.epochs == 0 {
            return;
        }
        let mut order: Vec<usize> = (0..n).collect();
        let mut rng: Rng = rng::seeded(cfg.seed.wrapping_add(1));
        let mut opt = OptimizerState::new(cfg, self.params.len());
        let mut ws = self.workspace();
        let mut grad = vec![0.0; self.params.len()];
        let batch = cfg.batch_size.max(1);
        let mut bx: Vec<&[f64]> = Vec::with_capacity(batch);
        let mut by: Vec<f64> = Vec::with_capacity(batch);
        for _ in 0..cfg.epochs {
            rng::shuffle(&mut rng, &mut order);
            for chunk in order.chunks(batch) {
                bx.clear();
                by.clear();
                bx.extend(chunk.iter().map(|&i| xs[i]));
                by.extend(chunk.iter().map(|&i| ys[i]));
                grad.iter_mut().for_each(|g| *g = 0.0);
                self.accumulate(&bx, &by, loss, &mut ws, &mut grad);
                let scale = 1.0 / chunk.len() as f64;
                grad.iter_mut().for_each(|g| *g *= scale);
                opt.step(&mut self.params, &grad);
            }
        }
    }

    /// Plain-text serialization: a header, the layer sizes, the input
    /// standardization, then each layer's row-major weights followed by its
    /// biases, one row per line.
    pub fn to_text(&self) -> String {
        let mut s = String::from("mlp v1\n");
        let join = |v: &[f64]| {
            v.iter()
                .map(|x| format!("{x:?}"))
                .collect::<Vec<_>>()
                .join(" ")
        };
        let sizes: Vec<String> = self.sizes.iter().map(|v| v.to_string()).collect();
        writeln!(s, "sizes {}", sizes.join(" ")).unwrap();
        writeln!(s, "shift {}", join(&self.input_shift)).unwrap();
        writeln!(s, "scale {}", join(&self.input_scale)).unwrap();
        for (n_in, n_out, w, b) in self.layer_offsets() {
            for o in 0..n_out {
                writeln!(
                    s,
                    "w {}",
                    join(&self.params[w + o * n_in..w + (o + 1) * n_in])
                )
                .unwrap();
            }
            writeln!(s, "b {}", join(&self.params[b..b + n_out])).unwrap();
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let bad = |m: &str| Error::Data(format!("malformed network text: {m}"));
        let mut lines = text.lines();
        if lines.next() != Some("mlp v1") {
            return Err(bad("header"));
        }
        let mut field = |tag: &str| -> Result<Vec<String>> {
            let line = lines.next().ok_or_else(|| bad("truncated"))?;
            let mut parts = line.split_whitespace();
            if parts.next() != Some(tag) {
                return Err(bad(tag));
            }
            Ok(parts.map(str::to_string).collect())
        };
        let floats = |v: Vec<String>| -> Result<Vec<f64>> {
            v.iter()
                .map(|x| x.parse::<f64>().map_err(|_| bad("number")))
                .collect()
        };
        let sizes: Vec<usize> = field("sizes")?
            .iter()
            .map(|x| x.parse().map_err(|_| bad("size")))
            .collect::<Result<_>>()?;
        if sizes.len() < 2 || sizes.contains(&0) {
            return Err(bad("sizes"));
        }
        let input_shift = floats(field("shift")?)?;
        let input_scale = floats(field("scale")?)?;
        let mut params = Vec::new();
        for p in sizes.windows(2) {
            for _ in 0..p[1] {
                let row = floats(field("w")?)?;
                if row.len() != p[0] {
                    return Err(bad("row width"));
                }
                params.extend(row);
            }
            let b = floats(field("b")?)?;
            if b.len() != p[1] {
                return Err(bad("bias width"));
            }
            params.extend(b);
        }
        if input_shift.len() != sizes[0] || input_scale.len() != sizes[0] {
            return Err(bad("standardizer width"));
        }
        Ok(Self {
            sizes,
            params,
            input_shift,
            input_scale,
        })
    }
}

enum OptimizerState {
    Sgd {
        lr: f64,
        decay: f64,
    },
    Adam {
        lr: f64,
        decay: f64,
        t: i32,
        m: Vec<f64>,
        v: Vec<f64>,
    },
}

impl OptimizerState {
    fn new(cfg: &TrainConfig, n: usize) -> Self {
        match cfg.optimizer {
            Optimizer::Sgd => Self::Sgd {
                lr: cfg.learning_rate,
                decay: cfg.weight_decay,
            },
            Optimizer::Adam => Self::Adam {
                lr: cfg.learning_rate,
                decay: cfg.weight_decay,
                t: 0,
                m: vec![0.0; n],
                v: vec![0.0; n],
            },
        }
    }

    fn step(&mut self, params: &mut [f64], grad: &[f64]) {
        match self {
            Self::Sgd { lr, decay } => {
                for (p, g) in params.iter_mut().zip(grad) {
                    *p -= *lr * (g + *decay * *p);
                }
            }
            Self::Adam { lr, decay, t, m, v } => {
                const B1: f64 = 0.9;
                const B2: f64 = 0.999;
                *t += 1;
                let c1 = 1.0 - B1.powi(*t);
                let c2 = 1.0 - B2.powi(*t);
                for i in 0..params.len() {
                    let g = grad[i] + *decay * params[i];
                    m[i] = B1 * m[i] + (1.0 - B1) * g;
                    v[i] = B2 * v[i] + (1.0 - B2) * g * g;
                    params[i] -= *lr * (m[i] / c1) / ((v[i] / c2).sqrt() + 1e-8);
                }
            }
        }
    }
}
