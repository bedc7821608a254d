//! Per-sample losses on a network's raw output, with their output gradients.

/// A loss on the raw network output for a single target.
pub trait OutputLoss: Sync {
    /// Returns the loss and writes `d loss / d output` into `grad`.
    fn loss_grad(&self, output: &[f64], target: f64, grad: &mut [f64]) -> f64;
}

/// Softmax cross-entropy; the target is a class index stored as `f64`.
pub struct SoftmaxCrossEntropy;

impl OutputLoss for SoftmaxCrossEntropy {
    fn loss_grad(&self, output: &[f64], target: f64, grad: &mut [f64]) -> f64 {
        let k = target as usize;
        let probs = softmax(output);
        for (g, p) in grad.iter_mut().zip(&probs) {
            *g = *p;
        }
        grad[k] -= 1.0;
        -log_softmax_at(output, k)
    }
}

/// Pinball (check) loss at level `tau` on a scalar output.
pub struct Pinball {
    pub tau: f64,
}

impl Pinball {
    pub fn value(tau: f64, residual: f64) -> f64 {
        (tau * residual).max((tau - 1.0) * residual)
    }

    /// Derivative with respect to the prediction (residual = y - prediction).
    /// At the kink the right derivative is taken.
    pub fn derivative(tau: f64, residual: f64) -> f64 {
        if residual > 0.0 {
            -tau
        } else {
            1.0 - tau
        }
    }
}

impl OutputLoss for Pinball {
    fn loss_grad(&self, output: &[f64], target: f64, grad: &mut [f64]) -> f64 {
        let r = target - output[0];
        grad[0] = Pinball::derivative(self.tau, r);
        Pinball::value(self.tau, r)
    }
}

/// Half squared error on a scalar output.
pub struct SquaredError;

impl OutputLoss for SquaredError {
    fn loss_grad(&self, output: &[f64], target: f64, grad: &mut [f64]) -> f64 {
        let d = output[0] - target;
        grad[0] = d;
        0.5 * d * d
    }
}

/// Half squared error between `floor + softplus(output)` and the target;
/// used to fit a strictly positive spread.
pub struct SoftplusSquared {
    pub floor: f64,
}

impl OutputLoss for SoftplusSquared {
    fn loss_grad(&self, output: &[f64], target: f64, grad: &mut [f64]) -> f64 {
        let z = output[0];
        let d = self.floor + softplus(z) - target;
        grad[0] = d * sigmoid(z);
        0.5 * d * d
    }
}

pub fn softplus(z: f64) -> f64 {
    if z > 30.0 {
        z
    } else {
        z.exp().ln_1p()
    }
}

/// Inverse of `softplus` for positive arguments.
pub fn softplus_inv(y: f64) -> f64 {
    if y > 30.0 {
        y
    } else {
        y.exp_m1().ln()
    }
}

pub fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

pub fn softmax(z: &[f64]) -> Vec<f64> {
    let m = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = z.iter().map(|v| (v - m).exp()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|v| v / s).collect()
}

pub fn log_softmax(z: &[f64]) -> Vec<f64> {
    let m = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lse = m + z.iter().map(|v| (v - m).exp()).sum::<f64>().ln();
    z.iter().map(|v| v - lse).collect()
}

fn log_softmax_at(z: &[f64], k: usize) -> f64 {
    let m = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    z[k] - m - z.iter().map(|v| (v - m).exp()).sum::<f64>().ln()
}
