use crate::error::{Error, Result};

/// 1-based rank `ceil((n + 1)(1 - alpha))` used by split conformal calibration.
pub fn conformal_rank(n: usize, alpha: f64) -> usize {
    ((n as f64 + 1.0) * (1.0 - alpha) - 1e-9).ceil().max(1.0) as usize
}

/// The conformal threshold: the `ceil((n + 1)(1 - alpha))`-th smallest score,
/// or `+inf` when that rank exceeds `n`.
pub fn conformal_quantile(scores: &[f64], alpha: f64) -> Result<f64> {
    if scores.is_empty() {
        return Err(Error::Empty("conformal scores"));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Config(format!("alpha {alpha} outside (0, 1)")));
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::Invariant("NaN conformal score".into()));
    }
    let rank = conformal_rank(scores.len(), alpha);
    if rank > scores.len() {
        return Ok(f64::INFINITY);
    }
    let mut sorted = scores.to_vec();
    let (_, kth, _) = sorted.select_nth_unstable_by(rank - 1, f64::total_cmp);
    Ok(*kth)
}
