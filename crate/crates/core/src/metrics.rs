//! Point-score and interval metrics.
//!
//! Correlations that are undefined (fewer than two samples, or a constant
//! input) come back as `None` rather than NaN or zero.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::domain::{Interval, RatingScale};
use crate::error::{Error, Result};

fn same_len(a: usize, b: usize) -> Result<()> {
    if a == b {
        Ok(())
    } else {
        Err(Error::LengthMismatch { left: a, right: b })
    }
}

fn mean(v: impl Iterator<Item = f64>) -> f64 {
    let (s, n) = v.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    if n == 0 {
        0.0
    } else {
        s / n as f64
    }
}

pub fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return None;
    }
    let mx = mean(x.iter().copied());
    let my = mean(y.iter().copied());
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx <= 0.0 || syy <= 0.0 {
        return None;
    }
    Some((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// 1-based ranks with ties sharing their mean rank.
pub fn midranks(x: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|a, b| x[*a].total_cmp(&x[*b]));
    let mut ranks = vec![0.0; x.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && x[order[j + 1]] == x[order[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for k in &order[i..=j] {
            ranks[*k] = r;
        }
        i = j + 1;
    }
    ranks
}

pub fn spearman(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() != y.len() {
        return None;
    }
    pearson(&midranks(x), &midranks(y))
}

/// Sum of `t(t-1)/2` over runs of equal adjacent values.
fn tied_pairs<T: PartialEq>(sorted: &[T]) -> u64 {
    let mut total = 0u64;
    let mut run = 1u64;
    for w in sorted.windows(2) {
        if w[0] == w[1] {
            run += 1;
        } else {
            total += run * (run - 1) / 2;
            run = 1;
        }
    }
    total + run * (run - 1) / 2
}

/// Sort in place, returning the number of inversions removed.
fn merge_count(v: &mut [f64], buf: &mut Vec<f64>) -> u64 {
    let n = v.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let mut swaps = merge_count(&mut v[..mid], buf) + merge_count(&mut v[mid..], buf);
    buf.clear();
    let (mut i, mut j) = (0, mid);
    while i < mid && j < n {
        if v[j] < v[i] {
            buf.push(v[j]);
            swaps += (mid - i) as u64;
            j += 1;
        } else {
            buf.push(v[i]);
            i += 1;
        }
    }
    buf.extend_from_slice(&v[i..mid]);
    buf.extend_from_slice(&v[j..n]);
    v.copy_from_slice(buf);
    swaps
}

/// Kendall's tau-b, by sorting and counting inversions.
pub fn kendall_tau_b(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len();
    if n != y.len() || n < 2 {
        return None;
    }
    let mut pairs: Vec<(f64, f64)> = x.iter().copied().zip(y.iter().copied()).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let n0 = (n as u64) * (n as u64 - 1) / 2;
    let xs: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let n1 = tied_pairs(&xs);
    let n3 = tied_pairs(&pairs);
    let mut ys: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let swaps = merge_count(&mut ys, &mut Vec::with_capacity(n));
    let n2 = tied_pairs(&ys);
    let denom = ((n0 - n1) as f64) * ((n0 - n2) as f64);
    if denom <= 0.0 {
        return None;
    }
    let num = n0 as f64 - n1 as f64 - n2 as f64 + n3 as f64 - 2.0 * swaps as f64;
    Some((num / denom.sqrt()).clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Correlations {
    pub pearson: Option<f64>,
    pub spearman: Option<f64>,
    pub kendall: Option<f64>,
}

pub fn correlations(pred: &[f64], gt: &[f64]) -> Correlations {
    Correlations {
        pearson: pearson(pred, gt),
        spearman: spearman(pred, gt),
        kendall: kendall_tau_b(pred, gt),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Accuracy {
    pub exact_acc: f64,
    pub relaxed_acc: f64,
    pub mae: f64,
    /// Mean of `pred - gt`.
    pub bias: f64,
}

pub fn accuracy_metrics(pred: &[i32], gt: &[i32]) -> Result<Accuracy> {
    same_len(pred.len(), gt.len())?;
    if pred.is_empty() {
        return Err(Error::Empty("predictions"));
    }
    let d: Vec<i32> = pred.iter().zip(gt).map(|(p, g)| p - g).collect();
    Ok(Accuracy {
        exact_acc: mean(d.iter().map(|e| (*e == 0) as i32 as f64)),
        relaxed_acc: mean(d.iter().map(|e| (e.abs() <= 1) as i32 as f64)),
        mae: mean(d.iter().map(|e| e.abs() as f64)),
        bias: mean(d.iter().map(|e| *e as f64)),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointMetrics {
    pub n: usize,
    #[serde(flatten)]
    pub correlations: Correlations,
    #[serde(flatten)]
    pub accuracy: Accuracy,
}

pub fn point_metrics(pred: &[i32], gt: &[i32]) -> Result<PointMetrics> {
    let accuracy = accuracy_metrics(pred, gt)?;
    let p: Vec<f64> = pred.iter().map(|v| *v as f64).collect();
    let g: Vec<f64> = gt.iter().map(|v| *v as f64).collect();
    Ok(PointMetrics {
        n: pred.len(),
        correlations: correlations(&p, &g),
        accuracy,
    })
}

pub fn coverage(intervals: &[Interval], gts: &[i32], adjusted: bool) -> Result<f64> {
    same_len(intervals.len(), gts.len())?;
    if intervals.is_empty() {
        return Err(Error::Empty("intervals"));
    }
    Ok(mean(intervals.iter().zip(gts).map(|(iv, y)| {
        let hit = if adjusted {
            iv.covers_adj(*y)
        } else {
            iv.covers(*y as f64)
        };
        hit as i32 as f64
    })))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntervalMetrics {
    pub n: usize,
    pub coverage_raw: f64,
    pub coverage_adj: f64,
    pub width_raw: f64,
    pub width_adj: f64,
}

pub fn interval_metrics(intervals: &[Interval], gts: &[i32]) -> Result<IntervalMetrics> {
    Ok(IntervalMetrics {
        n: intervals.len(),
        coverage_raw: coverage(intervals, gts, false)?,
        coverage_adj: coverage(intervals, gts, true)?,
        width_raw: mean(intervals.iter().map(Interval::width)),
        width_adj: mean(intervals.iter().map(Interval::adj_width)),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RsgEntry {
    pub rho_d: f64,
    pub w_d: f64,
    pub rsg: f64,
}

/// Ranking-scoring gap: `|rho| - (1 - w / (K - 1))`. Positive when the judge
/// ranks items better than its intervals would suggest.
pub fn rsg(rho_d: f64, w_d: f64, scale: &RatingScale) -> f64 {
    rho_d.abs() - (1.0 - w_d / scale.max_width())
}

pub fn rsg_entry(rho_d: f64, w_d: f64, scale: &RatingScale) -> RsgEntry {
    RsgEntry {
        rho_d,
        w_d,
        rsg: rsg(rho_d, w_d, scale),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MidpointReport {
    #[serde(flatten)]
    pub correlations: Correlations,
    pub mae: f64,
}

/// Score each sample by its raw interval's midpoint.
pub fn midpoint_eval(intervals: &[Interval], gts: &[i32]) -> Result<MidpointReport> {
    same_len(intervals.len(), gts.len())?;
    let mid: Vec<f64> = intervals.iter().map(Interval::midpoint).collect();
    let g: Vec<f64> = gts.iter().map(|v| *v as f64).collect();
    Ok(MidpointReport {
        correlations: correlations(&mid, &g),
        mae: mean(mid.iter().zip(&g).map(|(m, y)| (m - y).abs())),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StratumKind {
    GtLevel,
    ErrorBin,
    Dataset,
    Group,
}

impl StratumKind {
    pub fn id(&self) -> &'static str {
        match self {
            StratumKind::GtLevel => "gt_level",
            StratumKind::ErrorBin => "error_bin",
            StratumKind::Dataset => "dataset",
            StratumKind::Group => "group",
        }
    }
}

/// `|gt - pred|`, the judge's point error on the label scale.
pub fn error_bin(pred: i32, gt: i32) -> i32 {
    (gt - pred).abs()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stratum {
    pub key: String,
    pub intervals: IntervalMetrics,
    pub accuracy: Accuracy,
}

/// Metrics within each distinct key, in key order.
pub fn stratified(
    intervals: &[Interval],
    preds: &[i32],
    gts: &[i32],
    keys: &[String],
) -> Result<Vec<Stratum>> {
    same_len(intervals.len(), gts.len())?;
    same_len(preds.len(), gts.len())?;
    same_len(keys.len(), gts.len())?;
    let mut groups: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, k) in keys.iter().enumerate() {
        groups.entry(k.as_str()).or_default().push(i);
    }
    groups
        .into_iter()
        .map(|(k, idx)| {
            let iv: Vec<Interval> = idx.iter().map(|&i| intervals[i]).collect();
            let p: Vec<i32> = idx.iter().map(|&i| preds[i]).collect();
            let g: Vec<i32> = idx.iter().map(|&i| gts[i]).collect();
            Ok(Stratum {
                key: k.to_string(),
                intervals: interval_metrics(&iv, &g)?,
                accuracy: accuracy_metrics(&p, &g)?,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Informativeness {
    /// Width at most 1.
    pub decisive: f64,
    /// Width in (1, 3].
    pub moderate: f64,
    /// Width above 3.
    pub uninformative: f64,
}

pub fn informativeness_from_widths(widths: &[f64]) -> Informativeness {
    let n = widths.len().max(1) as f64;
    let count = |f: &dyn Fn(f64) -> bool| widths.iter().filter(|w| f(**w)).count() as f64 / n;
    Informativeness {
        decisive: count(&|w| w <= 1.0),
        moderate: count(&|w| w > 1.0 && w <= 3.0),
        uninformative: count(&|w| w > 3.0),
    }
}

/// Buckets by label-aligned width; unaligned intervals use their raw width.
pub fn informativeness(intervals: &[Interval]) -> Informativeness {
    let widths: Vec<f64> = intervals
        .iter()
        .map(|iv| {
            if iv.is_adjusted() {
                iv.adj_width()
            } else {
                iv.width()
            }
        })
        .collect();
    informativeness_from_widths(&widths)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Confusion {
    /// `matrix[g][p]`: share of ground-truth label `g + 1` predicted as `p + 1`.
    pub matrix: Vec<Vec<f64>>,
    pub row_counts: Vec<usize>,
    /// Ground-truth labels with no samples; their rows are all zero.
    pub empty_rows: Vec<i32>,
}

pub fn confusion(pred: &[i32], gt: &[i32], scale: &RatingScale) -> Result<Confusion> {
    same_len(pred.len(), gt.len())?;
    let k = scale.levels();
    let mut counts = vec![vec![0usize; k]; k];
    for (p, g) in pred.iter().zip(gt) {
        if !scale.contains(*p) || !scale.contains(*g) {
            return Err(Error::Data(format!(
                "label pair ({p}, {g}) outside the scale"
            )));
        }
        counts[(*g - 1) as usize][(*p - 1) as usize] += 1;
    }
    let row_counts: Vec<usize> = counts.iter().map(|r| r.iter().sum()).collect();
    let matrix = counts
        .iter()
        .zip(&row_counts)
        .map(|(r, n)| {
            r.iter()
                .map(|c| if *n == 0 { 0.0 } else { *c as f64 / *n as f64 })
                .collect()
        })
        .collect();
    let empty_rows = row_counts
        .iter()
        .enumerate()
        .filter(|(_, n)| **n == 0)
        .map(|(i, _)| i as i32 + 1)
        .collect();
    Ok(Confusion {
        matrix,
        row_counts,
        empty_rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn iv(l: f64, u: f64) -> Interval {
        Interval::new(l, u)
    }

    #[test]
    fn coverage_examples() {
        let full = vec![iv(1.0, 5.0); 3];
        assert_eq!(coverage(&full, &[1, 3, 5], false).unwrap(), 1.0);
        assert_eq!(coverage(&[iv(2.0, 3.0)], &[4], false).unwrap(), 0.0);
        assert_eq!(
            coverage(&[iv(2.5, 4.5), iv(1.0, 2.0)], &[3, 3], false).unwrap(),
            0.5
        );
        assert!(coverage(&full, &[1], false).is_err());
    }

    #[test]
    fn correlation_examples() {
        let a = [1.0, 2.0, 3.0, 4.0, 5.0];
        let r = correlations(&a, &a);
        assert_eq!(
            (r.pearson, r.spearman, r.kendall),
            (Some(1.0), Some(1.0), Some(1.0))
        );
        let b = [5.0, 4.0, 3.0, 2.0, 1.0];
        let r = correlations(&b, &a);
        assert_eq!(
            (r.pearson, r.spearman, r.kendall),
            (Some(-1.0), Some(-1.0), Some(-1.0))
        );
        let c = [3.0; 5];
        let r = correlations(&c, &a);
        assert_eq!((r.pearson, r.spearman, r.kendall), (None, None, None));
        assert_eq!(pearson(&[1.0], &[1.0]), None);
    }

    #[test]
    fn midranks_average_ties() {
        assert_eq!(
            midranks(&[10.0, 20.0, 10.0, 30.0]),
            vec![1.5, 3.0, 1.5, 4.0]
        );
    }

    #[test]
    fn accuracy_examples() {
        let a = accuracy_metrics(&[3, 4], &[4, 4]).unwrap();
        assert_eq!(
            (a.exact_acc, a.relaxed_acc, a.mae, a.bias),
            (0.5, 1.0, 0.5, -0.5)
        );
        let a = accuracy_metrics(&[5, 5, 5], &[1, 1, 1]).unwrap();
        assert_eq!((a.relaxed_acc, a.bias), (0.0, 4.0));
        assert!(accuracy_metrics(&[], &[]).is_err());
    }

    #[test]
    fn rsg_examples() {
        let s = RatingScale::likert5();
        assert!((rsg(0.507, 3.08, &s) - 0.277).abs() < 1e-12);
        assert_eq!(rsg(0.0, 4.0, &s), 0.0);
        assert!((rsg(-0.4, 2.0, &s) - (-0.1)).abs() < 1e-12);
    }

    #[test]
    fn midpoint_examples() {
        let ivs: Vec<Interval> = [1, 2, 4, 5]
            .iter()
            .map(|y| iv(*y as f64, *y as f64))
            .collect();
        let m = midpoint_eval(&ivs, &[1, 2, 4, 5]).unwrap();
        assert_eq!((m.correlations.pearson, m.mae), (Some(1.0), 0.0));
        let m = midpoint_eval(&[iv(1.0, 5.0); 4], &[1, 2, 4, 5]).unwrap();
        assert_eq!(m.correlations.pearson, None);
    }

    #[test]
    fn informativeness_examples() {
        let b = informativeness_from_widths(&[0.5, 2.0, 3.5]);
        assert_eq!(
            (b.decisive, b.moderate, b.uninformative),
            (1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0)
        );
        let b = informativeness_from_widths(&[4.0, 4.0]);
        assert_eq!((b.decisive, b.moderate, b.uninformative), (0.0, 0.0, 1.0));
        let b = informativeness_from_widths(&[1.0, 3.0]);
        assert_eq!((b.decisive, b.moderate), (0.5, 0.5));
    }

    #[test]
    fn confusion_examples() {
        let s = RatingScale::likert5();
        let c = confusion(&[1, 2, 3, 4, 5], &[1, 2, 3, 4, 5], &s).unwrap();
        for (i, row) in c.matrix.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                assert_eq!(*v, if i == j { 1.0 } else { 0.0 });
            }
        }
        let c = confusion(&[4, 4, 4], &[1, 2, 2], &s).unwrap();
        assert_eq!(c.matrix[1][3], 1.0);
        assert_eq!(c.empty_rows, vec![3, 4, 5]);
    }

    #[test]
    fn strata_examples() {
        let ivs = vec![iv(1.0, 5.0), iv(1.0, 5.0), iv(2.0, 2.0), iv(2.0, 2.0)];
        let gts = [3, 3, 4, 4];
        let keys: Vec<String> = ["a", "a", "b", "b"].iter().map(|s| s.to_string()).collect();
        let st = stratified(&ivs, &[3, 3, 3, 3], &gts, &keys).unwrap();
        assert_eq!(st[0].intervals.coverage_raw, 1.0);
        assert_eq!(st[1].intervals.coverage_raw, 0.0);
        assert_eq!(coverage(&ivs, &gts, false).unwrap(), 0.5);
        let one = vec!["x".to_string(); 4];
        let st = stratified(&ivs, &[3, 3, 3, 3], &gts, &one).unwrap();
        assert_eq!(st[0].intervals, interval_metrics(&ivs, &gts).unwrap());
    }

    proptest! {
        #[test]
        fn rsg_is_linear(rho in -1.0f64..1.0, w in 0.0f64..3.0, d in 0.0f64..1.0) {
            let s = RatingScale::likert5();
            let base = rsg(rho, w, &s);
            prop_assert!((rsg(rho, w + d, &s) - base - d / 4.0).abs() < 1e-12);
            let r2 = rho.abs() + d;
            prop_assert!((rsg(r2, w, &s) - base - d).abs() < 1e-12);
        }

        #[test]
        fn accuracy_ordering(pairs in proptest::collection::vec((1i32..=5, 1i32..=5), 1..40)) {
            let (p, g): (Vec<i32>, Vec<i32>) = pairs.into_iter().unzip();
            let a = accuracy_metrics(&p, &g).unwrap();
            prop_assert!(a.exact_acc <= a.relaxed_acc);
            prop_assert!(a.bias.abs() <= a.mae + 1e-12);
        }
    }
}
