//! Multi-seed experiments over a method grid.

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::conformal::mondrian::calibrate_mondrian;
use crate::conformal::{
    calibrate, split_calibration, AdjustDirection, ConformalCalibration, GroupPartition, Learners,
    Method, MethodConfig, Prediction, QHat,
};
use crate::domain::{make_split, Interval, LabeledSample, RatingScale};
use crate::error::{Error, Result};
use crate::learners::Design;
use crate::metrics::{
    self, accuracy_metrics, confusion, error_bin, informativeness, interval_metrics, midpoint_eval,
    point_metrics, Accuracy, Confusion, PointMetrics, StratumKind,
};

pub const SCHEMA: &str = "judgecp-report/v1";

/// Scope label for rows computed over every sample.
pub const ALL: &str = "all";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub alpha: f64,
    pub seeds: Vec<u64>,
    pub cal_fraction: f64,
    pub methods: Vec<Method>,
    /// Partition for group-conditional calibration, run alongside the
    /// global one: a built-in name, `group_tag`, or a partition file.
    pub mondrian: Option<String>,
    pub adjust: AdjustDirection,
    pub scale: RatingScale,
    /// Also run every method independently within each dataset.
    pub per_dataset: bool,
    pub inputs: Vec<PathBuf>,
    pub out: Option<PathBuf>,
    pub learners: MethodConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            alpha: 0.1,
            seeds: (0..10).collect(),
            cal_fraction: 0.5,
            methods: Method::ALL.to_vec(),
            mondrian: None,
            adjust: AdjustDirection::Outward,
            scale: RatingScale::likert5(),
            per_dataset: true,
            inputs: Vec::new(),
            out: None,
            learners: MethodConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::Config(format!(
                "alpha {} outside (0, 1)",
                self.alpha
            )));
        }
        if !(self.cal_fraction > 0.0 && self.cal_fraction < 1.0) {
            return Err(Error::Config(format!(
                "calibration fraction {} outside (0, 1)",
                self.cal_fraction
            )));
        }
        if self.seeds.is_empty() {
            return Err(Error::Config("no seeds".into()));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("config: {e}")))
    }

    fn method_config(&self) -> MethodConfig {
        MethodConfig {
            adjust: self.adjust,
            ..self.learners.clone()
        }
    }
}

/// One (seed, method, calibration, scope) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedRow {
    pub seed: u64,
    pub method: Method,
    /// `global`, or `mondrian:<partition>`.
    pub calibration: String,
    /// `all`, or a dataset name for independent per-dataset runs.
    pub scope: String,
    pub n_cal: usize,
    pub n_test: usize,
    pub coverage_raw: f64,
    pub coverage_adj: f64,
    pub width_raw: f64,
    pub width_adj: f64,
    pub decisive: f64,
    pub moderate: f64,
    pub uninformative: f64,
    pub mid_pearson: Option<f64>,
    pub mid_spearman: Option<f64>,
    pub mid_kendall: Option<f64>,
    pub mid_mae: f64,
    /// Pearson correlation of the judge's point score with ground truth on
    /// the test portion.
    pub judge_pearson: Option<f64>,
    pub rsg: Option<f64>,
}

impl SeedRow {
    /// Metric columns in report order, with undefined values as `None`.
    pub fn metrics(&self) -> Vec<(&'static str, Option<f64>)> {
        vec![
            ("coverage_raw", Some(self.coverage_raw)),
            ("coverage_adj", Some(self.coverage_adj)),
            ("width_raw", Some(self.width_raw)),
            ("width_adj", Some(self.width_adj)),
            ("decisive", Some(self.decisive)),
            ("moderate", Some(self.moderate)),
            ("uninformative", Some(self.uninformative)),
            ("mid_pearson", self.mid_pearson),
            ("mid_spearman", self.mid_spearman),
            ("mid_kendall", self.mid_kendall),
            ("mid_mae", Some(self.mid_mae)),
            ("judge_pearson", self.judge_pearson),
            ("rsg", self.rsg),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StratumRow {
    pub seed: u64,
    pub method: Method,
    pub calibration: String,
    pub kind: StratumKind,
    pub key: String,
    pub n: usize,
    pub coverage_raw: f64,
    pub coverage_adj: f64,
    pub width_raw: f64,
    pub width_adj: f64,
    pub exact_acc: f64,
    pub relaxed_acc: f64,
    pub mae: f64,
    pub bias: f64,
}

/// Mean and sample standard deviation of one metric over seeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub method: Method,
    pub calibration: String,
    pub scope: String,
    pub metric: String,
    /// Seeds on which the metric was defined.
    pub n: usize,
    pub mean: Option<f64>,
    pub std: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellError {
    pub seed: u64,
    pub method: Method,
    pub calibration: String,
    pub scope: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelAccuracy {
    pub gt_level: i32,
    pub n: usize,
    #[serde(flatten)]
    pub accuracy: Accuracy,
}

/// The judge's own point scores against ground truth, over all samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JudgeSummary {
    pub overall: PointMetrics,
    pub by_gt_level: Vec<LevelAccuracy>,
    pub by_dataset: BTreeMap<String, PointMetrics>,
    pub confusion: Confusion,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub schema: String,
    pub config: ExperimentConfig,
    pub n_samples: usize,
    pub datasets: Vec<String>,
    pub judge: JudgeSummary,
    pub rows: Vec<SeedRow>,
    pub aggregates: Vec<AggregateRow>,
    pub strata: Vec<StratumRow>,
    pub errors: Vec<CellError>,
}

/// One test prediction, as written to the interval output file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntervalLine {
    pub seed: u64,
    pub sample_id: String,
    pub method: Method,
    pub calibration: String,
    pub lower: f64,
    pub upper: f64,
    pub adj_lower: Option<i32>,
    pub adj_upper: Option<i32>,
    pub y_hat: f64,
    pub covered_raw: bool,
    pub covered_adj: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutput {
    pub report: ExperimentReport,
    pub intervals: Vec<IntervalLine>,
}

struct Cell {
    method: Method,
    calibration: String,
    predictions: Vec<Prediction>,
    n_cal: usize,
}

struct SeedResult {
    rows: Vec<SeedRow>,
    strata: Vec<StratumRow>,
    errors: Vec<CellError>,
    intervals: Vec<IntervalLine>,
}

fn judge_summary(samples: &[LabeledSample], scale: &RatingScale) -> Result<JudgeSummary> {
    let pred: Vec<i32> = samples.iter().map(|s| s.point_score(scale)).collect();
    let gt: Vec<i32> = samples.iter().map(|s| s.gt_score).collect();
    let mut by_gt_level = Vec::new();
    for level in scale.labels() {
        let idx: Vec<usize> = (0..gt.len()).filter(|&i| gt[i] == level).collect();
        if idx.is_empty() {
            continue;
        }
        let p: Vec<i32> = idx.iter().map(|&i| pred[i]).collect();
        let g: Vec<i32> = idx.iter().map(|&i| gt[i]).collect();
        by_gt_level.push(LevelAccuracy {
            gt_level: level,
            n: idx.len(),
            accuracy: accuracy_metrics(&p, &g)?,
        });
    }
    let mut by_dataset = BTreeMap::new();
    for d in samples
        .iter()
        .map(|s| s.dataset_tag.as_str())
        .collect::<BTreeSet<_>>()
    {
        let (p, g): (Vec<i32>, Vec<i32>) = samples
            .iter()
            .zip(&pred)
            .filter(|(s, _)| s.dataset_tag == d)
            .map(|(s, p)| (*p, s.gt_score))
            .unzip();
        by_dataset.insert(d.to_string(), point_metrics(&p, &g)?);
    }
    Ok(JudgeSummary {
        overall: point_metrics(&pred, &gt)?,
        by_gt_level,
        by_dataset,
        confusion: confusion(&pred, &gt, scale)?,
    })
}

fn seed_row(
    seed: u64,
    cell: &Cell,
    scope: &str,
    test: &[LabeledSample],
    scale: &RatingScale,
) -> Result<SeedRow> {
    let ivs: Vec<Interval> = cell.predictions.iter().map(|p| p.interval).collect();
    let gt: Vec<i32> = test.iter().map(|s| s.gt_score).collect();
    let im = interval_metrics(&ivs, &gt)?;
    let mid = midpoint_eval(&ivs, &gt)?;
    let info = informativeness(&ivs);
    let judge: Vec<f64> = test.iter().map(|s| s.point_score(scale) as f64).collect();
    let g: Vec<f64> = gt.iter().map(|v| *v as f64).collect();
    let judge_pearson = metrics::pearson(&judge, &g);
    Ok(SeedRow {
        seed,
        method: cell.method,
        calibration: cell.calibration.clone(),
        scope: scope.to_string(),
        n_cal: cell.n_cal,
        n_test: test.len(),
        coverage_raw: im.coverage_raw,
        coverage_adj: im.coverage_adj,
        width_raw: im.width_raw,
        width_adj: im.width_adj,
        decisive: info.decisive,
        moderate: info.moderate,
        uninformative: info.uninformative,
        mid_pearson: mid.correlations.pearson,
        mid_spearman: mid.correlations.spearman,
        mid_kendall: mid.correlations.kendall,
        mid_mae: mid.mae,
        judge_pearson,
        rsg: judge_pearson.map(|r| metrics::rsg(r, im.width_raw, scale)),
    })
}

fn strata_rows(
    seed: u64,
    cell: &Cell,
    test: &[LabeledSample],
    groups: Option<&[String]>,
    scale: &RatingScale,
) -> Result<Vec<StratumRow>> {
    let ivs: Vec<Interval> = cell.predictions.iter().map(|p| p.interval).collect();
    let gt: Vec<i32> = test.iter().map(|s| s.gt_score).collect();
    let pred: Vec<i32> = test.iter().map(|s| s.point_score(scale)).collect();
    let mut kinds: Vec<(StratumKind, Vec<String>)> = vec![
        (
            StratumKind::GtLevel,
            gt.iter().map(|g| g.to_string()).collect(),
        ),
        (
            StratumKind::ErrorBin,
            pred.iter()
                .zip(&gt)
                .map(|(p, g)| error_bin(*p, *g).to_string())
                .collect(),
        ),
        (
            StratumKind::Dataset,
            test.iter().map(|s| s.dataset_tag.clone()).collect(),
        ),
    ];
    if let Some(g) = groups {
        kinds.push((StratumKind::Group, g.to_vec()));
    }
    let mut rows = Vec::new();
    for (kind, keys) in kinds {
        for s in metrics::stratified(&ivs, &pred, &gt, &keys)? {
            rows.push(StratumRow {
                seed,
                method: cell.method,
                calibration: cell.calibration.clone(),
                kind,
                key: s.key,
                n: s.intervals.n,
                coverage_raw: s.intervals.coverage_raw,
                coverage_adj: s.intervals.coverage_adj,
                width_raw: s.intervals.width_raw,
                width_adj: s.intervals.width_adj,
                exact_acc: s.accuracy.exact_acc,
                relaxed_acc: s.accuracy.relaxed_acc,
                mae: s.accuracy.mae,
                bias: s.accuracy.bias,
            });
        }
    }
    Ok(rows)
}

fn predict_all(
    calib: &ConformalCalibration,
    test: &[LabeledSample],
    groups: Option<&[String]>,
) -> Result<Vec<Prediction>> {
    match (&calib.q_hat, groups) {
        (QHat::PerGroup(_), Some(g)) => test
            .iter()
            .zip(g)
            .map(|(s, g)| calib.predict_in_group(s.features.as_slice(), g))
            .collect(),
        _ => test
            .iter()
            .map(|s| calib.predict(s.features.as_slice()))
            .collect(),
    }
}

/// Every configured method on one calibration/test split. Failures are
/// collected per method.
fn run_cells(
    cal: &[LabeledSample],
    test: &[LabeledSample],
    config: &ExperimentConfig,
    partition: Option<&GroupPartition>,
) -> Result<Vec<(Method, String, Result<Cell>)>> {
    let mcfg = config.method_config();
    let (train, conf) = split_calibration(cal)?;
    let train_d = Design::from_samples(&train);
    let conf_d = Design::from_samples(&conf);
    let learners = Learners::new(&train_d, config.scale, config.alpha, &mcfg);
    let mut out = Vec::new();
    for &m in &config.methods {
        let global = calibrate(m, &learners, &conf_d).and_then(|c| {
            Ok(Cell {
                method: m,
                calibration: "global".into(),
                predictions: predict_all(&c, test, None)?,
                n_cal: cal.len(),
            })
        });
        out.push((m, "global".to_string(), global));
        if let Some(p) = partition {
            let label = format!("mondrian:{}", p.name());
            let cell = (|| {
                let cg: Vec<String> = conf.iter().map(|s| p.group_of(s)).collect::<Result<_>>()?;
                let tg: Vec<String> = test.iter().map(|s| p.group_of(s)).collect::<Result<_>>()?;
                let c = calibrate_mondrian(m, &learners, &conf_d, &cg)?;
                Ok(Cell {
                    method: m,
                    calibration: label.clone(),
                    predictions: predict_all(&c, test, Some(&tg))?,
                    n_cal: cal.len(),
                })
            })();
            out.push((m, label, cell));
        }
    }
    Ok(out)
}

fn pick(samples: &[LabeledSample], idx: &[usize]) -> Vec<LabeledSample> {
    idx.iter().map(|&i| samples[i].clone()).collect()
}

fn run_seed(
    seed: u64,
    samples: &[LabeledSample],
    datasets: &[String],
    config: &ExperimentConfig,
    partition: Option<&GroupPartition>,
) -> SeedResult {
    let mut res = SeedResult {
        rows: Vec::new(),
        strata: Vec::new(),
        errors: Vec::new(),
        intervals: Vec::new(),
    };
    let fail = |res: &mut SeedResult, m: Method, cal: &str, scope: &str, e: &Error| {
        res.errors.push(CellError {
            seed,
            method: m,
            calibration: cal.to_string(),
            scope: scope.to_string(),
            message: e.to_string(),
        })
    };

    let mut scopes: Vec<(String, Vec<LabeledSample>)> = vec![(ALL.to_string(), samples.to_vec())];
    if config.per_dataset && datasets.len() > 1 {
        for d in datasets {
            let sub: Vec<LabeledSample> = samples
                .iter()
                .filter(|s| &s.dataset_tag == d)
                .cloned()
                .collect();
            scopes.push((d.clone(), sub));
        }
    }
    for (scope, data) in &scopes {
        let is_all = scope == ALL;
        let split = match make_split(data.len(), config.cal_fraction, seed) {
            Ok(s) => s,
            Err(e) => {
                for &m in &config.methods {
                    fail(&mut res, m, "global", scope, &e);
                }
                continue;
            }
        };
        let cal = pick(data, &split.cal_indices);
        let test = pick(data, &split.test_indices);
        // group-conditional calibration only for the pooled scope
        let part = if is_all { partition } else { None };
        let cells = match run_cells(&cal, &test, config, part) {
            Ok(c) => c,
            Err(e) => {
                for &m in &config.methods {
                    fail(&mut res, m, "global", scope, &e);
                }
                continue;
            }
        };
        let test_groups: Option<Vec<String>> = if is_all {
            group_keys(&test, partition)
        } else {
            None
        };
        for (m, label, cell) in cells {
            let outcome = cell.and_then(|cell| {
                let row = seed_row(seed, &cell, scope, &test, &config.scale)?;
                let strata = if is_all {
                    strata_rows(seed, &cell, &test, test_groups.as_deref(), &config.scale)?
                } else {
                    Vec::new()
                };
                Ok((cell, row, strata))
            });
            match outcome {
                Ok((cell, row, strata)) => {
                    res.rows.push(row);
                    res.strata.extend(strata);
                    if is_all {
                        for (s, p) in test.iter().zip(&cell.predictions) {
                            res.intervals.push(IntervalLine {
                                seed,
                                sample_id: s.sample_id.clone(),
                                method: m,
                                calibration: cell.calibration.clone(),
                                lower: p.interval.lower,
                                upper: p.interval.upper,
                                adj_lower: p.interval.adj_lower,
                                adj_upper: p.interval.adj_upper,
                                y_hat: p.y_hat,
                                covered_raw: p.interval.covers(s.gt_score as f64),
                                covered_adj: p.interval.covers_adj(s.gt_score),
                            });
                        }
                    }
                }
                Err(e) => fail(&mut res, m, &label, scope, &e),
            }
        }
    }
    res
}

/// Group key for every sample: the partition's when one is configured,
/// else the samples' own group tags when all of them carry one.
fn group_keys(
    samples: &[LabeledSample],
    partition: Option<&GroupPartition>,
) -> Option<Vec<String>> {
    match partition {
        Some(p) => samples.iter().map(|s| p.group_of(s).ok()).collect(),
        None => samples.iter().map(|s| s.group_tag.clone()).collect(),
    }
}

fn mean_std(values: &[f64]) -> (Option<f64>, Option<f64>) {
    let n = values.len();
    if n == 0 {
        return (None, None);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let std = if n < 2 {
        0.0
    } else {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
    };
    (Some(mean), Some(std))
}

/// Mean and standard deviation per (method, calibration, scope, metric).
pub fn aggregate(rows: &[SeedRow]) -> Vec<AggregateRow> {
    let mut cells: BTreeMap<(Method, &str, &str), Vec<&SeedRow>> = BTreeMap::new();
    for r in rows {
        cells
            .entry((r.method, r.calibration.as_str(), r.scope.as_str()))
            .or_default()
            .push(r);
    }
    let mut out = Vec::new();
    for ((method, calibration, scope), rs) in cells {
        let names: Vec<&str> = rs[0].metrics().iter().map(|(n, _)| *n).collect();
        for (k, name) in names.iter().enumerate() {
            let vals: Vec<f64> = rs.iter().filter_map(|r| r.metrics()[k].1).collect();
            let (mean, std) = mean_std(&vals);
            out.push(AggregateRow {
                method,
                calibration: calibration.to_string(),
                scope: scope.to_string(),
                metric: name.to_string(),
                n: vals.len(),
                mean,
                std,
            });
        }
    }
    out
}

pub fn run_experiment(
    config: &ExperimentConfig,
    samples: &[LabeledSample],
) -> Result<ExperimentOutput> {
    config.validate()?;
    if samples.is_empty() {
        return Err(Error::Empty("samples"));
    }
    for s in samples {
        s.validate(&config.scale)?;
    }
    let partition = config
        .mondrian
        .as_deref()
        .map(GroupPartition::resolve)
        .transpose()?;
    let datasets: Vec<String> = samples
        .iter()
        .map(|s| s.dataset_tag.clone())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let results: Vec<SeedResult> = config
        .seeds
        .par_iter()
        .map(|&seed| run_seed(seed, samples, &datasets, config, partition.as_ref()))
        .collect();
    let mut rows = Vec::new();
    let mut strata = Vec::new();
    let mut errors = Vec::new();
    let mut intervals = Vec::new();
    for r in results {
        rows.extend(r.rows);
        strata.extend(r.strata);
        errors.extend(r.errors);
        intervals.extend(r.intervals);
    }
    let report = ExperimentReport {
        schema: SCHEMA.to_string(),
        config: config.clone(),
        n_samples: samples.len(),
        datasets,
        judge: judge_summary(samples, &config.scale)?,
        aggregates: aggregate(&rows),
        rows,
        strata,
        errors,
    };
    Ok(ExperimentOutput { report, intervals })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mean_std_basics() {
        assert_eq!(mean_std(&[]), (None, None));
        assert_eq!(mean_std(&[2.0]), (Some(2.0), Some(0.0)));
        let (m, s) = mean_std(&[1.0, 3.0]);
        assert_eq!(m, Some(2.0));
        assert!((s.unwrap() - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn config_defaults_and_overrides() {
        let c = ExperimentConfig::from_json(r#"{"alpha": 0.2, "methods": ["cqr"]}"#).unwrap();
        assert_eq!(c.alpha, 0.2);
        assert_eq!(c.seeds, (0..10).collect::<Vec<u64>>());
        assert_eq!(c.cal_fraction, 0.5);
        assert_eq!(c.methods, vec![Method::Cqr]);
        assert!(ExperimentConfig::from_json(r#"{"methods": ["nope"]}"#).is_err());
        let bad = ExperimentConfig {
            alpha: 1.5,
            ..ExperimentConfig::default()
        };
        assert!(bad.validate().is_err());
    }
}
