//! Report files.
//!
//! `emit_report` writes five files into the output directory:
//!
//! | file            | contents                                                |
//! |-----------------|---------------------------------------------------------|
//! | `per_seed.csv`  | one row per (seed, method, calibration, scope)          |
//! | `aggregate.csv` | mean and sample std per (method, calibration, scope, metric) |
//! | `stratified.csv`| per-seed metrics within gt level, error bin, dataset, group |
//! | `summary.txt`   | human-readable tables; undefined values print as `—`    |
//! | `report.json`   | the full report object, re-renderable with `report`     |
//!
//! Metric columns:
//! `coverage_raw`/`coverage_adj` (share of test labels inside the raw or
//! label-aligned interval), `width_raw`/`width_adj` (mean width),
//! `decisive`/`moderate`/`uninformative` (share of widths in `[0, 1]`,
//! `(1, 3]`, `(3, K-1]`), `mid_*` (interval midpoint against ground truth),
//! `judge_pearson` (judge point score against ground truth) and `rsg`
//! (ranking-scoring gap from `judge_pearson` and `width_raw`).
//!
//! Floats are written at full round-trip precision, so identical reports
//! produce identical bytes.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};

use super::experiment::{AggregateRow, ExperimentReport, ALL, SCHEMA};

const PER_SEED_HEADER: &[&str] = &[
    "seed",
    "method",
    "calibration",
    "scope",
    "n_cal",
    "n_test",
    "coverage_raw",
    "coverage_adj",
    "width_raw",
    "width_adj",
    "decisive",
    "moderate",
    "uninformative",
    "mid_pearson",
    "mid_spearman",
    "mid_kendall",
    "mid_mae",
    "judge_pearson",
    "rsg",
];

const AGGREGATE_HEADER: &[&str] = &[
    "method",
    "calibration",
    "scope",
    "metric",
    "n",
    "mean",
    "std",
];

const STRATIFIED_HEADER: &[&str] = &[
    "seed",
    "method",
    "calibration",
    "kind",
    "key",
    "n",
    "coverage_raw",
    "coverage_adj",
    "width_raw",
    "width_adj",
    "exact_acc",
    "relaxed_acc",
    "mae",
    "bias",
];

fn csv_bytes<T: Serialize>(header: &[&str], rows: &[T]) -> Result<Vec<u8>> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(Vec::new());
    let csv_err = |e: csv::Error| Error::Invariant(format!("csv encoding: {e}"));
    w.write_record(header).map_err(csv_err)?;
    for r in rows {
        w.serialize(r).map_err(csv_err)?;
    }
    w.into_inner()
        .map_err(|e| Error::Invariant(format!("csv encoding: {e}")))
}

fn write(dir: &Path, name: &str, bytes: &[u8]) -> Result<()> {
    let path = dir.join(name);
    fs::write(&path, bytes).map_err(|e| Error::io(&path, e))
}

pub fn emit_report(report: &ExperimentReport, out_dir: &Path) -> Result<()> {
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    write(
        out_dir,
        "per_seed.csv",
        &csv_bytes(PER_SEED_HEADER, &report.rows)?,
    )?;
    write(
        out_dir,
        "aggregate.csv",
        &csv_bytes(AGGREGATE_HEADER, &report.aggregates)?,
    )?;
    write(
        out_dir,
        "stratified.csv",
        &csv_bytes(STRATIFIED_HEADER, &report.strata)?,
    )?;
    write(out_dir, "summary.txt", render_summary(report).as_bytes())?;
    let mut json = serde_json::to_vec_pretty(report)?;
    json.push(b'\n');
    write(out_dir, "report.json", &json)
}

pub fn load_report(path: &Path) -> Result<ExperimentReport> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let report: ExperimentReport = serde_json::from_str(&text)?;
    if report.schema != SCHEMA {
        return Err(Error::Data(format!(
            "report schema {:?}, expected {SCHEMA:?}",
            report.schema
        )));
    }
    Ok(report)
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "—".to_string(), |x| format!("{x:.3}"))
}

fn pm(a: Option<&AggregateRow>) -> String {
    match a {
        Some(AggregateRow {
            mean: Some(m),
            std: Some(s),
            ..
        }) => format!("{m:.3}±{s:.3}"),
        _ => "—".to_string(),
    }
}

pub fn render_summary(report: &ExperimentReport) -> String {
    let c = &report.config;
    let mut out = String::new();
    let _ = writeln!(out, "{}", report.schema);
    let _ = writeln!(
        out,
        "alpha {}  seeds {}  cal_fraction {}  adjust {}  samples {}",
        c.alpha,
        c.seeds.len(),
        c.cal_fraction,
        c.adjust,
        report.n_samples
    );
    let j = &report.judge.overall;
    let _ = writeln!(
        out,
        "\njudge  pearson {}  spearman {}  kendall {}  exact {:.3}  within1 {:.3}  mae {:.3}  bias {:+.3}",
        opt(j.correlations.pearson),
        opt(j.correlations.spearman),
        opt(j.correlations.kendall),
        j.accuracy.exact_acc,
        j.accuracy.relaxed_acc,
        j.accuracy.mae,
        j.accuracy.bias
    );
    if !report.judge.by_gt_level.is_empty() {
        let _ = writeln!(out, "\n{:<6} {:>6} {:>8} {:>8}", "gt", "n", "bias", "mae");
        for l in &report.judge.by_gt_level {
            let _ = writeln!(
                out,
                "{:<6} {:>6} {:>+8.3} {:>8.3}",
                l.gt_level, l.n, l.accuracy.bias, l.accuracy.mae
            );
        }
    }

    let find = |m: &str, cal: &str, scope: &str, metric: &str| {
        report.aggregates.iter().find(|a| {
            a.method.id() == m && a.calibration == cal && a.scope == scope && a.metric == metric
        })
    };
    let mut keys: Vec<(String, String, String)> = Vec::new();
    for a in &report.aggregates {
        let k = (
            a.method.id().to_string(),
            a.calibration.clone(),
            a.scope.clone(),
        );
        if !keys.contains(&k) {
            keys.push(k);
        }
    }

    let _ = writeln!(
        out,
        "\n{:<12} {:<28} {:>13} {:>13} {:>13} {:>13}",
        "method", "calibration", "coverage", "width", "cov_adj", "width_adj"
    );
    for (m, cal, scope) in keys.iter().filter(|k| k.2 == ALL) {
        let _ = writeln!(
            out,
            "{:<12} {:<28} {:>13} {:>13} {:>13} {:>13}",
            m,
            cal,
            pm(find(m, cal, scope, "coverage_raw")),
            pm(find(m, cal, scope, "width_raw")),
            pm(find(m, cal, scope, "coverage_adj")),
            pm(find(m, cal, scope, "width_adj")),
        );
    }

    let per_dataset: Vec<_> = keys.iter().filter(|k| k.2 != ALL).collect();
    if !per_dataset.is_empty() {
        let _ = writeln!(
            out,
            "\n{:<24} {:<12} {:>13} {:>13} {:>13} {:>13}",
            "dataset", "method", "coverage", "width", "judge_r", "rsg"
        );
        let mut sorted = per_dataset.clone();
        sorted.sort_by(|a, b| (&a.2, &a.0).cmp(&(&b.2, &b.0)));
        for (m, cal, scope) in sorted {
            let _ = writeln!(
                out,
                "{:<24} {:<12} {:>13} {:>13} {:>13} {:>13}",
                scope,
                m,
                pm(find(m, cal, scope, "coverage_raw")),
                pm(find(m, cal, scope, "width_raw")),
                pm(find(m, cal, scope, "judge_pearson")),
                pm(find(m, cal, scope, "rsg")),
            );
        }
    }

    let _ = writeln!(
        out,
        "\n{:<12} {:<28} {:>10} {:>10} {:>10} {:>10} {:>10}",
        "method", "calibration", "decisive", "moderate", "uninform", "mid_r", "mid_mae"
    );
    for (m, cal, scope) in keys.iter().filter(|k| k.2 == ALL) {
        let mean = |metric: &str| opt(find(m, cal, scope, metric).and_then(|a| a.mean));
        let _ = writeln!(
            out,
            "{:<12} {:<28} {:>10} {:>10} {:>10} {:>10} {:>10}",
            m,
            cal,
            mean("decisive"),
            mean("moderate"),
            mean("uninformative"),
            mean("mid_pearson"),
            mean("mid_mae"),
        );
    }

    if !report.errors.is_empty() {
        let _ = writeln!(out, "\nfailed cells: {}", report.errors.len());
        for e in &report.errors {
            let _ = writeln!(
                out,
                "  seed {} {} {} {}: {}",
                e.seed, e.method, e.calibration, e.scope, e.message
            );
        }
    }
    out
}
