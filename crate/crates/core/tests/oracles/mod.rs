//! Brute-force reference implementations shared by the integration tests.
//! Each reference follows the textbook definition directly and never calls
//! the library routine it is compared against.

#![allow(dead_code)]

use std::path::PathBuf;

use judgecp::domain::RatingScale;
use judgecp::extract::{extract, ExtractionRecord, ExtractorConfig, Stage};
use judgecp::learners::loss::{
    OutputLoss, Pinball, SoftmaxCrossEntropy, SoftplusSquared, SquaredError,
};
use judgecp::learners::Mlp;
use judgecp::rng::{seeded, unit};
use serde::Deserialize;

/// Split conformal threshold with the miscoverage level in per-mille, so the
/// rank `ceil((n + 1)(1 - alpha))` is computed in exact integer arithmetic.
pub fn conformal_quantile_exact(scores: &[f64], alpha_per_mille: u64) -> f64 {
    let n = scores.len() as u64;
    let num = (n + 1) * (1000 - alpha_per_mille);
    let rank = num.div_ceil(1000);
    if rank > n {
        return f64::INFINITY;
    }
    let mut sorted = scores.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    sorted[rank as usize - 1]
}

pub fn pearson_naive(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for i in 0..x.len() {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some(sxy / (sxx * syy).sqrt())
}

/// Average rank by counting: smaller values plus half the tied block.
pub fn ranks_naive(x: &[f64]) -> Vec<f64> {
    x.iter()
        .map(|a| {
            let below = x.iter().filter(|b| *b < a).count() as f64;
            let equal = x.iter().filter(|b| *b == a).count() as f64;
            below + (equal + 1.0) / 2.0
        })
        .collect()
}

pub fn spearman_naive(x: &[f64], y: &[f64]) -> Option<f64> {
    pearson_naive(&ranks_naive(x), &ranks_naive(y))
}

/// Kendall tau-b from an explicit scan over all pairs.
pub fn kendall_naive(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len();
    let (mut conc, mut disc, mut tx, mut ty) = (0i64, 0i64, 0i64, 0i64);
    for i in 0..n {
        for j in i + 1..n {
            let dx = x[i] - x[j];
            let dy = y[i] - y[j];
            if dx == 0.0 && dy == 0.0 {
                continue;
            } else if dx == 0.0 {
                tx += 1;
            } else if dy == 0.0 {
                ty += 1;
            } else if (dx > 0.0) == (dy > 0.0) {
                conc += 1;
            } else {
                disc += 1;
            }
        }
    }
    let denom = (((conc + disc + tx) * (conc + disc + ty)) as f64).sqrt();
    if denom == 0.0 {
        return None;
    }
    Some((conc - disc) as f64 / denom)
}

/// Largest relative error between the analytic gradient and central
/// differences with step `h`. Relative error uses `max(|a|, |b|, 1e-6)`
/// as denominator so parameters with vanishing gradient compare absolutely.
pub fn gradient_check(net: &Mlp, xs: &[&[f64]], ys: &[f64], loss: &dyn OutputLoss, h: f64) -> f64 {
    let (_, analytic) = net.loss_and_grad(xs, ys, loss);
    let mut probe = net.clone();
    let mut worst: f64 = 0.0;
    for i in 0..analytic.len() {
        let orig = probe.params()[i];
        probe.params_mut()[i] = orig + h;
        let up = probe.mean_loss(xs, ys, loss);
        probe.params_mut()[i] = orig - h;
        let down = probe.mean_loss(xs, ys, loss);
        probe.params_mut()[i] = orig;
        let numeric = (up - down) / (2.0 * h);
        let denom = analytic[i].abs().max(numeric.abs()).max(1e-6);
        worst = worst.max((analytic[i] - numeric).abs() / denom);
    }
    worst
}

/// Gradient checks on `count` random small networks, cycling through every
/// training loss the learners use. Returns a label and the worst relative
/// error per instance.
pub fn gradient_suite(count: u64) -> Vec<(String, f64)> {
    let mut rng = seeded(7);
    let mut out = Vec::new();
    for instance in 0..count {
        let input = 1 + (unit(&mut rng) * 5.0) as usize;
        let hidden: Vec<usize> = (0..1 + instance as usize % 2)
            .map(|_| 2 + (unit(&mut rng) * 6.0) as usize)
            .collect();
        let kind = instance % 4;
        let output = if kind == 3 {
            5 + (unit(&mut rng) * 5.0) as usize
        } else {
            1
        };
        let mut sizes = vec![input];
        sizes.extend(&hidden);
        sizes.push(output);
        let net = Mlp::new(&sizes, instance);
        let rows: Vec<Vec<f64>> = (0..6)
            .map(|_| (0..input).map(|_| unit(&mut rng) * 4.0 - 2.0).collect())
            .collect();
        let xs: Vec<&[f64]> = rows.iter().map(Vec::as_slice).collect();
        let tau = 0.05 + 0.9 * unit(&mut rng);
        let pinball = Pinball { tau };
        let softplus = SoftplusSquared { floor: 1e-3 };
        let (loss, name, ys): (&dyn OutputLoss, &str, Vec<f64>) = match kind {
            0 => (
                &SquaredError,
                "squared",
                xs.iter().map(|_| unit(&mut rng) * 4.0 - 2.0).collect(),
            ),
            // keep targets well away from the pinball kink
            1 => (
                &pinball,
                "pinball",
                xs.iter()
                    .map(|x| {
                        let off = 0.2 + unit(&mut rng);
                        net.forward(x)[0] + if unit(&mut rng) < 0.5 { off } else { -off }
                    })
                    .collect(),
            ),
            2 => (
                &softplus,
                "softplus",
                xs.iter().map(|_| unit(&mut rng) * 2.0).collect(),
            ),
            _ => (
                &SoftmaxCrossEntropy,
                "softmax",
                xs.iter()
                    .map(|_| (unit(&mut rng) * output as f64).floor())
                    .collect(),
            ),
        };
        let err = gradient_check(&net, &xs, &ys, loss, 1e-4);
        out.push((format!("{name} {sizes:?}"), err));
    }
    out
}

#[derive(Debug, Deserialize)]
pub struct CorpusExpect {
    #[serde(default)]
    pub error: bool,
    pub stage: Option<Stage>,
    pub position: Option<usize>,
    pub score: Option<i32>,
    pub features: Option<Vec<f64>>,
    #[serde(default)]
    pub mismatch: bool,
    #[serde(default)]
    pub nan_flagged: bool,
}

#[derive(Debug, Deserialize)]
pub struct CorpusCase {
    pub record: ExtractionRecord,
    pub expect: CorpusExpect,
}

pub fn corpus_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/extraction_corpus.jsonl")
}

pub fn load_corpus() -> Vec<CorpusCase> {
    let text = std::fs::read_to_string(corpus_path()).expect("fixture corpus");
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).expect("corpus line"))
        .collect()
}

/// Run every corpus case through the extractor; returns one message per
/// case whose outcome differs from the expectation.
pub fn corpus_mismatches(cases: &[CorpusCase]) -> Vec<String> {
    let scale = RatingScale::likert5();
    let cfg = ExtractorConfig::default();
    let mut bad = Vec::new();
    for c in cases {
        let id = &c.record.sample_id;
        let e = &c.expect;
        match extract(&c.record, &scale, &cfg) {
            Err(err) if !e.error => bad.push(format!("{id}: unexpected error {err}")),
            Err(_) => {}
            Ok(r) if e.error => bad.push(format!(
                "{id}: expected failure, got {:?} at {}",
                r.stage, r.score_position
            )),
            Ok(r) => {
                if Some(r.stage) != e.stage
                    || Some(r.score_position) != e.position
                    || Some(r.extracted_score) != e.score
                {
                    bad.push(format!(
                        "{id}: got {:?}/{}/{}, expected {:?}/{:?}/{:?}",
                        r.stage, r.score_position, r.extracted_score, e.stage, e.position, e.score
                    ));
                }
                if let Some(f) = &e.features {
                    if r.features.as_slice() != f.as_slice() {
                        bad.push(format!(
                            "{id}: features {:?}, expected {f:?}",
                            r.features.as_slice()
                        ));
                    }
                }
                if r.warnings.is_empty() == e.mismatch {
                    bad.push(format!(
                        "{id}: mismatch warning {:?}, expected {}",
                        r.warnings, e.mismatch
                    ));
                }
                if r.nan_flagged != e.nan_flagged {
                    bad.push(format!(
                        "{id}: nan_flagged {}, expected {}",
                        r.nan_flagged, e.nan_flagged
                    ));
                }
            }
        }
    }
    bad
}
