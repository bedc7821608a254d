//! Score-token feature extraction from recorded judge transcripts.
//!
//! A judge transcript is a sequence of generated tokens, each carrying its
//! own log-probability and a (possibly truncated) top-k list of
//! alternatives. The score position is located with three heuristics tried
//! in order:
//!
//! 1. **Anchored**: the literal `Score:` (possibly split across up to three
//!    tokens), then the first rating digit after it.
//! 2. **Keyword**: a case-insensitive `score` or `rating` token followed by a
//!    rating digit within a small window.
//! 3. **Backward**: the last rating digit in the transcript.
//!
//! The feature vector then reads the log-probability of each label token
//! `"1"..="K"` from the top-k list at that position. Labels missing from
//! the list get a floor value and NaN log-probabilities get a fill value,
//! so the output is always finite.

use serde::de::{self, Deserializer};
use serde::{Deserialize, Serialize};

use crate::domain::{FeatureVector, RatingScale};
use crate::error::{Error, Result};

/// `log(1e-5)`, rounded as in the published extraction pipeline.
pub const DEFAULT_FLOOR: f64 = -11.5;
/// Replacement for NaN log-probabilities.
pub const DEFAULT_NAN_FILL: f64 = -100.0;
pub const DEFAULT_KEYWORD_WINDOW: usize = 8;

/// A log-probability as it appears in a transcript; `NaN` marks a value the
/// judge runtime could not compute.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Logprob(pub f64);

impl<'de> Deserialize<'de> for Logprob {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
            Null(()),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(Logprob(v)),
            Raw::Null(()) => Ok(Logprob(f64::NAN)),
            Raw::Text(s) => match s.trim().to_ascii_lowercase().as_str() {
                "nan" => Ok(Logprob(f64::NAN)),
                "-inf" | "-infinity" => Ok(Logprob(f64::NEG_INFINITY)),
                other => other
                    .parse::<f64>()
                    .map(Logprob)
                    .map_err(|_| de::Error::custom(format!("bad logprob {s:?}"))),
            },
        }
    }
}

/// One generated token and its alternatives.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TokenLogprobEntry {
    #[serde(rename = "text")]
    pub token_text: String,
    pub logprob: Logprob,
    #[serde(default)]
    pub top_k: Vec<(String, Logprob)>,
}

impl TokenLogprobEntry {
    pub fn plain(text: &str, logprob: f64) -> Self {
        Self {
            token_text: text.to_string(),
            logprob: Logprob(logprob),
            top_k: Vec::new(),
        }
    }
}

/// A recorded judge transcript.
///
/// The optional `gt_score`, `dataset`, `judge` and `group` fields are
/// passed through to the feature line so the output can be loaded as
/// labeled samples directly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtractionRecord {
    pub sample_id: String,
    pub tokens: Vec<TokenLogprobEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub declared_score: Option<i32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gt_score: Option<i32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dataset: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub judge: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Anchored,
    Keyword,
    Backward,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtractorConfig {
    pub anchor: String,
    pub keywords: Vec<String>,
    pub keyword_window: usize,
    /// Token prefixes stripped (after leading whitespace) before matching.
    pub markers: Vec<String>,
    pub floor: f64,
    pub nan_fill: f64,
}

impl Default for ExtractorConfig {
    fn default() -> Self {
        Self {
            anchor: "Score:".to_string(),
            keywords: vec!["score".to_string(), "rating".to_string()],
            keyword_window: DEFAULT_KEYWORD_WINDOW,
            markers: vec!["\u{2581}".to_string(), "\u{0120}".to_string()],
            floor: DEFAULT_FLOOR,
            nan_fill: DEFAULT_NAN_FILL,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtractionResult {
    pub sample_id: String,
    pub score_position: usize,
    pub stage: Stage,
    pub features: FeatureVector,
    pub extracted_score: i32,
    /// Set when any label slot came from a NaN log-probability.
    pub nan_flagged: bool,
    /// Number of label slots filled with the floor value.
    pub floored_slots: usize,
    pub warnings: Vec<String>,
}

/// Strip leading whitespace and sentence-piece markers.
pub fn normalize_token<'a>(raw: &'a str, markers: &[String]) -> &'a str {
    let mut s = raw.trim_start();
    loop {
        let before = s.len();
        for m in markers {
            if let Some(rest) = s.strip_prefix(m.as_str()) {
                s = rest.trim_start();
            }
        }
        if s.len() == before {
            return s;
        }
    }
}

/// The label a token spells, if it is exactly a rating digit after normalization.
fn rating_digit(raw: &str, scale: &RatingScale, cfg: &ExtractorConfig) -> Option<i32> {
    let norm = normalize_token(raw, &cfg.markers);
    if norm.is_empty() || !norm.bytes().all(|b| b.is_ascii_digit()) || norm.starts_with('0') {
        return None;
    }
    norm.parse::<i32>().ok().filter(|v| scale.contains(*v))
}

fn is_keyword(raw: &str, cfg: &ExtractorConfig) -> bool {
    let word = normalize_token(raw, &cfg.markers)
        .trim_matches(|c: char| !c.is_alphanumeric())
        .to_lowercase();
    cfg.keywords.iter().any(|k| word == k.to_lowercase())
}

fn find_anchored(
    tokens: &[TokenLogprobEntry],
    scale: &RatingScale,
    cfg: &ExtractorConfig,
) -> Option<usize> {
    for start in 0..tokens.len() {
        let mut joined = String::new();
        for end in start..(start + 3).min(tokens.len()) {
            joined.push_str(normalize_token(&tokens[end].token_text, &cfg.markers));
            if joined == cfg.anchor {
                // first anchor wins; later anchors can only see a suffix of its tail
                return (end + 1..tokens.len())
                    .find(|&j| rating_digit(&tokens[j].token_text, scale, cfg).is_some());
            }
            if !cfg.anchor.starts_with(joined.as_str()) {
                break;
            }
        }
    }
    None
}

fn find_keyword(
    tokens: &[TokenLogprobEntry],
    scale: &RatingScale,
    cfg: &ExtractorConfig,
) -> Option<usize> {
    tokens
        .iter()
        .enumerate()
        .filter(|(_, t)| is_keyword(&t.token_text, cfg))
        .find_map(|(i, _)| {
            let end = (i + 1 + cfg.keyword_window).min(tokens.len());
            (i + 1..end).find(|&j| rating_digit(&tokens[j].token_text, scale, cfg).is_some())
        })
}

fn find_backward(
    tokens: &[TokenLogprobEntry],
    scale: &RatingScale,
    cfg: &ExtractorConfig,
) -> Option<usize> {
    (0..tokens.len())
        .rev()
        .find(|&j| rating_digit(&tokens[j].token_text, scale, cfg).is_some())
}

/// Locate the token holding the judge's score and report which heuristic found it.
pub fn find_score_position(
    rec: &ExtractionRecord,
    scale: &RatingScale,
    cfg: &ExtractorConfig,
) -> Result<(usize, Stage)> {
    let t = &rec.tokens;
    if let Some(i) = find_anchored(t, scale, cfg) {
        return Ok((i, Stage::Anchored));
    }
    if let Some(i) = find_keyword(t, scale, cfg) {
        return Ok((i, Stage::Keyword));
    }
    if let Some(i) = find_backward(t, scale, cfg) {
        return Ok((i, Stage::Backward));
    }
    Err(Error::NoRatingDigit {
        sample_id: rec.sample_id.clone(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum SlotSource {
    Observed,
    Floored,
    NanFilled,
}

fn label_slots(
    entry: &TokenLogprobEntry,
    scale: &RatingScale,
    cfg: &ExtractorConfig,
) -> Vec<(f64, SlotSource)> {
    scale
        .labels()
        .map(|label| {
            let want = label.to_string();
            let hit = entry
                .top_k
                .iter()
                .find(|(text, _)| normalize_token(text, &cfg.markers) == want)
                .map(|(_, lp)| lp.0)
                .or_else(|| {
                    (normalize_token(&entry.token_text, &cfg.markers) == want)
                        .then_some(entry.logprob.0)
                });
            match hit {
                None => (cfg.floor, SlotSource::Floored),
                Some(v) if v.is_nan() => (cfg.nan_fill, SlotSource::NanFilled),
                Some(v) if v == f64::NEG_INFINITY => (cfg.floor, SlotSource::Floored),
                // fp16 log-softmax can overshoot zero by a rounding error
                Some(v) => (v.min(0.0), SlotSource::Observed),
            }
        })
        .collect()
}

/// One log-probability per label, in label order, read from the score token.
pub fn build_feature_vector(
    entry: &TokenLogprobEntry,
    scale: &RatingScale,
    cfg: &ExtractorConfig,
) -> FeatureVector {
    let values = label_slots(entry, scale, cfg)
        .into_iter()
        .map(|(v, _)| v)
        .collect();
    FeatureVector::new(values, scale).expect("slots are finite and non-positive")
}

pub fn extract(
    rec: &ExtractionRecord,
    scale: &RatingScale,
    cfg: &ExtractorConfig,
) -> Result<ExtractionResult> {
    if rec.tokens.is_empty() {
        return Err(Error::Data(format!(
            "transcript {} has no tokens",
            rec.sample_id
        )));
    }
    let (pos, stage) = find_score_position(rec, scale, cfg)?;
    let entry = &rec.tokens[pos];
    let slots = label_slots(entry, scale, cfg);
    let extracted_score = rating_digit(&entry.token_text, scale, cfg)
        .ok_or_else(|| Error::Invariant("score token is not a digit".into()))?;
    let mut warnings = Vec::new();
    if let Some(declared) = rec.declared_score {
        if declared != extracted_score {
            warnings.push(format!(
                "declared score {declared} differs from extracted score {extracted_score}"
            ));
        }
    }
    Ok(ExtractionResult {
        sample_id: rec.sample_id.clone(),
        score_position: pos,
        stage,
        nan_flagged: slots.iter().any(|(_, s)| *s == SlotSource::NanFilled),
        floored_slots: slots
            .iter()
            .filter(|(_, s)| *s == SlotSource::Floored)
            .count(),
        features: FeatureVector::new(slots.into_iter().map(|(v, _)| v).collect(), scale)?,
        extracted_score,
        warnings,
    })
}

/// Output record of the `extract` command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureLine {
    pub sample_id: String,
    pub features: Vec<f64>,
    pub extracted_score: i32,
    pub stage: Stage,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub nan_flagged: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gt_score: Option<i32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dataset: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub judge: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group: Option<String>,
}

impl FeatureLine {
    pub fn new(rec: &ExtractionRecord, res: &ExtractionResult) -> Self {
        Self {
            sample_id: res.sample_id.clone(),
            features: res.features.as_slice().to_vec(),
            extracted_score: res.extracted_score,
            stage: res.stage,
            nan_flagged: res.nan_flagged,
            gt_score: rec.gt_score,
            dataset: rec.dataset.clone(),
            judge: rec.judge.clone(),
            group: rec.group.clone(),
        }
    }
}

/// Summary of a batch extraction.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ExtractionSummary {
    pub extracted: usize,
    pub failed: Vec<String>,
    pub by_stage: [usize; 3],
    pub nan_flagged: usize,
    pub mismatches: usize,
}

pub fn extract_all(
    records: &[ExtractionRecord],
    scale: &RatingScale,
    cfg: &ExtractorConfig,
) -> (Vec<FeatureLine>, ExtractionSummary) {
    let mut lines = Vec::new();
    let mut summary = ExtractionSummary::default();
    for rec in records {
        match extract(rec, scale, cfg) {
            Ok(res) => {
                summary.extracted += 1;
                summary.by_stage[res.stage as usize] += 1;
                summary.nan_flagged += res.nan_flagged as usize;
                summary.mismatches += !res.warnings.is_empty() as usize;
                lines.push(FeatureLine::new(rec, &res));
            }
            Err(_) => summary.failed.push(rec.sample_id.clone()),
        }
    }
    (lines, summary)
}
