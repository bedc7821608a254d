//! Reading labeled samples from JSON lines.
//!
//! A line carries either a `logprobs` object keyed `"1"`..`"K"` or a flat
//! `features` array (the output of `extract`, or fused features):
//!
//! ```json
//! {"sample_id": "a1", "judge": "j", "dataset": "COCO", "gt_score": 4,
//!  "logprobs": {"1": -9.1, "2": -6.0, "3": -2.2, "4": -0.2, "5": -2.0}}
//! ```

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::domain::{FeatureVector, LabeledSample, RatingScale};
use crate::error::{Error, Result};
use crate::io::{parse_jsonl, LineError};

#[derive(Debug, Clone, Deserialize)]
struct SampleLine {
    sample_id: String,
    #[serde(default, alias = "judge_tag")]
    judge: Option<String>,
    #[serde(default, alias = "dataset_tag")]
    dataset: Option<String>,
    #[serde(default)]
    gt_score: Option<i32>,
    #[serde(default)]
    logprobs: Option<BTreeMap<String, f64>>,
    #[serde(default)]
    features: Option<Vec<f64>>,
    #[serde(default, alias = "group_tag")]
    group: Option<String>,
    #[serde(default)]
    judge_score: Option<i32>,
    #[serde(default)]
    extracted_score: Option<i32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Loaded {
    pub samples: Vec<LabeledSample>,
    pub errors: Vec<LineError>,
}

fn to_sample(line: SampleLine, scale: &RatingScale) -> Result<LabeledSample> {
    let gt = line
        .gt_score
        .ok_or_else(|| Error::Data("missing gt_score".into()))?;
    let values = match (line.logprobs, line.features) {
        (Some(map), None) => {
            let keys: Vec<String> = scale.labels().map(|k| k.to_string()).collect();
            if map.len() != keys.len() || keys.iter().any(|k| !map.contains_key(k)) {
                return Err(Error::Data(format!(
                    "logprobs must have exactly the keys 1..{}",
                    scale.k_max()
                )));
            }
            keys.iter().map(|k| map[k]).collect()
        }
        (None, Some(f)) => f,
        (Some(_), Some(_)) => return Err(Error::Data("both logprobs and features given".into())),
        (None, None) => return Err(Error::Data("missing logprobs".into())),
    };
    let sample = LabeledSample {
        sample_id: line.sample_id,
        features: FeatureVector::new(values, scale)?,
        gt_score: gt,
        dataset_tag: line.dataset.unwrap_or_else(|| "default".into()),
        judge_tag: line.judge.unwrap_or_else(|| "judge".into()),
        group_tag: line.group,
        judge_score: line.judge_score.or(line.extracted_score),
    };
    sample.validate(scale)?;
    Ok(sample)
}

/// Parse samples, collecting bad lines. Fails only when no line is usable.
pub fn parse_samples(text: &str, scale: &RatingScale) -> Result<Loaded> {
    let (lines, mut errors) = parse_jsonl::<SampleLine>(text);
    let mut samples = Vec::with_capacity(lines.len());
    for (n, line) in lines {
        match to_sample(line, scale) {
            Ok(s) => samples.push(s),
            Err(e) => errors.push(LineError {
                line: n,
                message: e.to_string(),
            }),
        }
    }
    errors.sort_by_key(|e| e.line);
    if samples.is_empty() {
        return Err(if errors.is_empty() {
            Error::Empty("sample file")
        } else {
            Error::Data(format!(
                "all {} lines malformed; first: line {}: {}",
                errors.len(),
                errors[0].line,
                errors[0].message
            ))
        });
    }
    Ok(Loaded { samples, errors })
}

pub fn load_samples(path: &Path, scale: &RatingScale) -> Result<Loaded> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_samples(&text, scale)
}
