//! Group-conditional (Mondrian) calibration: one shared learner, one
//! threshold per group.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::domain::{LabeledSample, RatingScale};
use crate::error::{Error, Result};
use crate::learners::Design;

use super::{
    calibrate_threshold, check_alpha, split_calibration, ConformalCalibration, Learners, Method,
    MethodConfig, Prediction, QHat, Score,
};

/// Name of the built-in three-tier difficulty partition.
pub const DIFFICULTY_TIERS: &str = "difficulty-tiers";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GroupPartition {
    /// Every sample in one group.
    Single,
    /// Groups read from each sample's own `group_tag`.
    ByGroupTag,
    /// Groups assigned by dataset name.
    ByDataset {
        name: String,
        group_of: BTreeMap<String, String>,
    },
}

/// On-disk partition: group label to the datasets it contains.
#[derive(Debug, Deserialize)]
struct PartitionFile {
    name: String,
    groups: BTreeMap<String, Vec<String>>,
}

impl GroupPartition {
    pub fn from_groups(name: &str, groups: &[(&str, &[&str])]) -> Result<Self> {
        let mut group_of = BTreeMap::new();
        for (g, datasets) in groups {
            for d in *datasets {
                if let Some(prev) = group_of.insert(d.to_string(), g.to_string()) {
                    return Err(Error::Config(format!(
                        "dataset {d:?} assigned to both {prev:?} and {g:?}"
                    )));
                }
            }
        }
        Ok(GroupPartition::ByDataset {
            name: name.to_string(),
            group_of,
        })
    }

    /// Easy, medium and hard tasks of the multimodal judging benchmark,
    /// grouped by typical interval width.
    pub fn difficulty_tiers() -> Self {
        Self::from_groups(
            DIFFICULTY_TIERS,
            &[
                ("easy", &["AesBench", "MM-Vet", "WIT", "COCO"]),
                (
                    "medium",
                    &[
                        "Mind2Web",
                        "Conceptual Captions",
                        "TextVQA",
                        "LLaVA-Bench",
                        "VisitBench",
                        "ChartQA",
                    ],
                ),
                (
                    "hard",
                    &["ScienceQA", "MathVista", "DiffusionDB", "InfographicsVQA"],
                ),
            ],
        )
        .expect("built-in partition is disjoint")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let f: PartitionFile = serde_json::from_str(text)?;
        let groups: Vec<(&str, Vec<&str>)> = f
            .groups
            .iter()
            .map(|(g, ds)| (g.as_str(), ds.iter().map(String::as_str).collect()))
            .collect();
        let borrowed: Vec<(&str, &[&str])> =
            groups.iter().map(|(g, d)| (*g, d.as_slice())).collect();
        Self::from_groups(&f.name, &borrowed)
    }

    /// Resolve a partition argument: a built-in name, `group_tag`, `single`,
    /// or a path to a partition JSON file.
    pub fn resolve(spec: &str) -> Result<Self> {
        match spec {
            DIFFICULTY_TIERS => Ok(Self::difficulty_tiers()),
            "group_tag" => Ok(GroupPartition::ByGroupTag),
            "single" => Ok(GroupPartition::Single),
            path => {
                let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
                Self::from_json(&text)
            }
        }
    }

    pub fn name(&self) -> &str {
        match self {
            GroupPartition::Single => "single",
            GroupPartition::ByGroupTag => "group_tag",
            GroupPartition::ByDataset { name, .. } => name,
        }
    }

    pub fn group_of(&self, sample: &LabeledSample) -> Result<String> {
        match self {
            GroupPartition::Single => Ok("all".into()),
            GroupPartition::ByGroupTag => sample.group_tag.clone().ok_or_else(|| {
                Error::Data(format!("sample {} has no group tag", sample.sample_id))
            }),
            GroupPartition::ByDataset { name, group_of } => {
                group_of.get(&sample.dataset_tag).cloned().ok_or_else(|| {
                    Error::Data(format!(
                        "dataset {:?} of sample {} is not in partition {name:?}",
                        sample.dataset_tag, sample.sample_id
                    ))
                })
            }
        }
    }
}

/// Per-group thresholds over a shared learner. `groups[i]` labels the i-th
/// conformal sample.
pub fn calibrate_mondrian(
    method: Method,
    learners: &Learners,
    conformal: &Design,
    groups: &[String],
) -> Result<ConformalCalibration> {
    check_alpha(learners.alpha)?;
    if groups.len() != conformal.len() {
        return Err(Error::LengthMismatch {
            left: groups.len(),
            right: conformal.len(),
        });
    }
    let model = learners.nonconformity(method)?;
    let mut by_group: BTreeMap<&str, Vec<Score>> = BTreeMap::new();
    for ((x, y), g) in conformal.x.iter().zip(&conformal.y).zip(groups) {
        by_group
            .entry(g.as_str())
            .or_default()
            .push(model.score(x, *y));
    }
    let min = learners.config.min_group;
    let mut q = BTreeMap::new();
    for (g, scores) in by_group {
        if scores.len() < min {
            return Err(Error::GroupTooSmall {
                group: g.to_string(),
                count: scores.len(),
                min,
            });
        }
        q.insert(g.to_string(), calibrate_threshold(&scores, learners.alpha)?);
    }
    Ok(ConformalCalibration {
        method,
        alpha: learners.alpha,
        q_hat: QHat::PerGroup(q),
        model,
        scale: learners.scale,
        adjust: learners.config.adjust,
    })
}

/// Mondrian version of [`super::run_method`]: the learner is trained once on
/// the training portion of `cal`, and each group's threshold comes from its
/// own conformal samples.
pub fn run_mondrian(
    method: Method,
    cal: &[LabeledSample],
    test: &[LabeledSample],
    alpha: f64,
    partition: &GroupPartition,
    scale: RatingScale,
    config: &MethodConfig,
) -> Result<Vec<Prediction>> {
    check_alpha(alpha)?;
    let (train, conf) = split_calibration(cal)?;
    let groups: Vec<String> = conf
        .iter()
        .map(|s| partition.group_of(s))
        .collect::<Result<_>>()?;
    let test_groups: Vec<String> = test
        .iter()
        .map(|s| partition.group_of(s))
        .collect::<Result<_>>()?;
    let train = Design::from_samples(&train);
    let conf = Design::from_samples(&conf);
    let learners = Learners::new(&train, scale, alpha, config);
    let calib = calibrate_mondrian(method, &learners, &conf, &groups)?;
    test.iter()
        .zip(&test_groups)
        .map(|(s, g)| calib.predict_in_group(s.features.as_slice(), g))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_tiers() {
        let p = GroupPartition::difficulty_tiers();
        let GroupPartition::ByDataset { group_of, .. } = &p else {
            panic!("expected a dataset partition");
        };
        assert_eq!(group_of.len(), 14);
        assert_eq!(group_of["WIT"], "easy");
        assert_eq!(group_of["ChartQA"], "medium");
        assert_eq!(group_of["InfographicsVQA"], "hard");
    }

    #[test]
    fn json_partition_rejects_overlap() {
        let ok = r#"{"name": "two", "groups": {"a": ["x"], "b": ["y", "z"]}}"#;
        assert_eq!(GroupPartition::from_json(ok).unwrap().name(), "two");
        let bad = r#"{"name": "two", "groups": {"a": ["x"], "b": ["x"]}}"#;
        assert!(GroupPartition::from_json(bad).is_err());
    }
}
