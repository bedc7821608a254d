//! Stacking several judges' features for the same instances.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::domain::{FeatureVector, LabeledSample, RatingScale};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fused {
    pub samples: Vec<LabeledSample>,
    /// Ids present for some judges but not all.
    pub dropped: usize,
}

/// Inner-join judges on `sample_id` and concatenate their feature vectors in
/// the given judge order. Output follows the first judge's sample order.
///
/// Dataset, group and emitted score come from the first judge.
pub fn fuse(judges: &[(String, Vec<LabeledSample>)], scale: &RatingScale) -> Result<Fused> {
    let Some((_, first)) = judges.first() else {
        return Err(Error::Empty("judges to fuse"));
    };
    let index: Vec<BTreeMap<&str, &LabeledSample>> = judges
        .iter()
        .map(|(_, s)| s.iter().map(|x| (x.sample_id.as_str(), x)).collect())
        .collect();
    let tag = judges
        .iter()
        .map(|(j, _)| j.as_str())
        .collect::<Vec<_>>()
        .join("+");
    let mut all_ids: BTreeMap<&str, usize> = BTreeMap::new();
    for idx in &index {
        for id in idx.keys() {
            *all_ids.entry(id).or_default() += 1;
        }
    }
    let mut samples = Vec::new();
    for base in first {
        let id = base.sample_id.as_str();
        let parts: Option<Vec<&LabeledSample>> = index.iter().map(|m| m.get(id).copied()).collect();
        let Some(parts) = parts else { continue };
        let mut features = Vec::with_capacity(scale.levels() * parts.len());
        for p in &parts {
            if p.gt_score != base.gt_score {
                return Err(Error::GroundTruthMismatch {
                    sample_id: id.to_string(),
                    a: base.gt_score,
                    b: p.gt_score,
                });
            }
            features.extend_from_slice(p.features.as_slice());
        }
        samples.push(LabeledSample {
            features: FeatureVector::new(features, scale)?,
            judge_tag: tag.clone(),
            ..base.clone()
        });
    }
    let dropped = all_ids.values().filter(|c| **c < judges.len()).count();
    Ok(Fused { samples, dropped })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(id: &str, gt: i32, peak: usize) -> LabeledSample {
        let mut f = vec![-5.0; 5];
        f[peak] = -0.1;
        LabeledSample {
            sample_id: id.into(),
            features: FeatureVector::new(f, &RatingScale::likert5()).unwrap(),
            gt_score: gt,
            dataset_tag: "d".into(),
            judge_tag: "x".into(),
            group_tag: None,
            judge_score: None,
        }
    }

    #[test]
    fn three_judges_give_fifteen_features() {
        let s = RatingScale::likert5();
        let judges: Vec<(String, Vec<LabeledSample>)> = (0..3)
            .map(|j| (format!("j{j}"), vec![sample("a", 3, j), sample("b", 4, j)]))
            .collect();
        let f = fuse(&judges, &s).unwrap();
        assert_eq!(f.samples.len(), 2);
        assert_eq!(f.samples[0].features.len(), 15);
        assert_eq!(f.samples[0].judge_tag, "j0+j1+j2");
        assert_eq!(f.dropped, 0);
    }

    #[test]
    fn single_judge_is_identity_on_features() {
        let s = RatingScale::likert5();
        let xs = vec![sample("a", 3, 1), sample("b", 4, 2)];
        let f = fuse(&[("j".into(), xs.clone())], &s).unwrap();
        for (a, b) in f.samples.iter().zip(&xs) {
            assert_eq!(a.features, b.features);
            assert_eq!(a.gt_score, b.gt_score);
        }
    }

    #[test]
    fn missing_ids_dropped_and_mismatch_rejected() {
        let s = RatingScale::likert5();
        let a = vec![sample("a", 3, 1), sample("b", 4, 2)];
        let b = vec![sample("a", 3, 0)];
        let f = fuse(&[("x".into(), a.clone()), ("y".into(), b)], &s).unwrap();
        assert_eq!((f.samples.len(), f.dropped), (1, 1));
        let bad = vec![sample("a", 2, 0)];
        let err = fuse(&[("x".into(), a), ("y".into(), bad)], &s).unwrap_err();
        assert!(
            matches!(err, Error::GroundTruthMismatch { ref sample_id, .. } if sample_id == "a")
        );
    }
}
