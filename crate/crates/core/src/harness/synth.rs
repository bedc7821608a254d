//! Synthetic judges with a known conditional label distribution.
//!
//! Each generator emits samples shaped like real judge output (a
//! `K`-dimensional score-token log-probability vector plus an integer
//! ground truth) together with an oracle row recording the latent
//! quantities the sample was drawn from.

use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::domain::{FeatureVector, LabeledSample, RatingScale};
use crate::error::{Error, Result};
use crate::learners::loss::log_softmax;
use crate::rng::{self, Rng};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Generator {
    /// Latent label `s` uniform on the scale; the judge's distribution peaks
    /// near `s + center_noise * Z`; the human label is `s` except with
    /// probability `label_noise`, when it is a neighbor of `s`.
    PeakedLogprob {
        center_noise: f64,
        label_noise: f64,
        temperature: f64,
        feature_noise: f64,
    },
    /// Latent quality `t` uniform on `[1, K]`; human label
    /// `round(t + sigma_g * Z)` clamped, where the group's noise is
    /// `sigma_low` or `ratio * sigma_low`. The judge's peak sits at `t` and
    /// its spread is wider in the noisy group.
    HeteroscedasticGroups {
        sigma_low: f64,
        ratio: f64,
        width_low: f64,
        width_high: f64,
        feature_noise: f64,
    },
    /// As the grouped generator, with one noise level for every sample.
    Homoscedastic {
        sigma: f64,
        width: f64,
        feature_noise: f64,
    },
    /// Labels uniform on the scale and independent of the features, which
    /// are one fixed confident distribution plus optional jitter.
    Uninformative { jitter: f64 },
}

impl Generator {
    pub fn peaked_logprob() -> Self {
        Generator::PeakedLogprob {
            center_noise: 0.7,
            label_noise: 0.2,
            temperature: 1.0,
            feature_noise: 0.1,
        }
    }

    pub fn heteroscedastic_groups() -> Self {
        Generator::HeteroscedasticGroups {
            sigma_low: 0.35,
            ratio: 3.0,
            width_low: 0.6,
            width_high: 1.2,
            feature_noise: 0.05,
        }
    }

    pub fn homoscedastic() -> Self {
        Generator::Homoscedastic {
            sigma: 0.6,
            width: 0.8,
            feature_noise: 0.05,
        }
    }

    pub fn uninformative() -> Self {
        Generator::Uninformative { jitter: 0.0 }
    }

    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "peaked_logprob" => Ok(Self::peaked_logprob()),
            "heteroscedastic_groups" => Ok(Self::heteroscedastic_groups()),
            "homoscedastic" => Ok(Self::homoscedastic()),
            "uninformative" => Ok(Self::uninformative()),
            other => Err(Error::Config(format!("unknown generator {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub n: usize,
    pub generator: Generator,
    pub seed: u64,
    #[serde(default)]
    pub scale: RatingScale,
}

/// What the generator knew about one sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleRow {
    pub sample_id: String,
    /// The latent label or quality the features were built around.
    pub latent: f64,
    /// Noise level of the human label for this sample.
    pub sigma: f64,
    /// `P(gt = k | latent)` for `k = 1..K`.
    pub label_probs: Vec<f64>,
    /// The unrounded human judgment, for generators that have one.
    pub continuous_label: Option<f64>,
    /// Central 90% interval of the unrounded judgment given the latent.
    pub interval90: Option<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticData {
    pub spec: SyntheticSpec,
    pub samples: Vec<LabeledSample>,
    pub oracle: Vec<OracleRow>,
}

fn gauss(rng: &mut Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// Log-softmax of `-(j - center)^2 / (2 width^2)` over labels, with
/// Gaussian jitter on each logit.
fn peaked_features(
    center: f64,
    width: f64,
    noise: f64,
    scale: &RatingScale,
    rng: &mut Rng,
) -> Vec<f64> {
    let logits: Vec<f64> = scale
        .labels()
        .map(|j| {
            let d = j as f64 - center;
            -d * d / (2.0 * width * width) + noise * gauss(rng)
        })
        .collect();
    log_softmax(&logits)
        .into_iter()
        .map(|v| v.min(0.0))
        .collect()
}

/// `P(clamp(round(t + sigma Z)) = k)` for each label.
fn rounded_normal_probs(t: f64, sigma: f64, scale: &RatingScale) -> Vec<f64> {
    let k = scale.k_max();
    let normal = Normal::new(t, sigma).expect("positive sigma");
    scale
        .labels()
        .map(|j| {
            let hi = if j == k {
                1.0
            } else {
                normal.cdf(j as f64 + 0.5)
            };
            let lo = if j == 1 {
                0.0
            } else {
                normal.cdf(j as f64 - 0.5)
            };
            hi - lo
        })
        .collect()
}

fn z90() -> f64 {
    Normal::new(0.0, 1.0)
        .expect("unit normal")
        .inverse_cdf(0.95)
}

pub fn generate(spec: &SyntheticSpec) -> Result<SyntheticData> {
    if spec.n == 0 {
        return Err(Error::Config(
            "synthetic sample count must be positive".into(),
        ));
    }
    let scale = spec.scale;
    let k = scale.k_max();
    let mut rng = rng::seeded(spec.seed);
    let mut samples = Vec::with_capacity(spec.n);
    let mut oracle = Vec::with_capacity(spec.n);
    let tag = match &spec.generator {
        Generator::PeakedLogprob { .. } => "peaked_logprob",
        Generator::HeteroscedasticGroups { .. } => "heteroscedastic_groups",
        Generator::Homoscedastic { .. } => "homoscedastic",
        Generator::Uninformative { .. } => "uninformative",
    };
    for i in 0..spec.n {
        let id = format!("{tag}-{i:06}");
        let (features, gt, group, row) = match &spec.generator {
            Generator::PeakedLogprob {
                center_noise,
                label_noise,
                temperature,
                feature_noise,
            } => {
                let s = 1 + rng::below(&mut rng, k as usize) as i32;
                let center = s as f64 + center_noise * gauss(&mut rng);
                let f =
                    peaked_features(center, temperature.sqrt(), *feature_noise, &scale, &mut rng);
                let gt = if rng::unit(&mut rng) < *label_noise {
                    let step = if rng::unit(&mut rng) < 0.5 { -1 } else { 1 };
                    let g = s + step;
                    if scale.contains(g) {
                        g
                    } else {
                        s - step
                    }
                } else {
                    s
                };
                let mut probs = vec![0.0; k as usize];
                probs[(s - 1) as usize] += 1.0 - label_noise;
                for step in [-1, 1] {
                    let g = if scale.contains(s + step) {
                        s + step
                    } else {
                        s - step
                    };
                    probs[(g - 1) as usize] += label_noise / 2.0;
                }
                let row = OracleRow {
                    sample_id: id.clone(),
                    latent: s as f64,
                    sigma: 0.0,
                    label_probs: probs,
                    continuous_label: None,
                    interval90: None,
                };
                (f, gt, None, row)
            }
            Generator::HeteroscedasticGroups {
                sigma_low,
                ratio,
                width_low,
                width_high,
                feature_noise,
            } => {
                let high = rng::unit(&mut rng) < 0.5;
                let (sigma, width, group) = if high {
                    (sigma_low * ratio, *width_high, "high")
                } else {
                    (*sigma_low, *width_low, "low")
                };
                let (f, gt, row) =
                    latent_sample(&id, sigma, width, *feature_noise, &scale, &mut rng);
                (f, gt, Some(group.to_string()), row)
            }
            Generator::Homoscedastic {
                sigma,
                width,
                feature_noise,
            } => {
                let (f, gt, row) =
                    latent_sample(&id, *sigma, *width, *feature_noise, &scale, &mut rng);
                (f, gt, None, row)
            }
            Generator::Uninformative { jitter } => {
                let gt = 1 + rng::below(&mut rng, k as usize) as i32;
                let center = (k + 1) as f64 / 2.0;
                let f = peaked_features(center, 0.5, *jitter, &scale, &mut rng);
                let row = OracleRow {
                    sample_id: id.clone(),
                    latent: center,
                    sigma: 0.0,
                    label_probs: vec![1.0 / k as f64; k as usize],
                    continuous_label: None,
                    interval90: None,
                };
                (f, gt, None, row)
            }
        };
        samples.push(LabeledSample {
            sample_id: id,
            features: FeatureVector::new(features, &scale)?,
            gt_score: gt,
            dataset_tag: tag.to_string(),
            judge_tag: "synthetic".to_string(),
            group_tag: group,
            judge_score: None,
        });
        oracle.push(row);
    }
    Ok(SyntheticData {
        spec: spec.clone(),
        samples,
        oracle,
    })
}

fn latent_sample(
    id: &str,
    sigma: f64,
    width: f64,
    noise: f64,
    scale: &RatingScale,
    rng: &mut Rng,
) -> (Vec<f64>, i32, OracleRow) {
    let lo = RatingScale::MIN_LABEL as f64;
    let hi = scale.k_max() as f64;
    let t = lo + (hi - lo) * rng::unit(rng);
    let f = peaked_features(t, width, noise, scale, rng);
    let y = t + sigma * gauss(rng);
    let gt = (y.round() as i32).clamp(RatingScale::MIN_LABEL, scale.k_max());
    let z = z90();
    let row = OracleRow {
        sample_id: id.to_string(),
        latent: t,
        sigma,
        label_probs: rounded_normal_probs(t, sigma, scale),
        continuous_label: Some(y),
        interval90: Some((t - z * sigma, t + z * sigma)),
    };
    (f, gt, row)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(generator: Generator, n: usize) -> SyntheticSpec {
        SyntheticSpec {
            n,
            generator,
            seed: 7,
            scale: RatingScale::likert5(),
        }
    }

    #[test]
    fn same_seed_same_data() {
        let a = generate(&spec(Generator::peaked_logprob(), 50)).unwrap();
        let b = generate(&spec(Generator::peaked_logprob(), 50)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn oracle_probabilities_are_distributions() {
        for g in [
            Generator::peaked_logprob(),
            Generator::heteroscedastic_groups(),
            Generator::homoscedastic(),
            Generator::uninformative(),
        ] {
            let d = generate(&spec(g, 200)).unwrap();
            for r in &d.oracle {
                assert!((r.label_probs.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            }
            for s in &d.samples {
                assert!(s.validate(&RatingScale::likert5()).is_ok());
            }
        }
    }

    #[test]
    fn noiseless_peaks_match_labels() {
        let g = Generator::PeakedLogprob {
            center_noise: 0.0,
            label_noise: 0.0,
            temperature: 0.01,
            feature_noise: 0.0,
        };
        let s = RatingScale::likert5();
        for x in generate(&spec(g, 100)).unwrap().samples {
            assert_eq!(x.features.argmax_label(&s), x.gt_score);
        }
    }

    #[test]
    fn rounded_normal_matches_its_cdf_reading() {
        let p = rounded_normal_probs(3.0, 0.35, &RatingScale::likert5());
        let inner = Normal::new(0.0, 1.0).unwrap().cdf(0.5 / 0.35);
        assert!((p[2] - (2.0 * inner - 1.0)).abs() < 1e-12);
    }
}
