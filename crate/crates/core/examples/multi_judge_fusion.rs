//! Stack two judges' score-token features and calibrate on the fused
//! vector.
//!
//! ```text
//! cargo run --release --example multi_judge_fusion
//! ```

use judgecp::conformal::{run_method, Method, MethodConfig};
use judgecp::domain::{FeatureVector, LabeledSample, RatingScale};
use judgecp::harness::{fuse, generate, Generator, SyntheticSpec};
use judgecp::metrics::interval_metrics;
use judgecp::rng::seeded;
use rand_distr::{Distribution, StandardNormal};

/// A second judge that sees the same items through independent noise.
fn second_judge(first: &[LabeledSample], scale: &RatingScale) -> Vec<LabeledSample> {
    let mut rng = seeded(99);
    first
        .iter()
        .map(|s| {
            let z: f64 = StandardNormal.sample(&mut rng);
            let center = s.gt_score as f64 + 0.8 * z;
            let logits: Vec<f64> = scale
                .labels()
                .map(|k| -(k as f64 - center).powi(2) / 2.0)
                .collect();
            let lse = logits.iter().map(|v| v.exp()).sum::<f64>().ln();
            let f = logits.iter().map(|v| v - lse).collect();
            LabeledSample {
                features: FeatureVector::new(f, scale).expect("log-probabilities"),
                judge_tag: "b".into(),
                ..s.clone()
            }
        })
        .collect()
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let scale = RatingScale::likert5();
    let a = generate(&SyntheticSpec {
        n: 3000,
        generator: Generator::peaked_logprob(),
        seed: 5,
        scale,
    })?
    .samples;
    let b = second_judge(&a, &scale);
    let fused = fuse(&[("a".into(), a.clone()), ("b".into(), b.clone())], &scale)?;
    println!(
        "fused {} samples into {}-dim features",
        fused.samples.len(),
        fused.samples[0].features.len()
    );

    let cfg = MethodConfig::default();
    for (name, data) in [("judge a", &a), ("judge b", &b), ("a+b", &fused.samples)] {
        let (cal, test) = data.split_at(1500);
        let preds = run_method(Method::Cqr, cal, test, 0.1, scale, &cfg)?;
        let ivs: Vec<_> = preds.iter().map(|p| p.interval).collect();
        let gts: Vec<i32> = test.iter().map(|s| s.gt_score).collect();
        let m = interval_metrics(&ivs, &gts)?;
        println!(
            "{:<8} cqr coverage {:.3}  width {:.3}",
            name, m.coverage_raw, m.width_raw
        );
    }
    Ok(())
}
