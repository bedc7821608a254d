//! End-to-end run over several tagged datasets with difficulty-tier Mondrian
//! calibration, writing every report file.
//!
//! ```text
//! cargo run --release --example full_experiment_report -- [out_dir]
//! ```

use judgecp::conformal::mondrian::DIFFICULTY_TIERS;
use judgecp::conformal::Method;
use judgecp::domain::RatingScale;
use judgecp::harness::{
    emit_report, generate, render_summary, run_experiment, ExperimentConfig, Generator,
    SyntheticSpec,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "report_out".into());
    let scale = RatingScale::likert5();
    // one dataset per tier, with judges of decreasing sharpness
    let tiers = [
        (
            "WIT",
            Generator::PeakedLogprob {
                center_noise: 0.3,
                label_noise: 0.1,
                temperature: 0.5,
                feature_noise: 0.1,
            },
        ),
        ("ChartQA", Generator::peaked_logprob()),
        (
            "MathVista",
            Generator::PeakedLogprob {
                center_noise: 1.2,
                label_noise: 0.3,
                temperature: 2.0,
                feature_noise: 0.1,
            },
        ),
    ];
    let mut samples = Vec::new();
    for (i, (name, generator)) in tiers.into_iter().enumerate() {
        let mut d = generate(&SyntheticSpec {
            n: 1200,
            generator,
            seed: i as u64,
            scale,
        })?
        .samples;
        for s in &mut d {
            s.sample_id = format!("{name}-{}", s.sample_id);
            s.dataset_tag = name.into();
        }
        samples.extend(d);
    }
    let cfg = ExperimentConfig {
        seeds: (0..5).collect(),
        methods: vec![
            Method::NaiveSplit,
            Method::Cqr,
            Method::R2ccp,
            Method::OrdinalAps,
        ],
        mondrian: Some(DIFFICULTY_TIERS.into()),
        ..ExperimentConfig::default()
    };
    let result = run_experiment(&cfg, &samples)?;
    emit_report(&result.report, out.as_ref())?;
    print!("{}", render_summary(&result.report));
    println!("\nwrote report files to {out}/");
    Ok(())
}
