//! Ranking-scoring gap: a judge can order items well while its calibrated
//! intervals stay wide.
//!
//! ```text
//! cargo run --release --example ranking_scoring_gap
//! ```

use judgecp::conformal::Method;
use judgecp::domain::RatingScale;
use judgecp::harness::{generate, run_experiment, ExperimentConfig, Generator, SyntheticSpec};
use judgecp::metrics::rsg_entry;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let scale = RatingScale::likert5();
    println!(
        "{:<18} {:>6} {:>6} {:>7}",
        "benchmark", "rho", "width", "rsg"
    );
    for (name, rho, w) in [
        ("ChartQA", 0.507, 3.08),
        ("InfographicsVQA", 0.411, 3.50),
        ("WIT", 0.164, 2.38),
    ] {
        let e = rsg_entry(rho, w, &scale);
        println!(
            "{:<18} {:>6.3} {:>6.2} {:>+7.3}",
            name, e.rho_d, e.w_d, e.rsg
        );
    }

    // two synthetic "datasets" with different judge quality
    let mut samples = Vec::new();
    for (tag, generator, seed) in [
        ("sharp", Generator::peaked_logprob(), 1),
        ("noisy", Generator::heteroscedastic_groups(), 2),
    ] {
        let mut d = generate(&SyntheticSpec {
            n: 1500,
            generator,
            seed,
            scale,
        })?
        .samples;
        for s in &mut d {
            s.dataset_tag = tag.into();
            s.sample_id = format!("{tag}-{}", s.sample_id);
        }
        samples.extend(d);
    }
    let cfg = ExperimentConfig {
        seeds: vec![0, 1, 2],
        methods: vec![Method::Cqr],
        ..ExperimentConfig::default()
    };
    let report = run_experiment(&cfg, &samples)?.report;
    println!("\nper-dataset cqr (mean over seeds)");
    for d in &report.datasets {
        let mean = |metric: &str| {
            report
                .aggregates
                .iter()
                .find(|a| &a.scope == d && a.metric == metric)
                .and_then(|a| a.mean)
                .unwrap_or(f64::NAN)
        };
        println!(
            "{:<18} {:>6.3} {:>6.2} {:>+7.3}",
            d,
            mean("judge_pearson"),
            mean("width_raw"),
            mean("rsg")
        );
    }
    Ok(())
}
