//! Global versus group-conditional calibration on two noise regimes.
//!
//! The synthetic judge sees two groups whose human labels differ in noise
//! by a factor of three. A single global threshold over-covers the quiet
//! group and under-covers the noisy one; per-group thresholds fix both.
//!
//! ```text
//! cargo run --release --example mondrian_groups -- [method] [seeds]
//! ```

use judgecp::conformal::Method;
use judgecp::harness::experiment::StratumRow;
use judgecp::harness::{generate, run_experiment, ExperimentConfig, Generator, SyntheticSpec};
use judgecp::metrics::StratumKind;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let method: Method = args.first().map_or("naive_split", String::as_str).parse()?;
    let seeds: u64 = args.get(1).map_or(Ok(3), |s| s.parse())?;

    let data = generate(&SyntheticSpec {
        n: 4000,
        generator: Generator::heteroscedastic_groups(),
        seed: 11,
        scale: Default::default(),
    })?;
    let config = ExperimentConfig {
        seeds: (0..seeds).collect(),
        methods: vec![method],
        mondrian: Some("group_tag".into()),
        ..ExperimentConfig::default()
    };
    let report = run_experiment(&config, &data.samples)?.report;

    println!(
        "{:<22} {:<6} {:>10} {:>10}",
        "calibration", "group", "coverage", "width"
    );
    for cal in ["global", "mondrian:group_tag"] {
        for group in ["low", "high"] {
            let rows: Vec<&StratumRow> = report
                .strata
                .iter()
                .filter(|r| r.calibration == cal && r.kind == StratumKind::Group && r.key == group)
                .collect();
            let n = rows.len() as f64;
            let cov = rows.iter().map(|r| r.coverage_raw).sum::<f64>() / n;
            let width = rows.iter().map(|r| r.width_raw).sum::<f64>() / n;
            println!("{cal:<22} {group:<6} {cov:>10.3} {width:>10.3}");
        }
    }
    for e in &report.errors {
        println!("failed: seed {} {}: {}", e.seed, e.method, e.message);
    }
    Ok(())
}
