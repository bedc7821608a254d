//! All nine methods on one synthetic judge, averaged over seeds.
//!
//! ```text
//! cargo run --release --example compare_methods -- [generator] [n] [seeds]
//! ```

use std::time::Instant;

use judgecp::conformal::Method;
use judgecp::harness::{generate, run_experiment, ExperimentConfig, Generator, SyntheticSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let generator = Generator::by_name(args.first().map_or("peaked_logprob", String::as_str))?;
    let n: usize = args.get(1).map_or(Ok(4000), |s| s.parse())?;
    let seeds: u64 = args.get(2).map_or(Ok(3), |s| s.parse())?;

    let data = generate(&SyntheticSpec {
        n,
        generator,
        seed: 2024,
        scale: Default::default(),
    })?;
    let config = ExperimentConfig {
        seeds: (0..seeds).collect(),
        methods: Method::ALL.to_vec(),
        ..ExperimentConfig::default()
    };
    let start = Instant::now();
    let out = run_experiment(&config, &data.samples)?;
    println!("{} samples, {} seeds, {:.1?}", n, seeds, start.elapsed());
    println!(
        "{:<12} {:>10} {:>10} {:>10} {:>10}",
        "method", "coverage", "width", "cov_adj", "width_adj"
    );
    for m in Method::ALL {
        let mean = |metric: &str| {
            out.report
                .aggregates
                .iter()
                .find(|a| a.method == m && a.scope == "all" && a.metric == metric)
                .and_then(|a| a.mean)
                .unwrap_or(f64::NAN)
        };
        println!(
            "{:<12} {:>10.3} {:>10.3} {:>10.3} {:>10.3}",
            m.id(),
            mean("coverage_raw"),
            mean("width_raw"),
            mean("coverage_adj"),
            mean("width_adj")
        );
    }
    for e in &out.report.errors {
        println!("failed: seed {} {}: {}", e.seed, e.method, e.message);
    }
    Ok(())
}
