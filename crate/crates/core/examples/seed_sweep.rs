//! How the seed-averaged coverage settles as seeds are added.
//!
//! ```text
//! cargo run --release --example seed_sweep -- [method] [max_seeds]
//! ```

use std::collections::BTreeMap;

use judgecp::conformal::Method;
use judgecp::harness::experiment::ALL;
use judgecp::harness::{generate, run_experiment, ExperimentConfig, Generator, SyntheticSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let method: Method = args.first().map_or("naive_split", String::as_str).parse()?;
    let max: u64 = args.get(1).map_or(Ok(30), |s| s.parse())?;
    let data = generate(&SyntheticSpec {
        n: 5717,
        generator: Generator::peaked_logprob(),
        seed: 7,
        scale: Default::default(),
    })?;
    let cfg = ExperimentConfig {
        seeds: (0..max).collect(),
        methods: vec![method],
        ..ExperimentConfig::default()
    };
    let report = run_experiment(&cfg, &data.samples)?.report;
    let by_seed: BTreeMap<u64, (f64, f64)> = report
        .rows
        .iter()
        .filter(|r| r.scope == ALL)
        .map(|r| (r.seed, (r.coverage_raw, r.width_raw)))
        .collect();
    let rows: Vec<(f64, f64)> = by_seed.values().copied().collect();
    println!("{:>6} {:>10} {:>10}", "seeds", "coverage", "width");
    for k in (5..=rows.len()).step_by(5) {
        let (c, w) = rows[..k]
            .iter()
            .fold((0.0, 0.0), |acc, r| (acc.0 + r.0, acc.1 + r.1));
        println!("{:>6} {:>10.4} {:>10.4}", k, c / k as f64, w / k as f64);
    }
    Ok(())
}
