//! The conformal threshold rule and a single naive split run.
//!
//! ```text
//! cargo run --release --example split_conformal_basics
//! ```

use judgecp::conformal::{conformal_quantile, conformal_rank, run_naive_split, MethodConfig};
use judgecp::domain::RatingScale;
use judgecp::harness::{generate, Generator, SyntheticSpec};
use judgecp::metrics::interval_metrics;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // the threshold is the ceil((n + 1)(1 - alpha))-th smallest score
    for n in [5usize, 9, 19, 99] {
        let scores: Vec<f64> = (1..=n).map(|i| i as f64 / 10.0).collect();
        println!(
            "n {:>3}  rank {:>3}  threshold {}",
            n,
            conformal_rank(n, 0.1),
            conformal_quantile(&scores, 0.1)?
        );
    }

    let scale = RatingScale::likert5();
    let data = generate(&SyntheticSpec {
        n: 2000,
        generator: Generator::peaked_logprob(),
        seed: 1,
        scale,
    })?;
    let (cal, test) = data.samples.split_at(1000);
    let preds = run_naive_split(cal, test, 0.1, scale, &MethodConfig::default())?;
    let ivs: Vec<_> = preds.iter().map(|p| p.interval).collect();
    let gts: Vec<i32> = test.iter().map(|s| s.gt_score).collect();
    let m = interval_metrics(&ivs, &gts)?;
    println!(
        "\nnaive split on {} test samples: coverage {:.3}, width {:.3} (label-aligned {:.3}, {:.3})",
        test.len(),
        m.coverage_raw,
        m.width_raw,
        m.coverage_adj,
        m.width_adj
    );
    for (s, p) in test.iter().zip(&preds).take(5) {
        println!(
            "  {}  gt {}  y_hat {:.2}  [{:.2}, {:.2}]",
            s.sample_id, s.gt_score, p.y_hat, p.interval.lower, p.interval.upper
        );
    }
    Ok(())
}
