mod oracles;

use judgecp::metrics::{kendall_tau_b, pearson, spearman};
use judgecp::rng::{below, seeded};

use oracles::{kendall_naive, pearson_naive, spearman_naive};

fn close(a: Option<f64>, b: Option<f64>) -> bool {
    match (a, b) {
        (None, None) => true,
        (Some(a), Some(b)) => (a - b).abs() < 1e-12,
        _ => false,
    }
}

#[test]
fn correlations_match_pairwise_oracles_on_tied_data() {
    let mut rng = seeded(12);
    for case in 0..100 {
        let n = 2 + below(&mut rng, 49);
        let levels = 1 + below(&mut rng, 5);
        let x: Vec<f64> = (0..n).map(|_| below(&mut rng, levels) as f64).collect();
        let y: Vec<f64> = (0..n).map(|_| below(&mut rng, 4) as f64).collect();
        assert!(
            close(pearson(&x, &y), pearson_naive(&x, &y)),
            "pearson case {case}"
        );
        assert!(
            close(spearman(&x, &y), spearman_naive(&x, &y)),
            "spearman case {case}"
        );
        assert!(
            close(kendall_tau_b(&x, &y), kendall_naive(&x, &y)),
            "kendall case {case}"
        );
    }
}
