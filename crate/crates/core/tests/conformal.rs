mod oracles;

use std::sync::Arc;

use judgecp::conformal::mondrian::calibrate_mondrian;
use judgecp::conformal::scores::ResidualScore;
use judgecp::conformal::{
    boundary_adjust, calibrate, calibrate_threshold, conformal_quantile, run_method, run_mondrian,
    score_all, AdjustDirection, GroupPartition, Learners, Method, MethodConfig, Nonconformity,
    QHat, Threshold,
};
use judgecp::domain::{Interval, LabeledSample, RatingScale};
use judgecp::error::Error;
use judgecp::harness::{generate, Generator, SyntheticSpec};
use judgecp::learners::{fit_point_var, BoostConfig, Design, TrainConfig};
use judgecp::rng::{seeded, unit};
use proptest::prelude::*;

use oracles::conformal_quantile_exact;

fn samples(generator: Generator, n: usize, seed: u64) -> Vec<LabeledSample> {
    generate(&SyntheticSpec {
        n,
        generator,
        seed,
        scale: RatingScale::likert5(),
    })
    .unwrap()
    .samples
}

fn quick() -> MethodConfig {
    MethodConfig {
        train: TrainConfig {
            epochs: 30,
            ..TrainConfig::default()
        },
        ..MethodConfig::default()
    }
}

#[test]
fn quantile_matches_exact_rank() {
    let mut rng = seeded(1);
    for n in 1..=200 {
        let scores: Vec<f64> = (0..n).map(|_| (unit(&mut rng) * 20.0).floor()).collect();
        for a in [50u64, 100, 200] {
            let got = conformal_quantile(&scores, a as f64 / 1000.0).unwrap();
            assert_eq!(got, conformal_quantile_exact(&scores, a), "n {n} alpha {a}");
        }
    }
}

proptest! {
    #[test]
    fn adjusted_outward_never_shrinks(l in -1.0f64..7.0, w in 0.0f64..6.0) {
        let scale = RatingScale::likert5();
        let iv = judgecp::domain::clamp_interval(Interval::new(l, l + w), &scale);
        let a = boundary_adjust(iv, &scale, AdjustDirection::Outward);
        prop_assert!(a.adj_width() >= a.width());
        for y in 1..=5 {
            prop_assert!(!a.covers(y as f64) || a.covers_adj(y));
        }
    }
}

/// Features whose argmax is the label, so the point predictor is exact.
fn perfect(n: usize) -> Vec<LabeledSample> {
    let scale = RatingScale::likert5();
    (0..n)
        .map(|i| {
            let gt = 1 + (i % 5) as i32;
            let f = (1..=5)
                .map(|k| if k == gt { -0.01 } else { -9.0 })
                .collect();
            LabeledSample {
                sample_id: format!("p{i}"),
                features: judgecp::domain::FeatureVector::new(f, &scale).unwrap(),
                gt_score: gt,
                dataset_tag: "d".into(),
                judge_tag: "j".into(),
                group_tag: None,
                judge_score: None,
            }
        })
        .collect()
}

#[test]
fn perfect_point_predictor_gives_zero_threshold() {
    let data = perfect(400);
    let conf = Design::from_samples(&data[200..]);
    let train = Design::from_samples(&data[..200]);
    let cfg = MethodConfig {
        point_source: judgecp::conformal::PointSource::JudgeArgmax,
        ..MethodConfig::default()
    };
    let learners = Learners::new(&train, RatingScale::likert5(), 0.1, &cfg);
    let c = calibrate(Method::NaiveSplit, &learners, &conf).unwrap();
    assert_eq!(c.q_hat, QHat::Global(Threshold::One(0.0)));
    let p = c.predict(data[3].features.as_slice()).unwrap();
    assert_eq!((p.interval.lower, p.interval.upper), (4.0, 4.0));
}

#[test]
fn constant_spread_lvd_equals_naive() {
    let data = samples(Generator::homoscedastic(), 800, 3);
    let train = Design::from_samples(&data[..200]);
    let conf = Design::from_samples(&data[200..400]);
    let mut model = fit_point_var(&train, 1e-3, &quick().train).unwrap();
    // flatten the spread head to the constant 1e-3 + softplus(0.7)
    model
        .scale
        .net
        .params_mut()
        .iter_mut()
        .for_each(|w| *w = 0.0);
    model.scale.net.set_output_bias(0, 0.7);
    let model = Arc::new(model);
    let naive = ResidualScore {
        model: model.clone(),
        normalized: false,
    };
    let lvd = ResidualScore {
        model,
        normalized: true,
    };
    let tn = calibrate_threshold(&score_all(&naive, &conf), 0.1).unwrap();
    let tl = calibrate_threshold(&score_all(&lvd, &conf), 0.1).unwrap();
    for s in &data[400..] {
        let x = s.features.as_slice();
        let (a, b) = (naive.interval(x, &tn), lvd.interval(x, &tl));
        assert!((a.lower - b.lower).abs() < 1e-12 && (a.upper - b.upper).abs() < 1e-12);
    }
}

#[test]
fn single_group_mondrian_is_global() {
    let data = samples(Generator::peaked_logprob(), 600, 4);
    let (cal, test) = data.split_at(300);
    let scale = RatingScale::likert5();
    for m in [
        Method::NaiveSplit,
        Method::Cqr,
        Method::Chr,
        Method::OrdinalAps,
    ] {
        let global = run_method(m, cal, test, 0.1, scale, &quick()).unwrap();
        let single =
            run_mondrian(m, cal, test, 0.1, &GroupPartition::Single, scale, &quick()).unwrap();
        assert_eq!(global, single, "{m}");
    }
}

#[test]
fn zero_rounds_boosting_equals_unboosted() {
    let data = samples(Generator::peaked_logprob(), 600, 5);
    let (cal, test) = data.split_at(300);
    let scale = RatingScale::likert5();
    let cfg = MethodConfig {
        boost: BoostConfig {
            rounds: 0,
            ..BoostConfig::default()
        },
        ..quick()
    };
    let pairs = [
        (Method::BoostedCqr, Method::Cqr),
        (Method::BoostedLcp, Method::Lvd),
    ];
    for (boosted, plain) in pairs {
        let a = run_method(boosted, cal, test, 0.1, scale, &cfg).unwrap();
        let b = run_method(plain, cal, test, 0.1, scale, &cfg).unwrap();
        for (p, q) in a.iter().zip(&b) {
            assert!(
                (p.interval.lower - q.interval.lower).abs() < 1e-12,
                "{boosted}"
            );
            assert!(
                (p.interval.upper - q.interval.upper).abs() < 1e-12,
                "{boosted}"
            );
        }
    }
}

#[test]
fn r2ccp_intervals_hold_the_qualifying_grid_points() {
    let data = samples(Generator::peaked_logprob(), 800, 6);
    let (cal, test) = data.split_at(400);
    let cfg = quick();
    let train = Design::from_samples(&cal[..200]);
    let conf = Design::from_samples(&cal[200..]);
    let learners = Learners::new(&train, RatingScale::likert5(), 0.1, &cfg);
    let c = calibrate(Method::R2ccp, &learners, &conf).unwrap();
    let QHat::Global(Threshold::One(t)) = c.q_hat else {
        panic!("expected a one-sided threshold");
    };
    let grid = learners.grid().unwrap();
    for s in test {
        let x = s.features.as_slice();
        let p = c.predict(x).unwrap();
        let lp = grid.model.log_probs(x);
        let inside: Vec<f64> = (0..lp.len())
            .filter(|&i| -lp[i] <= t)
            .map(|i| cfg.grid.value(i))
            .collect();
        if let (Some(lo), Some(hi)) = (inside.first(), inside.last()) {
            assert!(
                p.interval.lower <= lo.max(1.0) + 1e-12 && p.interval.upper >= hi.min(5.0) - 1e-12
            );
        }
        assert!(p.interval.lower <= p.interval.upper);
    }
}

#[test]
fn methods_are_deterministic() {
    let data = samples(Generator::peaked_logprob(), 500, 7);
    let (cal, test) = data.split_at(250);
    let scale = RatingScale::likert5();
    for m in Method::ALL {
        let a = run_method(m, cal, test, 0.1, scale, &quick()).unwrap();
        let b = run_method(m, cal, test, 0.1, scale, &quick()).unwrap();
        assert_eq!(a, b, "{m}");
    }
}

#[test]
fn small_group_is_rejected() {
    let mut data = samples(Generator::peaked_logprob(), 400, 8);
    for (i, s) in data.iter_mut().enumerate() {
        s.group_tag = Some(if i % 20 == 0 { "rare" } else { "common" }.into());
    }
    let train = Design::from_samples(&data[..200]);
    let conf = Design::from_samples(&data[200..]);
    let groups: Vec<String> = data[200..]
        .iter()
        .map(|s| s.group_tag.clone().unwrap())
        .collect();
    let cfg = quick();
    let learners = Learners::new(&train, RatingScale::likert5(), 0.1, &cfg);
    let err = calibrate_mondrian(Method::NaiveSplit, &learners, &conf, &groups).unwrap_err();
    assert!(
        matches!(
            err,
            Error::GroupTooSmall {
                count: 10,
                min: 50,
                ..
            }
        ),
        "{err}"
    );
}
