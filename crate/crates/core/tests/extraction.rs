mod oracles;

use judgecp::domain::RatingScale;
use judgecp::extract::{extract, extract_all, ExtractorConfig, Stage};

use oracles::{corpus_mismatches, load_corpus};

#[test]
fn corpus_has_every_stage_and_failure_kind() {
    let cases = load_corpus();
    assert!(cases.len() >= 60);
    let count = |s: Stage| {
        cases
            .iter()
            .filter(|c| c.expect.stage == Some(s) && !c.expect.mismatch)
            .count()
    };
    assert!(count(Stage::Anchored) >= 20);
    assert!(count(Stage::Keyword) >= 20);
    assert!(count(Stage::Backward) >= 20);
    assert!(cases
        .iter()
        .any(|c| c.expect.error && c.record.tokens.is_empty()));
    assert!(cases
        .iter()
        .any(|c| c.expect.error && !c.record.tokens.is_empty()));
    assert!(cases.iter().any(|c| c.expect.mismatch));
}

#[test]
fn corpus_outcomes_match() {
    let bad = corpus_mismatches(&load_corpus());
    assert!(bad.is_empty(), "{}", bad.join("\n"));
}

#[test]
fn batch_summary_counts() {
    let cases = load_corpus();
    let records: Vec<_> = cases.iter().map(|c| c.record.clone()).collect();
    let (lines, summary) = extract_all(
        &records,
        &RatingScale::likert5(),
        &ExtractorConfig::default(),
    );
    let failures = cases.iter().filter(|c| c.expect.error).count();
    assert_eq!(summary.failed.len(), failures);
    assert_eq!(lines.len(), cases.len() - failures);
    assert_eq!(
        summary.mismatches,
        cases.iter().filter(|c| c.expect.mismatch).count()
    );
    assert_eq!(summary.nan_flagged, 1);
}

#[test]
fn floor_only_moves_floored_slots() {
    let scale = RatingScale::likert5();
    for c in load_corpus().iter().filter(|c| !c.expect.error) {
        let base = extract(&c.record, &scale, &ExtractorConfig::default()).unwrap();
        for floor in [-9.0, -15.0] {
            let cfg = ExtractorConfig {
                floor,
                ..ExtractorConfig::default()
            };
            let other = extract(&c.record, &scale, &cfg).unwrap();
            assert_eq!(other.score_position, base.score_position);
            for (a, b) in base
                .features
                .as_slice()
                .iter()
                .zip(other.features.as_slice())
            {
                if *a == -11.5 {
                    assert_eq!(*b, floor);
                } else {
                    assert_eq!(a, b);
                }
            }
        }
    }
}
