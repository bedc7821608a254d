//! Locate the score token in judge transcripts and read its label
//! log-probabilities.
//!
//! ```text
//! cargo run --example extract_transcripts -- [transcripts.jsonl]
//! ```
//!
//! Without an argument a few built-in transcripts are used, one per
//! heuristic plus one with no rating digit at all.

use judgecp::domain::RatingScale;
use judgecp::extract::{extract, ExtractionRecord, ExtractorConfig, Logprob, TokenLogprobEntry};
use judgecp::io::read_jsonl;

fn transcript(id: &str, tokens: &[&str], score_at: usize) -> ExtractionRecord {
    let tokens = tokens
        .iter()
        .enumerate()
        .map(|(i, t)| {
            let mut e = TokenLogprobEntry::plain(t, -0.05);
            if i == score_at {
                e.top_k = vec![
                    (t.trim().to_string(), Logprob(-0.3)),
                    ("3".into(), Logprob(-1.6)),
                    ("5".into(), Logprob(-3.2)),
                ];
            }
            e
        })
        .collect();
    ExtractionRecord {
        sample_id: id.into(),
        tokens,
        declared_score: None,
        gt_score: None,
        dataset: None,
        judge: None,
        group: None,
    }
}

fn builtin() -> Vec<ExtractionRecord> {
    vec![
        transcript(
            "anchored",
            &[
                "The", " answer", " is", " correct", ".", " Score", ":", " 4",
            ],
            7,
        ),
        transcript(
            "keyword",
            &[
                "I", " would", " give", " a", " rating", " of", " 2", " here",
            ],
            6,
        ),
        transcript(
            "backward",
            &["Step", " 2", " is", " fine", ";", " overall", " 5"],
            6,
        ),
        transcript("no_digit", &["Cannot", " judge", " this", "."], 0),
    ]
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let records = match std::env::args().nth(1) {
        Some(path) => read_jsonl::<ExtractionRecord>(path.as_ref())?
            .0
            .into_iter()
            .map(|(_, r)| r)
            .collect(),
        None => builtin(),
    };
    let scale = RatingScale::likert5();
    let cfg = ExtractorConfig::default();
    for rec in &records {
        match extract(rec, &scale, &cfg) {
            Ok(r) => println!(
                "{:<10} {:<9} token {:>2} score {}  features {:?}",
                rec.sample_id,
                format!("{:?}", r.stage).to_lowercase(),
                r.score_position,
                r.extracted_score,
                r.features.as_slice()
            ),
            Err(e) => println!("{:<10} failed: {e}", rec.sample_id),
        }
    }
    Ok(())
}
