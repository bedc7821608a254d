//! Line-delimited JSON helpers shared by the loaders and the CLI.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A line that failed to parse or validate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LineError {
    /// 1-based line number.
    pub line: usize,
    pub message: String,
}

/// Parsed records paired with their 1-based line numbers, plus per-line failures.
/// Blank lines are skipped.
pub fn parse_jsonl<T: DeserializeOwned>(text: &str) -> (Vec<(usize, T)>, Vec<LineError>) {
    let mut ok = Vec::new();
    let mut bad = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<T>(line) {
            Ok(v) => ok.push((i + 1, v)),
            Err(e) => bad.push(LineError {
                line: i + 1,
                message: e.to_string(),
            }),
        }
    }
    (ok, bad)
}

pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<(Vec<(usize, T)>, Vec<LineError>)> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut text = String::new();
    for line in BufReader::new(file).lines() {
        text.push_str(&line.map_err(|e| Error::io(path, e))?);
        text.push('\n');
    }
    Ok(parse_jsonl(&text))
}

pub fn write_jsonl<T: Serialize>(path: &Path, items: &[T]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for item in items {
        serde_json::to_writer(&mut w, item)?;
        w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}
