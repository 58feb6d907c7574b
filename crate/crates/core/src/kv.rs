//! Minimal `key = value` text format shared by config files and plan records.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum KvError {
    #[error("line {line}: expected `key = value`, got {text:?}")]
    Malformed { line: usize, text: String },
    #[error("line {line}: cannot parse value {value:?} for key {key:?} as a number")]
    BadNumber {
        line: usize,
        key: String,
        value: String,
    },
}

/// Parses `key = value` lines. Blank lines and `#` comments are skipped;
/// duplicate keys keep the last occurrence.
pub fn parse(text: &str) -> Result<Vec<(String, String)>, KvError> {
    let mut pairs = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| KvError::Malformed {
            line: idx + 1,
            text: line.to_string(),
        })?;
        pairs.push((key.trim().to_string(), value.trim().to_string()));
    }
    Ok(pairs)
}

pub fn parse_f64(line: usize, key: &str, value: &str) -> Result<f64, KvError> {
    value.parse::<f64>().map_err(|_| KvError::BadNumber {
        line,
        key: key.to_string(),
        value: value.to_string(),
    })
}

pub fn parse_u64(line: usize, key: &str, value: &str) -> Result<u64, KvError> {
    value.parse::<u64>().map_err(|_| KvError::BadNumber {
        line,
        key: key.to_string(),
        value: value.to_string(),
    })
}
