//! Line-delimited JSON files.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::SynthesisError;

pub fn to_string<T: Serialize>(items: &[T]) -> String {
    let mut out = String::new();
    for item in items {
        out.push_str(&serde_json::to_string(item).expect("records serialize"));
        out.push('\n');
    }
    out
}

pub fn write<T: Serialize>(path: &Path, items: &[T]) -> Result<(), SynthesisError> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)?;
    }
    let mut file = fs::File::create(path)?;
    file.write_all(to_string(items).as_bytes())?;
    Ok(())
}

/// Parses every non-blank line; any bad line aborts with all offending line numbers.
pub fn parse<T: DeserializeOwned>(text: &str, origin: &str) -> Result<Vec<T>, SynthesisError> {
    let mut items = Vec::new();
    let mut problems = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str(line) {
            Ok(v) => items.push(v),
            Err(e) => problems.push(format!("line {}: {e}", i + 1)),
        }
    }
    if problems.is_empty() {
        Ok(items)
    } else {
        Err(SynthesisError::Schema { origin: origin.to_string(), problems })
    }
}

pub fn read<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>, SynthesisError> {
    let text = fs::read_to_string(path)?;
    parse(&text, &path.display().to_string())
}
