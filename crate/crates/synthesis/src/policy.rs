//! Lexical checks applied to generated instruction lines.

use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

static LIST_MARKER: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"^\s*(?:\(?\d+[.):]|[-*•])\s+").unwrap());
static DISTANCE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(?i)(\d+(?:\.\d+)?)\s*-?\s*(?:meters?|metres?|m)\b").unwrap());
static ANGLE: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"(?i)(\d+(?:\.\d+)?)\s*-?\s*degrees?\b").unwrap());
static PLANE: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"(?i)\b[xy]z[ -]plane\b").unwrap());

/// Open interval of allowed movement distances, in meters.
pub const MIN_DISTANCE: f64 = 2.0;
pub const MAX_DISTANCE: f64 = 10.0;
/// Rotation angles must be multiples of this many degrees.
pub const ANGLE_STEP: f64 = 30.0;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum Violation {
    NotATask,
    Distance { value: String },
    Rotation { value: String },
    Duplicate,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::NotATask => f.write_str("not a task line"),
            Violation::Distance { value } => {
                write!(f, "distance {value} m is not an integer strictly between {MIN_DISTANCE} and {MAX_DISTANCE}")
            }
            Violation::Rotation { value } => write!(f, "rotation {value} degrees is not divisible by {ANGLE_STEP}"),
            Violation::Duplicate => f.write_str("duplicate of an earlier task"),
        }
    }
}

/// Removes a leading enumeration marker such as `12.`, `3)` or `-`.
pub fn strip_list_marker(line: &str) -> &str {
    match LIST_MARKER.find(line) {
        Some(m) => line[m.end()..].trim(),
        None => line.trim(),
    }
}

/// Splits a completion into candidate instruction lines.
pub fn candidate_lines(completion: &str) -> Vec<String> {
    completion
        .lines()
        .map(strip_list_marker)
        .map(|l| l.trim_matches('"').trim().to_string())
        .filter(|l| !l.is_empty())
        .collect()
}

fn distance_ok(value: f64) -> bool {
    value.fract() == 0.0 && value > MIN_DISTANCE && value < MAX_DISTANCE
}

/// Checks one instruction against the generation rules.
pub fn check(line: &str) -> Result<(), Violation> {
    let words = line.split_whitespace().count();
    if words < 3 || line.ends_with(':') || !line.chars().any(|c| c.is_ascii_alphabetic()) {
        return Err(Violation::NotATask);
    }
    for cap in DISTANCE.captures_iter(line) {
        let v: f64 = cap[1].parse().unwrap_or(f64::NAN);
        if !distance_ok(v) {
            return Err(Violation::Distance { value: cap[1].to_string() });
        }
    }
    for cap in ANGLE.captures_iter(line) {
        let v: f64 = cap[1].parse().unwrap_or(f64::NAN);
        if !(v.is_finite() && (v / ANGLE_STEP).fract() == 0.0) {
            return Err(Violation::Rotation { value: cap[1].to_string() });
        }
    }
    Ok(())
}

/// Pattern of a line produced under the simple profile.
pub fn classify_simple(line: &str) -> &'static str {
    if PLANE.is_match(line) {
        "yz_plane"
    } else {
        "plain"
    }
}

/// Key used for exact-duplicate detection.
pub fn dedup_key(line: &str) -> String {
    line.split_whitespace().collect::<Vec<_>>().join(" ").to_lowercase().trim_end_matches('.').to_string()
}
