//! Pulls program text out of free-form model replies.

use super::parse;

/// Returns the first fenced code block if present, otherwise the longest
/// contiguous run of lines that parses. `None` if nothing usable is found.
pub fn extract_code(reply: &str) -> Option<String> {
    if let Some(block) = first_fenced_block(reply) {
        return Some(block);
    }
    let lines: Vec<&str> = reply.lines().collect();
    let mut best: Option<(usize, usize)> = None;
    for start in 0..lines.len() {
        if lines[start].trim().is_empty() {
            continue;
        }
        // Only extend runs whose first line could begin a statement.
        if lines[start].starts_with(' ') {
            continue;
        }
        let mut end = None;
        for stop in (start + 1)..=lines.len() {
            let candidate = lines[start..stop].join("\n");
            if parse(&candidate).is_ok_and(|p| !p.statements.is_empty()) {
                end = Some(stop);
            }
        }
        if let Some(stop) = end {
            let len = lines[start..stop].iter().filter(|l| !l.trim().is_empty()).count();
            if best.is_none_or(|(s, e)| len > lines[s..e].iter().filter(|l| !l.trim().is_empty()).count()) {
                best = Some((start, stop));
            }
        }
    }
    best.map(|(s, e)| {
        let mut text = lines[s..e].join("\n");
        text.push('\n');
        text
    })
}

fn first_fenced_block(reply: &str) -> Option<String> {
    let mut lines = reply.lines();
    while let Some(line) = lines.next() {
        let Some(info) = line.trim_start().strip_prefix("```") else { continue };
        if info.contains("```") {
            continue;
        }
        let mut body = String::new();
        for inner in lines.by_ref() {
            if inner.trim_start().starts_with("```") {
                return Some(body);
            }
            body.push_str(inner);
            body.push('\n');
        }
        return Some(body);
    }
    None
}
