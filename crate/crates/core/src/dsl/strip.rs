//! Lexical removal of `#` comments and statement-level string literals.

/// Removes every `#` comment and every statement consisting only of a string
/// literal. Lines left empty by the removal are dropped; all other lines keep
/// their code tokens and line endings. Comment-free input is returned unchanged.
pub fn strip_comments(source: &str) -> String {
    let lines: Vec<&str> = source.split_inclusive('\n').collect();
    let mut out = String::with_capacity(source.len());
    let mut depth: i32 = 0;
    let mut i = 0;
    while i < lines.len() {
        if depth == 0 {
            if let Some(consumed) = docstring_statement(&lines[i..]) {
                i += consumed;
                continue;
            }
        }
        // A line may open a multi-line string inside brackets; keep copying lines
        // until the string closes.
        let mut state = ScanState { depth, string: None };
        let mut j = i;
        loop {
            let (code, ending, had_comment) = scan_line(lines[j], &mut state);
            let kept = if had_comment { code.trim_end() } else { code };
            if !(had_comment && kept.trim().is_empty()) {
                out.push_str(kept);
                out.push_str(ending);
            }
            j += 1;
            if state.string.is_none() || j >= lines.len() {
                break;
            }
        }
        depth = state.depth;
        i = j;
    }
    out
}

#[derive(Clone, Copy, PartialEq)]
struct OpenString {
    quote: char,
    triple: bool,
}

struct ScanState {
    depth: i32,
    string: Option<OpenString>,
}

fn split_ending(line: &str) -> (&str, &str) {
    if let Some(body) = line.strip_suffix("\r\n") {
        (body, "\r\n")
    } else if let Some(body) = line.strip_suffix('\n') {
        (body, "\n")
    } else {
        (line, "")
    }
}

/// Scans one physical line. Returns (code without comment, line ending, whether a comment was removed).
fn scan_line<'a>(line: &'a str, state: &mut ScanState) -> (&'a str, &'a str, bool) {
    let (body, ending) = split_ending(line);
    let chars: Vec<(usize, char)> = body.char_indices().collect();
    let mut k = 0;
    while k < chars.len() {
        let (idx, c) = chars[k];
        if let Some(open) = state.string {
            if c == '\\' {
                k += 2;
                continue;
            }
            if c == open.quote {
                if !open.triple {
                    state.string = None;
                } else if chars.get(k + 1).map(|x| x.1) == Some(c) && chars.get(k + 2).map(|x| x.1) == Some(c) {
                    state.string = None;
                    k += 2;
                }
            }
            k += 1;
            continue;
        }
        match c {
            '#' => return (&body[..idx], ending, true),
            '"' | '\'' => {
                let triple = chars.get(k + 1).map(|x| x.1) == Some(c) && chars.get(k + 2).map(|x| x.1) == Some(c);
                state.string = Some(OpenString { quote: c, triple });
                k += if triple { 3 } else { 1 };
                continue;
            }
            '(' | '[' | '{' => state.depth += 1,
            ')' | ']' | '}' => state.depth = (state.depth - 1).max(0),
            _ => {}
        }
        k += 1;
    }
    if state.string.is_some_and(|s| !s.triple) {
        state.string = None;
    }
    (body, ending, false)
}

/// If `lines[0]` starts a statement made only of a string literal (possibly
/// spanning several lines, possibly followed by a comment), returns how many
/// lines it occupies.
fn docstring_statement(lines: &[&str]) -> Option<usize> {
    let first = lines[0].trim_start_matches([' ', '\t']);
    let quote = first.chars().next().filter(|c| *c == '"' || *c == '\'')?;
    let triple = first.starts_with(&quote.to_string().repeat(3));
    let offset = lines[0].len() - first.len() + if triple { 3 } else { 1 };
    let mut line_idx = 0;
    let mut rest: &str = &lines[0][offset..];
    loop {
        let chars: Vec<(usize, char)> = rest.char_indices().collect();
        let mut k = 0;
        let mut closed_at = None;
        while k < chars.len() {
            let (idx, c) = chars[k];
            if c == '\\' {
                k += 2;
                continue;
            }
            if c == '\n' && !triple {
                return None;
            }
            if c == quote {
                if !triple {
                    closed_at = Some(idx + 1);
                    break;
                }
                if chars.get(k + 1).map(|x| x.1) == Some(quote) && chars.get(k + 2).map(|x| x.1) == Some(quote) {
                    closed_at = Some(idx + 3);
                    break;
                }
            }
            k += 1;
        }
        if let Some(end) = closed_at {
            let tail = split_ending(&rest[end..]).0.trim();
            return (tail.is_empty() || tail.starts_with('#')).then_some(line_idx + 1);
        }
        if !triple {
            return None;
        }
        line_idx += 1;
        rest = lines.get(line_idx)?;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trailing_comment() {
        assert_eq!(strip_comments("aw.takeoff() # lift off"), "aw.takeoff()");
        assert_eq!(strip_comments("aw.takeoff()  # lift off\naw.land()\n"), "aw.takeoff()\naw.land()\n");
    }

    #[test]
    fn comment_only_line_removed() {
        assert_eq!(strip_comments("# climb\naw.takeoff()\n    # note\naw.land()\n"), "aw.takeoff()\naw.land()\n");
    }

    #[test]
    fn comment_free_is_identity() {
        let src = "aw.takeoff()\n\nfor i in range(4):\n    aw.set_yaw(90 * i)\r\n";
        assert_eq!(strip_comments(src), src);
    }

    #[test]
    fn docstrings_removed() {
        let src = "\"\"\"Square pattern.\n\nFive meters.\"\"\"\naw.takeoff()\n    'inline note'  # and a comment\naw.land()\n";
        assert_eq!(strip_comments(src), "aw.takeoff()\naw.land()\n");
    }

    #[test]
    fn hash_inside_string_is_not_a_comment() {
        let src = "x = '#not' # real\n";
        assert_eq!(strip_comments(src), "x = '#not'\n");
    }

    #[test]
    fn string_in_expression_is_kept() {
        let src = "'a' + b\n";
        assert_eq!(strip_comments(src), src);
    }
}
