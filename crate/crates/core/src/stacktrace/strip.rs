//! Removal of per-run noise from trace text.
//!
//! The rule list is explicit and versioned. Anything not matched by a rule is
//! kept: leaving noise in is recoverable, deleting a function name is not.

use std::sync::LazyLock;

use regex::Regex;

use super::parse::PreprocessedTrace;

/// Bumped whenever a rule below changes, so datasets can record which rules
/// produced them.
pub const STRIP_RULES_VERSION: u32 = 1;

/// Lines dropped entirely: thread banners, inferior/process notices,
/// register dumps.
static DROP_LINE: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(concat!(
        r"^\s*(?:",
        r"\[?(?:New |Switching to )?Thread\s+(?:\d+|0x[0-9a-fA-F]+)\b.*",
        r"|\[Inferior \d+ \(process \d+\).*",
        r"|\[Thread debugging using .*",
        r"|Using host libthread_db.*",
        r"|(?:[re]?[abcd]x|[re]?[sd]i|[re]?[sb]p|[re]?ip|r\d{1,2}[dwb]?|eflags|[c-gs]s|[fg]s_base|k\d)\s+0x[0-9a-fA-F]+.*",
        r")\s*$"
    ))
    .expect("valid regex")
});

static THREAD_SIGNAL: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r#"^Thread\s+\d+(?:\s+"[^"]*")?\s+(received|terminated with) signal"#).expect("valid regex")
});

static ADDRESS_IN: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"0x[0-9a-fA-F]+\s+in\s+").expect("valid regex"));

static HEX: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"\s*\b0x[0-9a-fA-F]+\b").expect("valid regex"));

static INLINE_DYNAMIC: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(concat!(
        r"\s*(?:",
        r"\(?\bLWP\s+\d+\)?",
        r"|\(?\bprocess\s+\d+\)?",
        r"|\b\d{4}-\d{2}-\d{2}[T ]\d{2}:\d{2}:\d{2}(?:\.\d+)?(?:Z|[+-]\d{2}:?\d{2})?",
        r"|\b\d{1,2}:\d{2}:\d{2}(?:\.\d+)?\b",
        r"|\$(?:[re]?[abcd]x|[re]?[sd]i|[re]?[sb]p|[re]?ip|r\d{1,2}|eflags)\b",
        r")"
    ))
    .expect("valid regex")
});

/// Strip dynamic components from one line. `None` when the whole line is
/// dynamic (thread banner, register dump, ...).
pub fn strip_line(line: &str) -> Option<String> {
    let line = THREAD_SIGNAL.replace(line, "Program $1 signal");
    if DROP_LINE.is_match(&line) {
        return None;
    }
    let line = ADDRESS_IN.replace_all(&line, "in ");
    let line = strip_argument_values(&line);
    let line = HEX.replace_all(&line, "");
    let line = INLINE_DYNAMIC.replace_all(&line, "");
    Some(line.trim_end().to_string())
}

/// Multi-line variant of [`strip_line`]: dropped lines disappear.
pub fn strip_text(text: &str) -> String {
    text.lines().filter_map(strip_line).collect::<Vec<_>>().join("\n")
}

/// Apply the strip rules to every frame and the signal line. Function, file
/// and line fields are static and survive untouched except for embedded
/// addresses.
pub fn strip_dynamic(mut trace: PreprocessedTrace) -> PreprocessedTrace {
    for frame in &mut trace.frames {
        frame.raw = strip_line(&frame.raw).unwrap_or_default();
        if HEX.is_match(&frame.function) {
            let cleaned = HEX.replace_all(&frame.function, "").trim().to_string();
            if !cleaned.is_empty() {
                frame.function = cleaned;
            }
        }
    }
    trace.signal_line = trace.signal_line.as_deref().and_then(strip_line);
    trace
}

/// `f (n=24, p=0x0, s=0x5 "a, b")` becomes `f (n, p, s)`: parameter names
/// stay, values go.
fn strip_argument_values(line: &str) -> String {
    let Some(open) = find_args_open(line) else {
        return line.to_string();
    };
    let bytes = line.as_bytes();
    let mut depth = 0usize;
    let mut in_string = false;
    let mut close = None;
    let mut i = open;
    while i < bytes.len() {
        let b = bytes[i];
        if in_string {
            match b {
                b'\\' => i += 1,
                b'"' => in_string = false,
                _ => {}
            }
        } else {
            match b {
                b'"' => in_string = true,
                b'(' => depth += 1,
                b')' => {
                    depth -= 1;
                    if depth == 0 {
                        close = Some(i);
                        break;
                    }
                }
                _ => {}
            }
        }
        i += 1;
    }
    let Some(close) = close else {
        return line.to_string();
    };
    let inner = &line[open + 1..close];
    if !inner.contains('=') {
        return line.to_string();
    }
    let names: Vec<&str> = split_top_level(inner)
        .into_iter()
        .map(|arg| arg.split('=').next().unwrap_or("").trim())
        .filter(|n| !n.is_empty())
        .collect();
    format!("{}({}){}", &line[..open], names.join(", "), &line[close + 1..])
}

/// Opening paren of the argument list: the first `(` preceded by ` ` after
/// the function name, i.e. followed by `name=` or `)`.
fn find_args_open(line: &str) -> Option<usize> {
    line.match_indices(" (").map(|(i, _)| i + 1).find(|&i| {
        let rest = &line[i + 1..];
        rest.starts_with(')')
            || rest
                .split_once('=')
                .is_some_and(|(name, _)| !name.is_empty() && name.chars().all(|c| c.is_alphanumeric() || c == '_'))
    })
}

fn split_top_level(s: &str) -> Vec<&str> {
    let mut parts = Vec::new();
    let (mut depth, mut in_string, mut start) = (0i32, false, 0);
    let bytes = s.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        match bytes[i] {
            b'\\' if in_string => i += 1,
            b'"' => in_string = !in_string,
            b'(' | b'{' | b'[' | b'<' if !in_string => depth += 1,
            b')' | b'}' | b']' | b'>' if !in_string => depth -= 1,
            b',' if !in_string && depth == 0 => {
                parts.push(&s[start..i]);
                start = i + 1;
            }
            _ => {}
        }
        i += 1;
    }
    parts.push(&s[start..]);
    parts
}
