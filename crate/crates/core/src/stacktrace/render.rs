use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use super::parse::{Frame, PreprocessedTrace};
use super::TraceError;

pub const MIN_TOKEN_BUDGET: usize = 32;

/// Approximate token counting. Model tokenizers differ; the contract here is
/// only that rendered text fits the budget under the chosen approximation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum TokenCounter {
    /// Words and individual punctuation characters.
    Lexical,
    /// `ceil(chars / n)` per line.
    CharsPerToken(f64),
}

impl Default for TokenCounter {
    fn default() -> Self {
        TokenCounter::Lexical
    }
}

static LEXICAL_UNIT: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"\w+|[^\w\s]").expect("valid regex"));

impl TokenCounter {
    pub fn count(&self, text: &str) -> usize {
        match *self {
            TokenCounter::Lexical => LEXICAL_UNIT.find_iter(text).count(),
            TokenCounter::CharsPerToken(n) => {
                let n = if n > 0.0 { n } else { 1.0 };
                (text.chars().count() as f64 / n).ceil() as usize
            }
        }
    }
}

/// One rendered line: `#<idx>  in <function> at <file>:<line>`.
pub fn render_frame(position: usize, frame: &Frame) -> String {
    match (&frame.file, frame.line) {
        (Some(file), Some(line)) => format!("#{position}  in {} at {file}:{line}", frame.function),
        (Some(file), None) => format!("#{position}  in {} at {file}", frame.function),
        _ => format!("#{position}  in {}", frame.function),
    }
}

/// Render innermost-first, one frame per line, signal line last. Frames are
/// dropped from the outermost end until the text fits `budget`; the
/// innermost frame is always kept.
pub fn render(trace: &PreprocessedTrace, budget: usize, counter: TokenCounter) -> Result<String, TraceError> {
    if budget < MIN_TOKEN_BUDGET {
        return Err(TraceError::BudgetTooSmall {
            budget,
            minimum: MIN_TOKEN_BUDGET,
        });
    }
    let lines: Vec<String> = trace
        .frames
        .iter()
        .enumerate()
        .map(|(i, f)| render_frame(i, f))
        .collect();
    let signal_cost = trace.signal_line.as_deref().map_or(0, |s| counter.count(s));

    let mut used = signal_cost;
    let mut keep = 0;
    for line in &lines {
        let cost = counter.count(line);
        if keep > 0 && used + cost > budget {
            break;
        }
        used += cost;
        keep += 1;
    }

    let mut out: Vec<&str> = lines[..keep].iter().map(String::as_str).collect();
    if let Some(sig) = trace.signal_line.as_deref() {
        out.push(sig);
    }
    Ok(out.join("\n"))
}

static RENDERED_FRAME: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"^#(?P<idx>\d+)\s+in\s+(?P<func>.+?)(?:\s+at\s+(?P<file>\S+?)(?::(?P<line>\d+))?)?\s*$")
        .expect("valid regex")
});

/// Frames read back from rendered text, in rendered order.
pub fn rendered_frames(rendered: &str) -> Vec<Frame> {
    rendered
        .lines()
        .filter_map(|l| {
            let c = RENDERED_FRAME.captures(l.trim())?;
            Some(Frame {
                index: c["idx"].parse().ok()?,
                function: c["func"].to_string(),
                file: c.name("file").map(|m| m.as_str().to_string()),
                line: c.name("line").and_then(|m| m.as_str().parse().ok()),
                raw: l.to_string(),
            })
        })
        .collect()
}

/// Last `::` component, template arguments of the enclosing scope ignored.
pub fn unqualified(name: &str) -> &str {
    let name = name.trim();
    let mut depth = 0i32;
    let mut cut = 0;
    let bytes = name.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        match bytes[i] {
            b'<' => depth += 1,
            b'>' => depth -= 1,
            b':' if depth == 0 && bytes.get(i + 1) == Some(&b':') => {
                cut = i + 2;
                i += 1;
            }
            _ => {}
        }
        i += 1;
    }
    &name[cut..]
}
