use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use super::TraceError;

/// One stack frame. `index` is the depth ordinal, 0 = most recent call.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Frame {
    pub index: usize,
    pub function: String,
    pub file: Option<String>,
    pub line: Option<u32>,
    pub raw: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SourceFormat {
    /// GNU debugger `bt` output, innermost frame first (`#0`).
    GdbTopFirst,
    /// A crash dump whose stack section lists the outermost frame first.
    HanaDump,
    /// Bare `func at file:line` lines, innermost first. Function names may
    /// not contain spaces in this format.
    Generic,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PreprocessedTrace {
    pub frames: Vec<Frame>,
    pub signal_line: Option<String>,
    pub source_format: SourceFormat,
    /// Set once frames have been put innermost-first.
    #[serde(default)]
    pub normalized: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseOptions {
    /// Line that opens the stack section of a [`SourceFormat::HanaDump`].
    pub dump_section_marker: String,
}

impl Default for ParseOptions {
    fn default() -> Self {
        ParseOptions {
            dump_section_marker: "[CRASH_STACK]".to_string(),
        }
    }
}

static GDB_FRAME: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(
        r"^#(?P<idx>\d+)\s+(?:0x[0-9a-fA-F]+\s+in\s+)?(?P<func>.+?)(?:\s+(?P<args>\(.*\)))?(?:\s+at\s+(?P<file>\S+?):(?P<line>\d+))?(?:\s+from\s+(?P<lib>\S+))?\s*$",
    )
    .expect("valid regex")
});

static GENERIC_FRAME: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(
        r"^(?:#?\d+[:.]?\s+)?(?:0x[0-9a-fA-F]+\s+(?:in\s+)?)?(?P<func>operator\S+?|[A-Za-z_~][\w:~<>,*&\[\]]*?)\s*(?P<args>\([^()]*(?:\([^()]*\)[^()]*)*\))?(?:\s+const)?(?:\s*\+\s*0x[0-9a-fA-F]+)?(?:\s+(?:(?:at|in)\s+)?(?P<file>[^\s:()]+):(?P<line>\d+)(?::\d+)?)?(?:\s+\((?P<lib>[^()]*)\))?(?:\s+from\s+\S+)?\s*$",
    )
    .expect("valid regex")
});

static SIGNAL_LINE: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"(?:received|terminated with) signal (SIG[A-Z0-9]+)").expect("valid regex")
});

/// Name of the signal mentioned by a debugger line such as
/// `Program received signal SIGSEGV, Segmentation fault.`
pub fn signal_name(line: &str) -> Option<&str> {
    SIGNAL_LINE
        .captures(line)
        .and_then(|c| c.get(1))
        .map(|m| m.as_str())
}

/// Parse raw debugger or dump text into frames (still unstripped).
pub fn parse_trace(raw: &str, format: SourceFormat, opts: &ParseOptions) -> Result<PreprocessedTrace, TraceError> {
    let signal_line = raw
        .lines()
        .map(str::trim)
        .find(|l| signal_name(l).is_some())
        .map(str::to_string);

    let frames = match format {
        SourceFormat::GdbTopFirst => parse_gdb(raw),
        SourceFormat::HanaDump => parse_generic(dump_section(raw, &opts.dump_section_marker)),
        SourceFormat::Generic => parse_generic(raw.lines()),
    };
    if frames.is_empty() {
        return Err(TraceError::NoFramesFound);
    }
    Ok(PreprocessedTrace {
        frames,
        signal_line,
        source_format: format,
        normalized: false,
    })
}

fn parse_gdb(raw: &str) -> Vec<Frame> {
    let mut frames: Vec<Frame> = Vec::new();
    for line in raw.lines().map(str::trim) {
        let Some(c) = GDB_FRAME.captures(line) else { continue };
        let index: usize = c["idx"].parse().unwrap_or(frames.len());
        // A second `bt` (e.g. one per thread) restarts at #0; keep the first.
        if index == 0 && !frames.is_empty() {
            break;
        }
        let function = c["func"].trim().to_string();
        if function.is_empty() {
            continue;
        }
        let (file, line_no) = location(c.name("file").map(|m| m.as_str()), c.name("line").map(|m| m.as_str()));
        frames.push(Frame {
            index,
            function,
            file,
            line: line_no,
            raw: line.to_string(),
        });
    }
    frames
}

fn parse_generic<'a>(lines: impl Iterator<Item = &'a str>) -> Vec<Frame> {
    let mut frames = Vec::new();
    for line in lines.map(str::trim) {
        if line.is_empty() || signal_name(line).is_some() {
            continue;
        }
        let Some(c) = GENERIC_FRAME.captures(line) else { continue };
        let function = c["func"].trim().to_string();
        let (file, line_no) = location(c.name("file").map(|m| m.as_str()), c.name("line").map(|m| m.as_str()));
        frames.push(Frame {
            index: frames.len(),
            function,
            file,
            line: line_no,
            raw: line.to_string(),
        });
    }
    frames
}

fn location(file: Option<&str>, line: Option<&str>) -> (Option<String>, Option<u32>) {
    match (file, line.and_then(|l| l.parse::<u32>().ok()).filter(|&l| l > 0)) {
        (Some(f), Some(l)) => (Some(f.to_string()), Some(l)),
        (Some(f), None) => (Some(f.to_string()), None),
        _ => (None, None),
    }
}

/// Lines after the marker up to the first blank line.
fn dump_section<'a>(raw: &'a str, marker: &'a str) -> impl Iterator<Item = &'a str> {
    raw.lines()
        .skip_while(move |l| l.trim() != marker)
        .skip(1)
        .take_while(|l| !l.trim().is_empty())
}

/// Put the most recent call first. Idempotent.
pub fn normalize_order(mut trace: PreprocessedTrace) -> PreprocessedTrace {
    if trace.normalized {
        return trace;
    }
    match trace.source_format {
        SourceFormat::GdbTopFirst | SourceFormat::Generic => {}
        SourceFormat::HanaDump => trace.frames.reverse(),
    }
    for (i, f) in trace.frames.iter_mut().enumerate() {
        f.index = i;
    }
    trace.normalized = true;
    trace
}
