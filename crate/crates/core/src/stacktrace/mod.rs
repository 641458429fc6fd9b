//! Debugger backtrace parsing and preprocessing.
//!
//! The usual pipeline is [`parse_trace`] → [`normalize_order`] →
//! [`strip_dynamic`] → [`render`]; [`preprocess`] runs all four.

mod obfuscate;
mod parse;
mod render;
mod strip;

pub use obfuscate::{obfuscate, ObfuscationMode};
pub use parse::{normalize_order, parse_trace, signal_name, Frame, ParseOptions, PreprocessedTrace, SourceFormat};
pub use render::{render, render_frame, rendered_frames, unqualified, TokenCounter, MIN_TOKEN_BUDGET};
pub use strip::{strip_dynamic, strip_line, strip_text, STRIP_RULES_VERSION};

/// Input limit used for all prompts and fine-tuning examples.
pub const DEFAULT_TOKEN_BUDGET: usize = 1024;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TraceError {
    #[error("no stack frames found in trace")]
    NoFramesFound,
    #[error("token budget {budget} is below the minimum of {minimum}")]
    BudgetTooSmall { budget: usize, minimum: usize },
}

/// Parse, normalize, strip and render raw debugger output.
pub fn preprocess(
    raw: &str,
    format: SourceFormat,
    opts: &ParseOptions,
    budget: usize,
    counter: TokenCounter,
) -> Result<String, TraceError> {
    let trace = strip_dynamic(normalize_order(parse_trace(raw, format, opts)?));
    render(&trace, budget, counter)
}
