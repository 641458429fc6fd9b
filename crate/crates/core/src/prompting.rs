//! Fine-tuning examples and zero-shot prompts.

use serde::{Deserialize, Serialize};

use crate::dataset::Sample;
use crate::stacktrace::TokenCounter;

/// End-of-generation marker appended to every completion.
pub const END_OF_TEXT: &str = "<|endoftext|>";

/// The canonical zero-shot prompt. Placeholders: `{PROJECT}`, `{LANGUAGE}`,
/// `{DEVELOPER_LANGUAGE}`, `{DESCRIPTION}`, `{STACK}`.
pub const DEFAULT_ZERO_SHOT_TEMPLATE: &str = "\
ROLE: You are a software engineering assistant who can analyze stack traces from a crash and assist a {DEVELOPER_LANGUAGE} developer in localizing the fault to a method in the stack trace.
TASK: Given a stack trace, identify the function name that most likely caused the crash. The faulty method is not necessarily closer to the last frame in the stack trace.
INPUT: Preprocessed stack traces that resulted from a crash in the {DESCRIPTION} {PROJECT}, which has been written in {LANGUAGE}.

[CRASH STACK]:
{STACK}
OUTPUT: Strictly provide only the function name without any additional information in the format:
<function_name>
";

const FUNCTION_DEFINITIONS_HEADER: &str = "FUNCTION DEFINITIONS:";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProjectMeta {
    pub name: String,
    /// e.g. "C programming language".
    pub language_label: String,
    /// e.g. "open-source Database project".
    pub description: String,
}

impl ProjectMeta {
    pub fn new(name: &str, language_label: &str, description: &str) -> Result<Self, PromptError> {
        let meta = ProjectMeta {
            name: name.trim().to_string(),
            language_label: language_label.trim().to_string(),
            description: description.trim().to_string(),
        };
        if meta.name.is_empty() || meta.language_label.is_empty() || meta.description.is_empty() {
            return Err(PromptError::EmptyMeta);
        }
        Ok(meta)
    }

    /// Language as an adjective for "a ... developer": the label without a
    /// trailing "programming language".
    pub fn developer_language(&self) -> &str {
        self.language_label
            .strip_suffix("programming language")
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .unwrap_or(&self.language_label)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PromptError {
    #[error("sample {0} has an empty trace")]
    EmptyTrace(String),
    #[error("sample {0} trace already contains the end-of-text marker")]
    MarkerInPrompt(String),
    #[error("project metadata fields must be non-empty")]
    EmptyMeta,
    #[error("template is missing the {{STACK}} placeholder")]
    TemplateWithoutStack,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FinetuneExample {
    pub prompt: String,
    pub completion: String,
}

impl FinetuneExample {
    /// Training text: prompt immediately followed by completion.
    pub fn text(&self) -> String {
        format!("{}{}", self.prompt, self.completion)
    }
}

/// Prompt is the rendered trace plus a newline; completion is
/// `file function<|endoftext|>`.
pub fn finetune_example(sample: &Sample) -> Result<FinetuneExample, PromptError> {
    if sample.rendered_trace.trim().is_empty() {
        return Err(PromptError::EmptyTrace(sample.id.clone()));
    }
    if sample.rendered_trace.contains(END_OF_TEXT) {
        return Err(PromptError::MarkerInPrompt(sample.id.clone()));
    }
    Ok(FinetuneExample {
        prompt: format!("{}\n", sample.rendered_trace),
        completion: format!("{}{END_OF_TEXT}", sample.target()),
    })
}

/// A zero-shot prompt template, the built-in one unless overridden.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptTemplate(String);

impl Default for PromptTemplate {
    fn default() -> Self {
        PromptTemplate(DEFAULT_ZERO_SHOT_TEMPLATE.to_string())
    }
}

impl PromptTemplate {
    pub fn new(text: impl Into<String>) -> Result<Self, PromptError> {
        let text = text.into();
        if !text.contains("{STACK}") {
            return Err(PromptError::TemplateWithoutStack);
        }
        Ok(PromptTemplate(text))
    }

    pub fn fill(&self, meta: &ProjectMeta, stack: &str) -> String {
        self.0
            .replace("{PROJECT}", &meta.name)
            .replace("{DEVELOPER_LANGUAGE}", meta.developer_language())
            .replace("{LANGUAGE}", &meta.language_label)
            .replace("{DESCRIPTION}", &meta.description)
            .replace("{STACK}", stack)
    }
}

pub fn zero_shot_prompt(sample: &Sample, meta: &ProjectMeta) -> String {
    PromptTemplate::default().fill(meta, &sample.rendered_trace)
}

/// Insert function sources after the crash stack, before the OUTPUT section
/// (or at the end when there is none). An empty list leaves the prompt as is.
pub fn augment_with_functions(prompt: &str, sources: &[(String, String)]) -> String {
    if sources.is_empty() {
        return prompt.to_string();
    }
    let mut block = format!("{FUNCTION_DEFINITIONS_HEADER}\n");
    for (name, body) in sources {
        block.push_str(&format!("// {name}\n{}\n", body.trim_end()));
    }
    match prompt.rfind("\nOUTPUT:") {
        Some(at) => format!("{}\n{}{}", &prompt[..at], block.trim_end(), &prompt[at..]),
        None => {
            let sep = if prompt.ends_with('\n') { "" } else { "\n" };
            format!("{prompt}{sep}{block}")
        }
    }
}

/// Drop sources that belong to test or unwinding frameworks, by name prefix.
pub fn exclude_framework_functions(
    sources: Vec<(String, String)>,
    framework_prefixes: &[&str],
) -> Vec<(String, String)> {
    sources
        .into_iter()
        .filter(|(name, _)| !framework_prefixes.iter().any(|p| name.starts_with(p)))
        .collect()
}

/// Augment, dropping sources from the outermost end until the prompt fits
/// `budget` (or no sources remain).
pub fn augment_within_budget(
    prompt: &str,
    sources: &[(String, String)],
    budget: usize,
    counter: TokenCounter,
) -> String {
    let mut keep = sources.len();
    loop {
        let out = augment_with_functions(prompt, &sources[..keep]);
        if keep == 0 || counter.count(&out) <= budget {
            return out;
        }
        keep -= 1;
    }
}
