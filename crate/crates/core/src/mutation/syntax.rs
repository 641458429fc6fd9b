//! Grammar-aware index over a single C or C++ translation unit.
//!
//! The index records function definitions (with qualified names), the
//! operator/literal/identifier tokens inside their bodies, and single-line
//! statements. Everything needed to enumerate mutation sites lives here so
//! that the tree-sitter tree itself never escapes this module.

use std::ops::Range;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use tree_sitter::{Node, Parser};

use super::MutationError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Language {
    C,
    Cpp,
}

impl Language {
    pub fn from_path(path: &Path) -> Option<Language> {
        match path.extension()?.to_str()? {
            "c" | "h" => Some(Language::C),
            "cc" | "cpp" | "cxx" | "c++" | "C" | "hh" | "hpp" | "hxx" | "h++" | "inl" => {
                Some(Language::Cpp)
            }
            _ => None,
        }
    }

    fn grammar(self) -> tree_sitter::Language {
        match self {
            Language::C => tree_sitter_c::LANGUAGE.into(),
            Language::Cpp => tree_sitter_cpp::LANGUAGE.into(),
        }
    }
}

/// What a token is, as far as mutators care.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TokenClass {
    /// `=` and compound assignments, including the `=` of an initialising declaration.
    AssignOp,
    /// Binary operator of a binary expression.
    BinaryOp,
    /// `++` / `--`.
    UpdateOp,
    /// Integer literal (floats are not recorded).
    IntLiteral,
    Identifier,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenSite {
    pub span: Range<usize>,
    pub text: String,
    pub class: TokenClass,
    /// Index into [`SyntaxIndex::functions`] of the innermost enclosing function.
    pub function: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FunctionSpan {
    pub name: String,
    /// Whole definition, signature included.
    pub span: Range<usize>,
    /// The body's compound statement, braces included.
    pub body: Range<usize>,
    /// The definition contains a syntax error; no sites are taken from it.
    pub has_error: bool,
}

/// A line holding exactly one simple statement and nothing else.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StatementLine {
    /// Line content without the line terminator.
    pub span: Range<usize>,
    pub function: usize,
}

#[derive(Debug, Clone)]
pub struct SyntaxIndex {
    path: PathBuf,
    language: Language,
    text: String,
    functions: Vec<FunctionSpan>,
    tokens: Vec<TokenSite>,
    statement_lines: Vec<StatementLine>,
    line_starts: Vec<usize>,
    error_regions: Vec<Range<usize>>,
}

const STATEMENT_KINDS: &[&str] = &[
    "expression_statement",
    "return_statement",
    "declaration",
    "break_statement",
    "continue_statement",
    "goto_statement",
];

/// Parse a source buffer. Invalid UTF-8 bytes are replaced one-for-one with
/// `?` so byte offsets stay exact. Syntax errors never fail the parse; the
/// affected functions simply contribute no sites.
pub fn parse_source(
    path: impl Into<PathBuf>,
    text: &[u8],
    language: Language,
) -> Result<SyntaxIndex, MutationError> {
    let text = sanitize(text);
    let mut parser = Parser::new();
    parser
        .set_language(&language.grammar())
        .map_err(|e| MutationError::Grammar(e.to_string()))?;
    let tree = parser
        .parse(text.as_bytes(), None)
        .ok_or_else(|| MutationError::Grammar("parser returned no tree".into()))?;

    let mut builder = Builder {
        src: text.as_str(),
        functions: Vec::new(),
        raw_tokens: Vec::new(),
        statements: Vec::new(),
        error_regions: Vec::new(),
    };
    builder.walk(tree.root_node());
    let Builder {
        mut functions,
        raw_tokens,
        statements,
        mut error_regions,
        ..
    } = builder;

    functions.sort_by(|a, b| a.span.start.cmp(&b.span.start).then(b.span.end.cmp(&a.span.end)));
    error_regions.sort_by_key(|r| (r.start, r.end));
    let line_starts = line_starts(&text);

    let mut index = SyntaxIndex {
        path: path.into(),
        language,
        text,
        functions,
        tokens: Vec::new(),
        statement_lines: Vec::new(),
        line_starts,
        error_regions,
    };

    let mut tokens: Vec<TokenSite> = raw_tokens
        .into_iter()
        .filter_map(|(span, class)| {
            let function = index.innermost_body(span.clone())?;
            if index.functions[function].has_error {
                return None;
            }
            Some(TokenSite {
                text: index.text[span.clone()].to_string(),
                span,
                class,
                function,
            })
        })
        .collect();
    tokens.sort_by_key(|t| (t.span.start, t.span.end));
    tokens.dedup_by(|a, b| a.span == b.span && a.class == b.class);
    index.tokens = tokens;

    let mut lines: Vec<StatementLine> = statements
        .into_iter()
        .filter_map(|stmt| index.statement_line(stmt))
        .collect();
    lines.sort_by_key(|l| l.span.start);
    lines.dedup_by_key(|l| l.span.start);
    index.statement_lines = lines;

    Ok(index)
}

/// Read and parse `root/relative`, picking the grammar from the extension.
pub fn parse_file(root: &Path, relative: &Path) -> Result<SyntaxIndex, MutationError> {
    let language = Language::from_path(relative)
        .ok_or_else(|| MutationError::UnsupportedLanguage(relative.display().to_string()))?;
    let bytes = std::fs::read(root.join(relative)).map_err(|source| MutationError::Io {
        path: root.join(relative),
        source,
    })?;
    parse_source(relative, &bytes, language)
}

fn sanitize(bytes: &[u8]) -> String {
    match std::str::from_utf8(bytes) {
        Ok(s) => s.to_string(),
        Err(_) => {
            let mut out = String::with_capacity(bytes.len());
            let mut rest = bytes;
            loop {
                match std::str::from_utf8(rest) {
                    Ok(s) => {
                        out.push_str(s);
                        break;
                    }
                    Err(e) => {
                        let (good, bad) = rest.split_at(e.valid_up_to());
                        out.push_str(std::str::from_utf8(good).expect("validated prefix"));
                        let skip = e.error_len().unwrap_or(bad.len());
                        out.extend(std::iter::repeat('?').take(skip));
                        rest = &bad[skip..];
                    }
                }
            }
            out
        }
    }
}

fn line_starts(text: &str) -> Vec<usize> {
    std::iter::once(0)
        .chain(text.match_indices('\n').map(|(i, _)| i + 1))
        .collect()
}

struct Builder<'s> {
    src: &'s str,
    functions: Vec<FunctionSpan>,
    raw_tokens: Vec<(Range<usize>, TokenClass)>,
    statements: Vec<Range<usize>>,
    error_regions: Vec<Range<usize>>,
}

impl Builder<'_> {
    fn walk(&mut self, root: Node<'_>) {
        let mut cursor = root.walk();
        'outer: loop {
            let node = cursor.node();
            self.visit(node);
            if cursor.goto_first_child() {
                continue;
            }
            loop {
                if cursor.goto_next_sibling() {
                    continue 'outer;
                }
                if !cursor.goto_parent() {
                    break 'outer;
                }
            }
        }
    }

    fn visit(&mut self, node: Node<'_>) {
        if node.is_error() || node.is_missing() {
            self.error_regions.push(node.byte_range());
            return;
        }
        match node.kind() {
            "function_definition" => {
                if let (Some(body), Some(name)) =
                    (node.child_by_field_name("body"), function_name(node, self.src))
                {
                    self.functions.push(FunctionSpan {
                        name,
                        span: node.byte_range(),
                        body: body.byte_range(),
                        has_error: node.has_error(),
                    });
                }
            }
            "assignment_expression" | "binary_expression" | "update_expression" => {
                if let Some(op) = node.child_by_field_name("operator") {
                    let class = match node.kind() {
                        "assignment_expression" => TokenClass::AssignOp,
                        "binary_expression" => TokenClass::BinaryOp,
                        _ => TokenClass::UpdateOp,
                    };
                    self.raw_tokens.push((op.byte_range(), class));
                }
            }
            "init_declarator" => {
                let mut c = node.walk();
                let eq = node.children(&mut c).find(|n| !n.is_named() && n.kind() == "=");
                if let Some(eq) = eq {
                    self.raw_tokens.push((eq.byte_range(), TokenClass::AssignOp));
                }
            }
            "number_literal" => {
                if parse_int_literal(&self.src[node.byte_range()]).is_some() {
                    self.raw_tokens.push((node.byte_range(), TokenClass::IntLiteral));
                }
            }
            "identifier" => self.raw_tokens.push((node.byte_range(), TokenClass::Identifier)),
            k if STATEMENT_KINDS.contains(&k) => self.statements.push(node.byte_range()),
            _ => {}
        }
    }
}

fn node_text<'s>(node: Node<'_>, src: &'s str) -> &'s str {
    &src[node.byte_range()]
}

fn function_name(def: Node<'_>, src: &str) -> Option<String> {
    let mut decl = def.child_by_field_name("declarator")?;
    let name_node = loop {
        match decl.kind() {
            "function_declarator" => break decl.child_by_field_name("declarator")?,
            "pointer_declarator" | "reference_declarator" | "parenthesized_declarator"
            | "attributed_declarator" => {
                decl = match decl.child_by_field_name("declarator") {
                    Some(d) => d,
                    None => decl.named_child(decl.named_child_count().checked_sub(1)?)?,
                };
            }
            _ => return None,
        }
    };
    let base: String = node_text(name_node, src)
        .chars()
        .filter(|c| !c.is_whitespace())
        .collect();
    if base.is_empty() {
        return None;
    }

    let mut scopes = Vec::new();
    let mut parent = def.parent();
    while let Some(p) = parent {
        match p.kind() {
            "namespace_definition" | "class_specifier" | "struct_specifier" | "union_specifier" => {
                if let Some(n) = p.child_by_field_name("name") {
                    scopes.push(node_text(n, src).trim().to_string());
                }
            }
            // A local class inside a function is scoped by that function's body,
            // not by anything outside it.
            "function_definition" => break,
            _ => {}
        }
        parent = p.parent();
    }
    scopes.reverse();
    scopes.push(base);
    Some(scopes.join("::"))
}

/// Value and suffix of a C integer literal (decimal, hex, octal, binary,
/// optional `'` separators and u/l suffixes). `None` for floats and anything
/// unrecognised.
pub(crate) fn parse_int_literal(lexeme: &str) -> Option<(i128, &str)> {
    let body_end = lexeme
        .char_indices()
        .rev()
        .take_while(|(_, c)| matches!(c, 'u' | 'U' | 'l' | 'L' | 'z' | 'Z'))
        .last()
        .map(|(i, _)| i)
        .unwrap_or(lexeme.len());
    let (body, suffix) = lexeme.split_at(body_end);
    let digits: String = body.chars().filter(|&c| c != '\'').collect();
    if digits.is_empty() {
        return None;
    }
    let (radix, rest) = if let Some(h) = digits.strip_prefix("0x").or_else(|| digits.strip_prefix("0X")) {
        (16, h)
    } else if let Some(b) = digits.strip_prefix("0b").or_else(|| digits.strip_prefix("0B")) {
        (2, b)
    } else if digits.len() > 1 && digits.starts_with('0') {
        (8, &digits[1..])
    } else {
        (10, digits.as_str())
    };
    if rest.is_empty() || !rest.chars().all(|c| c.is_digit(radix)) {
        return None;
    }
    i128::from_str_radix(rest, radix).ok().map(|v| (v, suffix))
}

impl SyntaxIndex {
    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn language(&self) -> Language {
        self.language
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    pub fn functions(&self) -> &[FunctionSpan] {
        &self.functions
    }

    pub fn tokens(&self) -> &[TokenSite] {
        &self.tokens
    }

    pub fn statement_lines(&self) -> &[StatementLine] {
        &self.statement_lines
    }

    pub fn error_regions(&self) -> &[Range<usize>] {
        &self.error_regions
    }

    /// Zero-based line number of a byte offset.
    pub fn line_of(&self, offset: usize) -> usize {
        self.line_starts.partition_point(|&s| s <= offset).saturating_sub(1)
    }

    /// Content range of a zero-based line, terminator excluded.
    pub fn line_span(&self, line: usize) -> Range<usize> {
        let start = self.line_starts[line];
        let mut end = self
            .line_starts
            .get(line + 1)
            .map(|&next| next - 1)
            .unwrap_or(self.text.len());
        if end > start && self.text.as_bytes()[end - 1] == b'\r' {
            end -= 1;
        }
        start..end
    }

    /// Innermost function whose definition contains `offset`, with this
    /// index's file path. `None` at file scope.
    pub fn enclosing_function(&self, offset: usize) -> Option<(&str, &Path)> {
        self.functions
            .iter()
            .filter(|f| f.span.contains(&offset))
            .min_by_key(|f| f.span.len())
            .map(|f| (f.name.as_str(), self.path.as_path()))
    }

    fn innermost_body(&self, span: Range<usize>) -> Option<usize> {
        self.functions
            .iter()
            .enumerate()
            .filter(|(_, f)| f.body.start <= span.start && span.end <= f.body.end)
            .min_by_key(|(_, f)| f.body.len())
            .map(|(i, _)| i)
    }

    fn statement_line(&self, stmt: Range<usize>) -> Option<StatementLine> {
        let line = self.line_of(stmt.start);
        if self.line_of(stmt.end.saturating_sub(1).max(stmt.start)) != line {
            return None;
        }
        let span = self.line_span(line);
        if self.text[span.clone()].trim() != self.text[stmt.clone()].trim() {
            return None;
        }
        let function = self.innermost_body(span.clone())?;
        let f = &self.functions[function];
        if f.has_error || span.start <= f.body.start || span.end >= f.body.end {
            return None;
        }
        Some(StatementLine { span, function })
    }
}
