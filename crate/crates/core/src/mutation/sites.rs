use std::collections::BTreeSet;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use super::kinds::MutatorKind;
use super::syntax::{parse_int_literal, SyntaxIndex, TokenClass, TokenSite};

/// A whole line referenced by a `LineOrder` swap.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LineRef {
    pub offset: usize,
    pub length: usize,
    pub original: String,
}

/// What goes into the edited span. `Delete` uses an empty `Text`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Replacement {
    Text(String),
    Swap(LineRef),
}

impl Replacement {
    pub fn as_text(&self) -> Option<&str> {
        match self {
            Replacement::Text(t) => Some(t),
            Replacement::Swap(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MutationSite {
    pub file: PathBuf,
    pub offset: usize,
    pub length: usize,
    pub original: String,
    pub kind: MutatorKind,
    pub enclosing_function: String,
    pub enclosing_file: PathBuf,
    pub candidates: Vec<Replacement>,
}

impl MutationSite {
    pub fn span(&self) -> std::ops::Range<usize> {
        self.offset..self.offset + self.length
    }
}

/// Replacement texts for an integer literal, paired with the increment that
/// produced each. Increments that leave the value unchanged are dropped.
/// Hex/octal inputs come back in decimal; negatives are parenthesised.
pub fn number_candidates(lexeme: &str) -> Vec<(&'static str, String)> {
    let Some((value, suffix)) = parse_int_literal(lexeme) else {
        return Vec::new();
    };
    MutatorKind::Number
        .replacement_set()
        .iter()
        .filter_map(|&op| {
            let next = match op {
                "+255" => value + 255,
                "+1" => value + 1,
                "-1" => value - 1,
                "-255" => value - 255,
                "*(-1)" => -value,
                _ => unreachable!("unknown increment {op}"),
            };
            (next != value).then(|| {
                let text = if next < 0 {
                    format!("({next}{suffix})")
                } else {
                    format!("{next}{suffix}")
                };
                (op, text)
            })
        })
        .collect()
}

fn operator_sites_for(kind: MutatorKind, token: &TokenSite) -> bool {
    let set = kind.replacement_set();
    let text = token.text.as_str();
    match kind {
        MutatorKind::Assignment | MutatorKind::BooleanAssignment => {
            token.class == TokenClass::AssignOp && set.contains(&text)
        }
        MutatorKind::Comparison
        | MutatorKind::Arithmetic
        | MutatorKind::BooleanArithmetic
        | MutatorKind::Logical => token.class == TokenClass::BinaryOp && set.contains(&text),
        MutatorKind::IncrementDecrement => token.class == TokenClass::UpdateOp && set.contains(&text),
        _ => false,
    }
}

/// Enumerate every mutation site of the requested kinds, ordered by
/// (file, offset, kind).
pub fn enumerate_sites(index: &SyntaxIndex, kinds: &BTreeSet<MutatorKind>) -> Vec<MutationSite> {
    let mut sites = Vec::new();
    let text = index.text();
    let functions = index.functions();
    let site = |offset: usize, length: usize, kind: MutatorKind, function: usize, candidates| MutationSite {
        file: index.path().to_path_buf(),
        offset,
        length,
        original: text[offset..offset + length].to_string(),
        kind,
        enclosing_function: functions[function].name.clone(),
        enclosing_file: index.path().to_path_buf(),
        candidates,
    };

    // Distinct identifiers per function, for Symbol.
    let mut identifiers: Vec<BTreeSet<&str>> = vec![BTreeSet::new(); functions.len()];
    for t in index.tokens() {
        if t.class == TokenClass::Identifier {
            identifiers[t.function].insert(t.text.as_str());
        }
    }

    for token in index.tokens() {
        for &kind in kinds {
            match kind {
                MutatorKind::Number if token.class == TokenClass::IntLiteral => {
                    let candidates: Vec<Replacement> = number_candidates(&token.text)
                        .into_iter()
                        .map(|(_, t)| Replacement::Text(t))
                        .collect();
                    if !candidates.is_empty() {
                        sites.push(site(token.span.start, token.span.len(), kind, token.function, candidates));
                    }
                }
                MutatorKind::Symbol if token.class == TokenClass::Identifier => {
                    let candidates: Vec<Replacement> = identifiers[token.function]
                        .iter()
                        .filter(|&&id| id != token.text)
                        .map(|id| Replacement::Text(id.to_string()))
                        .collect();
                    if !candidates.is_empty() {
                        sites.push(site(token.span.start, token.span.len(), kind, token.function, candidates));
                    }
                }
                k if k.is_set_based() && k != MutatorKind::Number && operator_sites_for(k, token) => {
                    let candidates = k
                        .replacement_set()
                        .iter()
                        .filter(|&&s| s != token.text)
                        .map(|s| Replacement::Text(s.to_string()))
                        .collect();
                    sites.push(site(token.span.start, token.span.len(), k, token.function, candidates));
                }
                _ => {}
            }
        }
    }

    let lines = index.statement_lines();
    for line in lines {
        if kinds.contains(&MutatorKind::Delete) {
            sites.push(site(
                line.span.start,
                line.span.len(),
                MutatorKind::Delete,
                line.function,
                vec![Replacement::Text(String::new())],
            ));
        }
        if kinds.contains(&MutatorKind::LineOrder) {
            let partners: Vec<Replacement> = lines
                .iter()
                .filter(|other| {
                    other.function == line.function
                        && other.span != line.span
                        && text[other.span.clone()] != text[line.span.clone()]
                })
                .map(|other| {
                    Replacement::Swap(LineRef {
                        offset: other.span.start,
                        length: other.span.len(),
                        original: text[other.span.clone()].to_string(),
                    })
                })
                .collect();
            if !partners.is_empty() {
                sites.push(site(line.span.start, line.span.len(), MutatorKind::LineOrder, line.function, partners));
            }
        }
    }

    sites.sort_by(|a, b| {
        (&a.file, a.offset, a.kind, a.length).cmp(&(&b.file, b.offset, b.kind, b.length))
    });
    sites
}
