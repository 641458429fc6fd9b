use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// The eleven mutators. Set-based kinds replace a lexeme with another member
/// of a fixed set; `LineOrder`, `Delete` and `Symbol` draw their candidates
/// from the surrounding function instead.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum MutatorKind {
    Assignment,
    Number,
    LineOrder,
    BooleanAssignment,
    Delete,
    Comparison,
    Symbol,
    Arithmetic,
    IncrementDecrement,
    BooleanArithmetic,
    Logical,
}

impl MutatorKind {
    pub const ALL: [MutatorKind; 11] = [
        MutatorKind::Assignment,
        MutatorKind::Number,
        MutatorKind::LineOrder,
        MutatorKind::BooleanAssignment,
        MutatorKind::Delete,
        MutatorKind::Comparison,
        MutatorKind::Symbol,
        MutatorKind::Arithmetic,
        MutatorKind::IncrementDecrement,
        MutatorKind::BooleanArithmetic,
        MutatorKind::Logical,
    ];

    /// Kinds whose candidates come from a fixed replacement set.
    pub const SET_BASED: [MutatorKind; 8] = [
        MutatorKind::Assignment,
        MutatorKind::Number,
        MutatorKind::BooleanAssignment,
        MutatorKind::Comparison,
        MutatorKind::Arithmetic,
        MutatorKind::IncrementDecrement,
        MutatorKind::BooleanArithmetic,
        MutatorKind::Logical,
    ];

    /// Replacement set in table order. For `Number` these are the increments
    /// applied to the literal's value, not lexemes.
    pub fn replacement_set(self) -> &'static [&'static str] {
        match self {
            MutatorKind::Assignment => &["=", "+=", "-=", "*=", "/=", "%="],
            MutatorKind::Number => &["+255", "+1", "-1", "-255", "*(-1)"],
            MutatorKind::BooleanAssignment => &["=", "&=", "|=", "^="],
            MutatorKind::Comparison => &["==", "!=", "<", ">", "<=", ">="],
            MutatorKind::Arithmetic => &["+", "-", "*", "/", "%"],
            MutatorKind::IncrementDecrement => &["++", "--"],
            MutatorKind::BooleanArithmetic => &["&", "|", "^", "<<", ">>"],
            MutatorKind::Logical => &["&&", "and", "||", "or", "!=", "not"],
            MutatorKind::LineOrder | MutatorKind::Delete | MutatorKind::Symbol => &[],
        }
    }

    pub fn is_set_based(self) -> bool {
        !self.replacement_set().is_empty()
    }

    pub fn name(self) -> &'static str {
        match self {
            MutatorKind::Assignment => "Assignment",
            MutatorKind::Number => "Number",
            MutatorKind::LineOrder => "LineOrder",
            MutatorKind::BooleanAssignment => "BooleanAssignment",
            MutatorKind::Delete => "Delete",
            MutatorKind::Comparison => "Comparison",
            MutatorKind::Symbol => "Symbol",
            MutatorKind::Arithmetic => "Arithmetic",
            MutatorKind::IncrementDecrement => "IncrementDecrement",
            MutatorKind::BooleanArithmetic => "BooleanArithmetic",
            MutatorKind::Logical => "Logical",
        }
    }

    /// Short tag used as the mutation id prefix.
    pub(crate) fn tag(self) -> &'static str {
        match self {
            MutatorKind::Assignment => "asg",
            MutatorKind::Number => "num",
            MutatorKind::LineOrder => "lor",
            MutatorKind::BooleanAssignment => "bas",
            MutatorKind::Delete => "del",
            MutatorKind::Comparison => "cmp",
            MutatorKind::Symbol => "sym",
            MutatorKind::Arithmetic => "ari",
            MutatorKind::IncrementDecrement => "inc",
            MutatorKind::BooleanArithmetic => "bar",
            MutatorKind::Logical => "log",
        }
    }
}

impl fmt::Display for MutatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown mutator kind `{0}`")]
pub struct UnknownMutatorKind(pub String);

impl FromStr for MutatorKind {
    type Err = UnknownMutatorKind;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let wanted = s.trim();
        MutatorKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(wanted) || k.tag() == wanted)
            .ok_or_else(|| UnknownMutatorKind(s.to_string()))
    }
}
