use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use super::EvalError;
use crate::prompting::END_OF_TEXT;
use crate::stacktrace::{rendered_frames, unqualified};

const EXTENSION_STOPLIST: [&str; 8] = ["c", "cc", "cpp", "cxx", "h", "hh", "hpp", "hxx"];

/// Cut at the end-of-text marker, trim, and drop one `<...>` wrapper.
pub fn normalize_output(raw: &str) -> String {
    let cut = raw.find(END_OF_TEXT).map_or(raw, |at| &raw[..at]);
    let trimmed = cut.trim();
    match trimmed.strip_prefix('<').and_then(|s| s.strip_suffix('>')) {
        Some(inner) => inner.trim().to_string(),
        None => trimmed.to_string(),
    }
}

/// Case-sensitive equality of normalized texts.
pub fn exact_match(prediction: &str, target: &str) -> bool {
    prediction == target
}

/// Comparison key for a function name: arguments dropped, scope dropped.
pub fn function_key(name: &str) -> &str {
    let name = name.trim();
    let name = name.find('(').map_or(name, |at| name[..at].trim_end());
    unqualified(name)
}

/// Function part of a `file function` or bare `function` prediction.
pub fn predicted_function(prediction: &str) -> &str {
    prediction.split_whitespace().last().unwrap_or("")
}

/// True iff the prediction's function names any of the labelled methods.
pub fn multi_target_match(prediction: &str, labels: &[String]) -> Result<bool, EvalError> {
    if labels.is_empty() {
        return Err(EvalError::EmptyLabelSet);
    }
    let pred = function_key(predicted_function(prediction));
    Ok(!pred.is_empty() && labels.iter().any(|l| function_key(l) == pred))
}

/// `X/Y/Z.cpp A::B::C` → `[X, Y, Z, A, B, C]`. A trailing source-file
/// extension is dropped from words that look like paths (a `/`, or a single
/// dot); `a.b.c` keeps all three segments.
pub fn terms(s: &str) -> Vec<String> {
    let mut out = Vec::new();
    for word in s.split_whitespace() {
        let mut word = word;
        if let Some((stem, ext)) = word.rsplit_once('.') {
            let path_like = stem.contains('/') || !stem.contains('.');
            if path_like && EXTENSION_STOPLIST.contains(&ext) && !stem.is_empty() {
                word = stem;
            }
        }
        for piece in word.split("::") {
            out.extend(
                piece
                    .split(['/', '.', '(', ')'])
                    .filter(|t| !t.is_empty())
                    .map(str::to_string),
            );
        }
    }
    out
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum ApSemantics {
    /// Each predicted term counts at most as often as it occurs in the target.
    #[default]
    Clipped,
    /// Distinct terms only.
    Set,
}

/// Precision of one prediction's terms against the target's terms. A
/// prediction without terms scores 0.
pub fn pair_precision(prediction: &str, target: &str, semantics: ApSemantics) -> f64 {
    let p = terms(prediction);
    let t = terms(target);
    match semantics {
        ApSemantics::Clipped => {
            if p.is_empty() {
                return 0.0;
            }
            let mut budget: HashMap<&str, usize> = HashMap::new();
            for term in &t {
                *budget.entry(term).or_default() += 1;
            }
            let mut hits = 0usize;
            for term in &p {
                if let Some(left) = budget.get_mut(term.as_str()).filter(|n| **n > 0) {
                    *left -= 1;
                    hits += 1;
                }
            }
            hits as f64 / p.len() as f64
        }
        ApSemantics::Set => {
            let ps: HashSet<&String> = p.iter().collect();
            if ps.is_empty() {
                return 0.0;
            }
            let ts: HashSet<&String> = t.iter().collect();
            ps.intersection(&ts).count() as f64 / ps.len() as f64
        }
    }
}

/// Mean pair precision over `(prediction, target)` pairs.
pub fn average_precision<P: AsRef<str>, T: AsRef<str>>(pairs: &[(P, T)], semantics: ApSemantics) -> Result<f64, EvalError> {
    if pairs.is_empty() {
        return Err(EvalError::EmptyBatch);
    }
    let sum: f64 = pairs
        .iter()
        .map(|(p, t)| pair_precision(p.as_ref(), t.as_ref(), semantics))
        .sum();
    Ok(sum / pairs.len() as f64)
}

/// Compare only the file parts of two `file function` texts.
pub fn file_level_match(prediction: &str, target: &str) -> Result<bool, EvalError> {
    let file_part = |s: &str| {
        let mut words = s.split_whitespace();
        match (words.next(), words.next()) {
            (Some(f), Some(_)) if f.contains('/') || f.contains('.') => Some(f.to_string()),
            _ => None,
        }
    };
    let pred = file_part(prediction).ok_or_else(|| EvalError::MissingFilePart(prediction.to_string()))?;
    let target = file_part(target).ok_or_else(|| EvalError::MissingFilePart(target.to_string()))?;
    Ok(pred == target)
}

/// Normalized position (0 innermost, 1 outermost) of the first frame whose
/// function matches the prediction; `None` when no frame matches.
pub fn prediction_depth(predicted_function: &str, rendered_trace: &str) -> Option<f64> {
    let frames = rendered_frames(rendered_trace);
    let key = function_key(predicted_function);
    if key.is_empty() {
        return None;
    }
    let i = frames.iter().position(|f| function_key(&f.function) == key)?;
    Some(if frames.len() == 1 {
        0.0
    } else {
        i as f64 / (frames.len() - 1) as f64
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalize() {
        assert_eq!(normalize_output("src/malloc.c sqlite3_malloc<|endoftext|>"), "src/malloc.c sqlite3_malloc");
        assert_eq!(normalize_output("<sqlite3_malloc>"), "sqlite3_malloc");
        assert_eq!(normalize_output("  f  "), "f");
        assert_eq!(normalize_output("f<|endoftext|> trailing junk"), "f");
        assert_eq!(normalize_output(""), "");
    }

    #[test]
    fn exact() {
        assert!(exact_match("src/a.c f", "src/a.c f"));
        assert!(!exact_match("B::C", "A::B::C"));
        assert!(exact_match("fs_register", "fs_register"));
    }

    #[test]
    fn multi_target() {
        let labels: Vec<String> = ["alpha", "beta", "gamma"].iter().map(|s| s.to_string()).collect();
        assert!(multi_target_match("beta", &labels).unwrap());
        assert!(!multi_target_match("delta", &labels).unwrap());
        assert!(multi_target_match("src/x.c gamma", &labels).unwrap());
        assert_eq!(multi_target_match("x", &[]), Err(EvalError::EmptyLabelSet));
    }

    #[test]
    fn term_split() {
        assert_eq!(terms("X/Y/Z.cpp A::B::C"), ["X", "Y", "Z", "A", "B", "C"]);
        assert_eq!(terms("src/malloc.c sqlite3_malloc"), ["src", "malloc", "sqlite3_malloc"]);
        assert!(terms("").is_empty());
        assert_eq!(terms("f(int) a.b.c"), ["f", "int", "a", "b", "c"]);
    }

    #[test]
    fn precision() {
        assert_eq!(pair_precision("X Y W", "X Y Z", ApSemantics::Clipped), 2.0 / 3.0);
        assert_eq!(pair_precision("X X", "X", ApSemantics::Clipped), 0.5);
        assert_eq!(pair_precision("X X", "X", ApSemantics::Set), 1.0);
        assert_eq!(pair_precision("", "X", ApSemantics::Clipped), 0.0);
        assert_eq!(average_precision(&[("a b", "a b")], ApSemantics::Clipped).unwrap(), 1.0);
        assert_eq!(average_precision::<&str, &str>(&[], ApSemantics::Clipped), Err(EvalError::EmptyBatch));
    }

    #[test]
    fn file_level() {
        assert!(file_level_match("src/a.c f", "src/a.c g").unwrap());
        assert!(!file_level_match("src/b.c f", "src/a.c f").unwrap());
        assert!(matches!(file_level_match("f", "src/a.c f"), Err(EvalError::MissingFilePart(_))));
    }

    #[test]
    fn depth() {
        let trace = |n: usize| {
            (0..n)
                .map(|i| format!("#{i}  in f{i} at src/x.c:{}", i + 1))
                .collect::<Vec<_>>()
                .join("\n")
        };
        assert_eq!(prediction_depth("f0", &trace(10)), Some(0.0));
        assert_eq!(prediction_depth("f9", &trace(10)), Some(1.0));
        assert_eq!(prediction_depth("f3", &trace(7)), Some(0.5));
        assert_eq!(prediction_depth("ns::f3(int)", &trace(7)), Some(0.5));
        assert_eq!(prediction_depth("f0", &trace(1)), Some(0.0));
        assert_eq!(prediction_depth("nope", &trace(4)), None);
    }
}
