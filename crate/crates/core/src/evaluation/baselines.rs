use serde::{Deserialize, Serialize};

use super::{EvalError, EvalMode};
use crate::dataset::Sample;
use crate::stacktrace::rendered_frames;

/// A baseline's answer, formatted per evaluation mode by [`Guess::render`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Guess {
    pub file: Option<String>,
    pub function: String,
}

impl Guess {
    pub fn render(&self, mode: EvalMode) -> String {
        match (mode, &self.file) {
            (EvalMode::FileAndFunction, Some(file)) => format!("{file} {}", self.function),
            _ => self.function.clone(),
        }
    }
}

/// Blame the most recent call.
pub fn innermost_baseline(sample: &Sample) -> Result<Guess, EvalError> {
    let frame = rendered_frames(&sample.rendered_trace)
        .into_iter()
        .next()
        .ok_or_else(|| EvalError::NoFrames(sample.id.clone()))?;
    Ok(Guess {
        file: frame.file,
        function: frame.function,
    })
}

pub const NN_DIMENSION: usize = 256;
const NGRAM_RANGE: std::ops::RangeInclusive<usize> = 3..=5;

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in bytes {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Hashed character n-gram counts, L2-normalized.
pub fn vectorize(text: &str, dim: usize) -> Vec<f64> {
    let mut v = vec![0.0; dim];
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    for n in NGRAM_RANGE {
        for w in chars.windows(n) {
            let start = w[0].0;
            let last = w[n - 1];
            let end = last.0 + last.1.len_utf8();
            v[(fnv1a(text[start..end].as_bytes()) % dim as u64) as usize] += 1.0;
        }
    }
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
    v
}

pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[derive(Debug, Clone)]
struct Neighbour {
    id: String,
    vector: Vec<f64>,
    target: Guess,
}

/// 1-nearest-neighbour classifier over training traces.
#[derive(Debug, Clone)]
pub struct NnModel {
    dim: usize,
    neighbours: Vec<Neighbour>,
}

impl NnModel {
    pub fn len(&self) -> usize {
        self.neighbours.len()
    }

    pub fn is_empty(&self) -> bool {
        self.neighbours.is_empty()
    }
}

pub fn nn_baseline_train(train: &[Sample]) -> Result<NnModel, EvalError> {
    nn_baseline_train_with_dim(train, NN_DIMENSION)
}

pub fn nn_baseline_train_with_dim(train: &[Sample], dim: usize) -> Result<NnModel, EvalError> {
    if train.is_empty() || dim == 0 {
        return Err(EvalError::EmptyTrainSet);
    }
    let mut neighbours: Vec<Neighbour> = train
        .iter()
        .map(|s| Neighbour {
            id: s.id.clone(),
            vector: vectorize(&s.rendered_trace, dim),
            target: Guess {
                file: Some(s.target_file.clone()),
                function: s.target_function.clone(),
            },
        })
        .collect();
    neighbours.sort_by(|a, b| a.id.cmp(&b.id));
    Ok(NnModel { dim, neighbours })
}

/// Target of the most cosine-similar training trace (lowest id on ties),
/// with the similarity.
pub fn nn_baseline_predict(model: &NnModel, query_trace: &str) -> (Guess, f64) {
    let q = vectorize(query_trace, model.dim);
    let mut best = &model.neighbours[0];
    let mut best_sim = cosine(&q, &best.vector);
    for n in &model.neighbours[1..] {
        let sim = cosine(&q, &n.vector);
        if sim > best_sim {
            best = n;
            best_sim = sim;
        }
    }
    (best.target.clone(), best_sim)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{Locality, Split};

    fn sample(id: &str, trace: &str, file: &str, func: &str) -> Sample {
        Sample {
            id: id.into(),
            project: "p".into(),
            rendered_trace: trace.into(),
            target_file: file.into(),
            target_function: func.into(),
            mutator: "Delete".into(),
            locality: Locality::Local,
            split: Split::Train,
            fixed_methods: vec![],
        }
    }

    #[test]
    fn innermost() {
        let s = sample("a", "#0  in fs_register at src/test_onefile.c:824\n#1  in main at src/tclsqlite.c:4062", "x", "y");
        let g = innermost_baseline(&s).unwrap();
        assert_eq!(g.function, "fs_register");
        assert_eq!(g.render(EvalMode::FunctionOnly), "fs_register");
        assert_eq!(g.render(EvalMode::FileAndFunction), "src/test_onefile.c fs_register");
        let empty = sample("b", "Program received signal SIGSEGV", "x", "y");
        assert!(matches!(innermost_baseline(&empty), Err(EvalError::NoFrames(_))));
    }

    #[test]
    fn vectors_are_unit_length() {
        let v = vectorize("#0  in f at a.c:1", NN_DIMENSION);
        assert!((cosine(&v, &v) - 1.0).abs() < 1e-12);
        assert_eq!(vectorize("ab", 16), vec![0.0; 16]);
    }

    #[test]
    fn near_duplicate_is_close() {
        let a = "#0  in parse_header at src/http.c:120\n#1  in handle at src/server.c:44\n#2  in main at src/main.c:10";
        let b = a.replace(":120", ":127");
        let sim = cosine(&vectorize(a, NN_DIMENSION), &vectorize(&b, NN_DIMENSION));
        assert!(sim > 0.9, "{sim}");
    }

    #[test]
    fn tie_goes_to_lowest_id() {
        let t = "#0  in f at a.c:1";
        let m = nn_baseline_train(&[sample("s2", t, "b.c", "second"), sample("s1", t, "a.c", "first")]).unwrap();
        let (g, sim) = nn_baseline_predict(&m, t);
        assert_eq!(g.function, "first");
        assert!((sim - 1.0).abs() < 1e-12);
        assert!(matches!(nn_baseline_train(&[]), Err(EvalError::EmptyTrainSet)));
    }
}
