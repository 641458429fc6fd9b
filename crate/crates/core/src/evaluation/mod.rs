//! Scoring of fault-localization predictions against dataset labels.

mod baselines;
mod metrics;

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

pub use baselines::{
    cosine, innermost_baseline, nn_baseline_predict, nn_baseline_train, nn_baseline_train_with_dim, vectorize, Guess,
    NnModel, NN_DIMENSION,
};
pub use metrics::{
    average_precision, exact_match, file_level_match, function_key, multi_target_match, normalize_output,
    pair_precision, predicted_function, prediction_depth, terms, ApSemantics,
};

use crate::dataset::{train_targets, Locality, Sample, Split};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EvalError {
    #[error("nothing to score")]
    EmptyBatch,
    #[error("prediction {0:?} has no file part")]
    MissingFilePart(String),
    #[error("nearest-neighbour baseline needs at least one training sample")]
    EmptyTrainSet,
    #[error("prediction refers to unknown sample {0}")]
    UnknownSampleId(String),
    #[error("sample {0} has more than one prediction")]
    DuplicatePrediction(String),
    #[error("label set is empty")]
    EmptyLabelSet,
    #[error("sample {0} has no stack frames")]
    NoFrames(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Prediction {
    pub sample_id: String,
    pub raw_output: String,
    pub model_tag: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EvalMode {
    /// Target is `file function`.
    FileAndFunction,
    /// Target is the function name alone.
    FunctionOnly,
    /// Correct if any fixed method is named.
    Authentic,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SliceCounts {
    pub count: usize,
    pub correct: usize,
}

impl SliceCounts {
    fn add(&mut self, correct: bool) {
        self.count += 1;
        self.correct += usize::from(correct);
    }

    pub fn accuracy(&self) -> Option<f64> {
        (self.count > 0).then(|| self.correct as f64 / self.count as f64)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MutatorBreakdown {
    pub count: usize,
    pub accuracy: f64,
    pub local: SliceCounts,
    pub nonlocal: SliceCounts,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub model_tag: String,
    pub mode: EvalMode,
    pub scored: usize,
    pub local: SliceCounts,
    pub nonlocal: SliceCounts,
    pub accuracy_total: f64,
    pub accuracy_local: Option<f64>,
    pub accuracy_nonlocal: Option<f64>,
    /// Only in [`EvalMode::FileAndFunction`].
    pub file_level_accuracy: Option<f64>,
    pub average_precision_total: f64,
    pub average_precision_local: Option<f64>,
    pub average_precision_nonlocal: Option<f64>,
    pub avg_prediction_depth: Option<f64>,
    pub depth_count: usize,
    pub per_mutator: BTreeMap<String, MutatorBreakdown>,
    /// Correct predictions whose target never occurs in the training split.
    pub unseen_target_correct: usize,
    pub unparseable_count: usize,
    pub missing_count: usize,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EvalOptions {
    pub ap_semantics: ApSemantics,
}

/// The samples a report is computed over: the validation split, or every
/// sample when none is marked for validation.
pub fn scored_samples(samples: &[Sample]) -> Vec<&Sample> {
    let val: Vec<&Sample> = samples.iter().filter(|s| s.split == Split::Val).collect();
    if val.is_empty() {
        samples.iter().collect()
    } else {
        val
    }
}

fn target_text(sample: &Sample, mode: EvalMode) -> String {
    match mode {
        EvalMode::FileAndFunction => sample.target(),
        EvalMode::FunctionOnly | EvalMode::Authentic => sample.target_function.clone(),
    }
}

fn parseable(pred: &str, mode: EvalMode) -> bool {
    let words = pred.split_whitespace().count();
    match mode {
        EvalMode::FileAndFunction => words == 2,
        EvalMode::FunctionOnly => words == 1,
        EvalMode::Authentic => words == 1 || words == 2,
    }
}

fn is_correct(pred: &str, sample: &Sample, mode: EvalMode) -> bool {
    match mode {
        EvalMode::FileAndFunction | EvalMode::FunctionOnly => exact_match(pred, &target_text(sample, mode)),
        EvalMode::Authentic => {
            let labels = if sample.fixed_methods.is_empty() {
                std::slice::from_ref(&sample.target_function)
            } else {
                &sample.fixed_methods[..]
            };
            multi_target_match(pred, labels).unwrap_or(false)
        }
    }
}

fn mean(xs: &[f64]) -> Option<f64> {
    (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64)
}

/// Score `predictions` (one model) against the scored samples of `samples`.
/// Samples without a prediction count as incorrect.
pub fn evaluate(
    samples: &[Sample],
    predictions: &[Prediction],
    mode: EvalMode,
    opts: EvalOptions,
) -> Result<EvalReport, EvalError> {
    let scored = scored_samples(samples);
    if scored.is_empty() {
        return Err(EvalError::EmptyBatch);
    }
    let ids: HashSet<&str> = scored.iter().map(|s| s.id.as_str()).collect();
    let mut by_id: HashMap<&str, &Prediction> = HashMap::new();
    for p in predictions {
        if !ids.contains(p.sample_id.as_str()) {
            return Err(EvalError::UnknownSampleId(p.sample_id.clone()));
        }
        if by_id.insert(&p.sample_id, p).is_some() {
            return Err(EvalError::DuplicatePrediction(p.sample_id.clone()));
        }
    }
    let seen = train_targets(samples);
    let model_tag = predictions.first().map(|p| p.model_tag.clone()).unwrap_or_default();

    let mut local = SliceCounts::default();
    let mut nonlocal = SliceCounts::default();
    let mut file_hits = 0usize;
    let mut ap = (Vec::new(), Vec::new());
    let mut depths = Vec::new();
    let mut per_mutator: BTreeMap<String, MutatorBreakdown> = BTreeMap::new();
    let (mut unseen_correct, mut unparseable, mut missing) = (0, 0, 0);

    for s in &scored {
        let pred = match by_id.get(s.id.as_str()) {
            Some(p) => normalize_output(&p.raw_output),
            None => {
                missing += 1;
                String::new()
            }
        };
        let present = by_id.contains_key(s.id.as_str());
        let ok_shape = parseable(&pred, mode);
        if present && !ok_shape {
            unparseable += 1;
        }
        let correct = ok_shape && is_correct(&pred, s, mode);
        if mode == EvalMode::FileAndFunction && ok_shape && file_level_match(&pred, &s.target()).unwrap_or(false) {
            file_hits += 1;
        }
        let precision = pair_precision(&pred, &target_text(s, mode), opts.ap_semantics);
        let entry = per_mutator.entry(s.mutator.clone()).or_default();
        entry.count += 1;
        match s.locality {
            Locality::Local => {
                local.add(correct);
                entry.local.add(correct);
                ap.0.push(precision);
            }
            Locality::NonLocal => {
                nonlocal.add(correct);
                entry.nonlocal.add(correct);
                ap.1.push(precision);
            }
        }
        if ok_shape {
            if let Some(d) = prediction_depth(predicted_function(&pred), &s.rendered_trace) {
                depths.push(d);
            }
        }
        if correct && !seen.contains(&s.target()) {
            unseen_correct += 1;
        }
    }

    for b in per_mutator.values_mut() {
        b.accuracy = (b.local.correct + b.nonlocal.correct) as f64 / b.count as f64;
    }
    let n = scored.len();
    let all_ap: Vec<f64> = ap.0.iter().chain(&ap.1).copied().collect();
    Ok(EvalReport {
        model_tag,
        mode,
        scored: n,
        accuracy_total: (local.correct + nonlocal.correct) as f64 / n as f64,
        accuracy_local: local.accuracy(),
        accuracy_nonlocal: nonlocal.accuracy(),
        local,
        nonlocal,
        file_level_accuracy: (mode == EvalMode::FileAndFunction).then(|| file_hits as f64 / n as f64),
        average_precision_total: mean(&all_ap).unwrap_or(0.0),
        average_precision_local: mean(&ap.0),
        average_precision_nonlocal: mean(&ap.1),
        avg_prediction_depth: mean(&depths),
        depth_count: depths.len(),
        per_mutator,
        unseen_target_correct: unseen_correct,
        unparseable_count: unparseable,
        missing_count: missing,
    })
}

/// Predictions of the innermost-frame baseline for every scored sample.
pub fn innermost_predictions(samples: &[Sample], mode: EvalMode) -> Vec<Prediction> {
    scored_samples(samples)
        .into_iter()
        .filter_map(|s| {
            innermost_baseline(s).ok().map(|g| Prediction {
                sample_id: s.id.clone(),
                raw_output: g.render(mode),
                model_tag: "innermost".into(),
            })
        })
        .collect()
}

/// Predictions of the 1-NN baseline trained on the Train split.
pub fn nn_predictions(samples: &[Sample], mode: EvalMode) -> Result<Vec<Prediction>, EvalError> {
    let train: Vec<Sample> = samples.iter().filter(|s| s.split == Split::Train).cloned().collect();
    let model = nn_baseline_train(&train)?;
    Ok(scored_samples(samples)
        .into_iter()
        .map(|s| Prediction {
            sample_id: s.id.clone(),
            raw_output: nn_baseline_predict(&model, &s.rendered_trace).0.render(mode),
            model_tag: "nn".into(),
        })
        .collect())
}

fn pct(x: Option<f64>) -> String {
    x.map_or("-".to_string(), |v| format!("{:.1}", 100.0 * v))
}

/// `| Model | Local | Non-Local | Total |` accuracy table, in percent.
pub fn accuracy_markdown(reports: &[EvalReport]) -> String {
    let mut out = String::from("| Model | Local | Non-Local | Total |\n|---|---|---|---|\n");
    for r in reports {
        let _ = writeln!(
            out,
            "| {} | {} | {} | {} |",
            r.model_tag,
            pct(r.accuracy_local),
            pct(r.accuracy_nonlocal),
            pct(Some(r.accuracy_total))
        );
    }
    out
}

/// Same layout as [`accuracy_markdown`], for average precision.
pub fn average_precision_markdown(reports: &[EvalReport]) -> String {
    let mut out = String::from("| Model | Local | Non-Local | Total |\n|---|---|---|---|\n");
    for r in reports {
        let _ = writeln!(
            out,
            "| {} | {} | {} | {} |",
            r.model_tag,
            pct(r.average_precision_local),
            pct(r.average_precision_nonlocal),
            pct(Some(r.average_precision_total))
        );
    }
    out
}
