//! Labelled (trace → file + function) samples: construction, locality,
//! deduplication, train/validation split and summary statistics.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::campaign::CrashRecord;
use crate::stacktrace::{self, rendered_frames, unqualified, ParseOptions, SourceFormat, TokenCounter, TraceError};

pub const DEFAULT_TRAIN_FRACTION: f64 = 0.9;
pub const AUTHENTIC_MUTATOR: &str = "Authentic";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Locality {
    Local,
    NonLocal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum Split {
    Train,
    Val,
    #[default]
    Unassigned,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sample {
    pub id: String,
    pub project: String,
    #[serde(rename = "trace")]
    pub rendered_trace: String,
    pub target_file: String,
    pub target_function: String,
    pub mutator: String,
    pub locality: Locality,
    #[serde(default)]
    pub split: Split,
    /// Every method changed by the fix, for authentic crashes.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub fixed_methods: Vec<String>,
}

impl Sample {
    /// `<target_file> <target_function>`.
    pub fn target(&self) -> String {
        format!("{} {}", self.target_file, self.target_function)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum DatasetError {
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("input is not deduplicated: sample {0} repeats an earlier (trace, target) pair")]
    NotDeduplicated(String),
    #[error("train fraction {0} is outside [0, 1]")]
    BadFraction(f64),
    #[error("record {id}: {source}")]
    Trace {
        id: String,
        #[source]
        source: TraceError,
    },
}

/// Local iff the target's unqualified name equals some frame's unqualified name.
pub fn classify_locality(rendered: &str, target_function: &str) -> Locality {
    let target = unqualified(target_function);
    let hit = rendered_frames(rendered)
        .iter()
        .any(|f| unqualified(&f.function) == target);
    if hit {
        Locality::Local
    } else {
        Locality::NonLocal
    }
}

/// How raw debugger output becomes rendered sample text.
#[derive(Debug, Clone)]
pub struct PreprocessOptions {
    pub format: SourceFormat,
    pub parse: ParseOptions,
    pub token_budget: usize,
    pub counter: TokenCounter,
}

impl Default for PreprocessOptions {
    fn default() -> Self {
        PreprocessOptions {
            format: SourceFormat::GdbTopFirst,
            parse: ParseOptions::default(),
            token_budget: stacktrace::DEFAULT_TOKEN_BUDGET,
            counter: TokenCounter::Lexical,
        }
    }
}

pub fn sample_from_record(record: &CrashRecord, opts: &PreprocessOptions) -> Result<Sample, DatasetError> {
    let rendered = stacktrace::preprocess(&record.raw_trace, opts.format, &opts.parse, opts.token_budget, opts.counter)
        .map_err(|source| DatasetError::Trace {
            id: record.id.clone(),
            source,
        })?;
    Ok(Sample {
        id: record.id.clone(),
        project: record.project.clone(),
        locality: classify_locality(&rendered, &record.target_function),
        rendered_trace: rendered,
        target_file: record.target_file.clone(),
        target_function: record.target_function.clone(),
        mutator: record.mutator.name().to_string(),
        split: Split::Unassigned,
        fixed_methods: Vec::new(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DedupMode {
    /// One sample per distinct (trace, target) pair.
    PairUnique,
    /// One sample per distinct trace; later samples with the same trace and
    /// a different target are dropped.
    TraceUnique,
}

/// Keep the first occurrence per key, preserving order.
pub fn deduplicate(samples: Vec<Sample>, mode: DedupMode) -> Vec<Sample> {
    let mut seen: HashSet<(String, Option<String>)> = HashSet::new();
    samples
        .into_iter()
        .filter(|s| {
            let key = match mode {
                DedupMode::PairUnique => (s.rendered_trace.clone(), Some(s.target())),
                DedupMode::TraceUnique => (s.rendered_trace.clone(), None),
            };
            seen.insert(key)
        })
        .collect()
}

/// Seeded random split: `floor(n × train_fraction)` samples go to Train, the
/// rest to Val. Sample order is preserved. No stratification by target.
pub fn split(mut samples: Vec<Sample>, train_fraction: f64, seed: u64) -> Result<Vec<Sample>, DatasetError> {
    if !(0.0..=1.0).contains(&train_fraction) {
        return Err(DatasetError::BadFraction(train_fraction));
    }
    let mut pairs = HashSet::new();
    for s in &samples {
        if !pairs.insert((s.rendered_trace.as_str(), s.target())) {
            return Err(DatasetError::NotDeduplicated(s.id.clone()));
        }
    }
    let n = samples.len();
    let n_train = (n as f64 * train_fraction).floor() as usize;
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    for (rank, &i) in order.iter().enumerate() {
        samples[i].split = if rank < n_train { Split::Train } else { Split::Val };
    }
    Ok(samples)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetStats {
    /// #C
    pub crash_count: usize,
    /// #T: distinct (file, function) pairs.
    pub unique_targets: usize,
    /// %L
    pub percent_local: f64,
    pub max_trace_depth: usize,
    pub per_mutator: BTreeMap<String, usize>,
    /// Mean number of samples per distinct rendered trace.
    pub mean_occurrence_per_trace: f64,
    /// Mean number of samples per distinct (trace, target) pair.
    pub mean_occurrence_per_pair: f64,
}

pub fn stats(samples: &[Sample]) -> Result<DatasetStats, DatasetError> {
    if samples.is_empty() {
        return Err(DatasetError::EmptyDataset);
    }
    let n = samples.len();
    let targets: HashSet<(&str, &str)> = samples
        .iter()
        .map(|s| (s.target_file.as_str(), s.target_function.as_str()))
        .collect();
    let local = samples.iter().filter(|s| s.locality == Locality::Local).count();
    let mut per_mutator = BTreeMap::new();
    for s in samples {
        *per_mutator.entry(s.mutator.clone()).or_insert(0) += 1;
    }
    let traces: HashSet<&str> = samples.iter().map(|s| s.rendered_trace.as_str()).collect();
    let pairs: HashSet<(&str, String)> = samples.iter().map(|s| (s.rendered_trace.as_str(), s.target())).collect();
    Ok(DatasetStats {
        crash_count: n,
        unique_targets: targets.len(),
        percent_local: 100.0 * local as f64 / n as f64,
        max_trace_depth: samples
            .iter()
            .map(|s| rendered_frames(&s.rendered_trace).len())
            .max()
            .unwrap_or(0),
        per_mutator,
        mean_occurrence_per_trace: n as f64 / traces.len() as f64,
        mean_occurrence_per_pair: n as f64 / pairs.len() as f64,
    })
}

/// Markdown table with one row per project: `| Project | #C | #T | %L |`.
pub fn stats_markdown(rows: &[(String, DatasetStats)]) -> String {
    let mut out = String::from("| Project | #C | #T | %L |\n|---|---:|---:|---:|\n");
    for (project, s) in rows {
        let _ = writeln!(
            out,
            "| {} | {} | {} | {:.1} |",
            project, s.crash_count, s.unique_targets, s.percent_local
        );
    }
    out
}

/// A real crash with the files and methods its fix changed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuthenticReport {
    pub id: String,
    pub project: String,
    /// Rendered (preprocessed) trace.
    pub trace: String,
    pub fix_files: Vec<String>,
    pub fix_methods: Vec<String>,
}

/// Keep reports whose fix touches exactly one file and at least one method
/// that appears in the trace. The label set is every changed method.
pub fn filter_authentic(reports: &[AuthenticReport]) -> Vec<Sample> {
    reports
        .iter()
        .filter_map(|r| {
            let [file] = r.fix_files.as_slice() else { return None };
            let frames: HashSet<String> = rendered_frames(&r.trace)
                .iter()
                .map(|f| unqualified(&f.function).to_string())
                .collect();
            let in_trace = r.fix_methods.iter().find(|m| frames.contains(unqualified(m)))?;
            Some(Sample {
                id: r.id.clone(),
                project: r.project.clone(),
                rendered_trace: r.trace.clone(),
                target_file: file.clone(),
                target_function: in_trace.clone(),
                mutator: AUTHENTIC_MUTATOR.to_string(),
                locality: Locality::Local,
                split: Split::Unassigned,
                fixed_methods: r.fix_methods.clone(),
            })
        })
        .collect()
}

/// Distinct targets of the Train split, as `file function` strings.
pub fn train_targets(samples: &[Sample]) -> HashSet<String> {
    samples
        .iter()
        .filter(|s| s.split == Split::Train)
        .map(Sample::target)
        .collect()
}

/// Count of samples per (trace) key, used to report duplicate pressure.
pub fn trace_multiplicity(samples: &[Sample]) -> HashMap<&str, usize> {
    let mut m = HashMap::new();
    for s in samples {
        *m.entry(s.rendered_trace.as_str()).or_insert(0) += 1;
    }
    m
}
