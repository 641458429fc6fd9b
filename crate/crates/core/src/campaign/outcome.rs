use std::collections::BTreeMap;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::mutation::{Mutation, MutatorKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Phase {
    Build,
    Test,
}

/// Result of one mutate → build → test step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant")]
pub enum ExecutionOutcome {
    BuildFailure {
        build_secs: f64,
    },
    TestsPassed {
        build_secs: f64,
        test_secs: f64,
    },
    Timeout {
        phase: Phase,
        build_secs: f64,
        test_secs: f64,
    },
    Crash {
        signal: String,
        raw_trace: String,
        build_secs: f64,
        test_secs: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum OutcomeVariant {
    BuildFailure,
    TestsPassed,
    Timeout,
    Crash,
}

impl ExecutionOutcome {
    pub fn variant(&self) -> OutcomeVariant {
        match self {
            ExecutionOutcome::BuildFailure { .. } => OutcomeVariant::BuildFailure,
            ExecutionOutcome::TestsPassed { .. } => OutcomeVariant::TestsPassed,
            ExecutionOutcome::Timeout { .. } => OutcomeVariant::Timeout,
            ExecutionOutcome::Crash { .. } => OutcomeVariant::Crash,
        }
    }

    pub fn build_secs(&self) -> f64 {
        match *self {
            ExecutionOutcome::BuildFailure { build_secs }
            | ExecutionOutcome::TestsPassed { build_secs, .. }
            | ExecutionOutcome::Timeout { build_secs, .. }
            | ExecutionOutcome::Crash { build_secs, .. } => build_secs,
        }
    }

    pub fn test_secs(&self) -> f64 {
        match *self {
            ExecutionOutcome::BuildFailure { .. } => 0.0,
            ExecutionOutcome::TestsPassed { test_secs, .. }
            | ExecutionOutcome::Timeout { test_secs, .. }
            | ExecutionOutcome::Crash { test_secs, .. } => test_secs,
        }
    }
}

/// One harvested crash. The mutated function is the ground-truth label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrashRecord {
    /// Id of the mutation that produced the crash.
    pub id: String,
    pub project: String,
    pub mutator: MutatorKind,
    pub target_file: String,
    pub target_function: String,
    pub signal: String,
    pub raw_trace: String,
    pub build_secs: f64,
    pub test_secs: f64,
    pub captured_at: DateTime<Utc>,
}

impl CrashRecord {
    /// `None` unless the outcome is a crash.
    pub fn from_outcome(mutation: &Mutation, outcome: &ExecutionOutcome, project: &str) -> Option<Self> {
        let ExecutionOutcome::Crash {
            signal,
            raw_trace,
            build_secs,
            test_secs,
        } = outcome
        else {
            return None;
        };
        Some(CrashRecord {
            id: mutation.id.clone(),
            project: project.to_string(),
            mutator: mutation.kind,
            target_file: mutation.enclosing_file.to_string_lossy().into_owned(),
            target_function: mutation.enclosing_function.clone(),
            signal: signal.clone(),
            raw_trace: raw_trace.clone(),
            build_secs: *build_secs,
            test_secs: *test_secs,
            captured_at: Utc::now(),
        })
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CampaignSummary {
    pub planned: usize,
    /// Steps executed in this run (resumed steps excluded).
    pub executed: usize,
    /// Steps skipped because the journal already listed them.
    pub resumed: usize,
    pub by_outcome: BTreeMap<OutcomeVariant, usize>,
    pub by_mutator: BTreeMap<MutatorKind, BTreeMap<OutcomeVariant, usize>>,
    pub crash_records: usize,
}

impl CampaignSummary {
    pub fn record(&mut self, kind: MutatorKind, variant: OutcomeVariant) {
        self.executed += 1;
        *self.by_outcome.entry(variant).or_default() += 1;
        *self.by_mutator.entry(kind).or_default().entry(variant).or_default() += 1;
        if variant == OutcomeVariant::Crash {
            self.crash_records += 1;
        }
    }

    pub fn count(&self, variant: OutcomeVariant) -> usize {
        self.by_outcome.get(&variant).copied().unwrap_or(0)
    }
}
