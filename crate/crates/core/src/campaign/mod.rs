//! Mutate, build, test, harvest crashes, roll back; repeated over a plan.

mod config;
mod coverage;
mod outcome;
mod plan;
mod process;
mod runner;
mod step;

use std::path::PathBuf;

pub use config::{CampaignConfig, DEFAULT_CRASH_SIGNALS, TEST_PLACEHOLDER};
pub use coverage::{load_coverage, TargetSpec};
pub use outcome::{CampaignSummary, CrashRecord, ExecutionOutcome, OutcomeVariant, Phase};
pub use plan::plan;
pub use process::{run_command, signal_display_name, ProcessResult, ProcessStatus};
pub use runner::{read_journal, run_campaign, CampaignFiles, RunOptions};
pub use step::{calibrate_thresholds, execute_step, Thresholds, Workspace};

use crate::jsonl::JsonlError;
use crate::mutation::MutationError;

#[derive(Debug, thiserror::Error)]
pub enum CampaignError {
    #[error("workspace is dirty: {path} differs from its pristine contents")]
    WorkspaceDirty { path: PathBuf },
    #[error("failed to restore {path} after mutation {id}: {reason}")]
    RevertFailed { id: String, path: PathBuf, reason: String },
    #[error("pristine baseline failed: {0}")]
    BaselineFailed(String),
    #[error("plan is empty: no mutation site lies in a covered function")]
    EmptyPlan,
    #[error("coverage line {line}: {reason}")]
    MalformedRow { line: usize, reason: String },
    #[error("{path}: corrupt journal entry at line {line}")]
    CorruptJournal { path: PathBuf, line: usize },
    #[error("invalid campaign config: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Mutation(#[from] MutationError),
    #[error(transparent)]
    Jsonl(#[from] JsonlError),
}

impl CampaignError {
    /// Errors that leave the tree in an unknown state or make results
    /// meaningless; a campaign never continues past them.
    pub fn is_hygiene_fatal(&self) -> bool {
        matches!(
            self,
            CampaignError::WorkspaceDirty { .. } | CampaignError::RevertFailed { .. } | CampaignError::BaselineFailed(_)
        )
    }

    pub(crate) fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> CampaignError {
        let path = path.into();
        move |source| CampaignError::Io { path, source }
    }
}
