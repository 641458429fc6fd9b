use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::CampaignError;
use crate::mutation::MutatorKind;

/// Argv element of `debugger_command` replaced by the whole test argv.
pub const TEST_PLACEHOLDER: &str = "{TEST}";

pub const DEFAULT_CRASH_SIGNALS: [&str; 5] = ["SIGSEGV", "SIGABRT", "SIGBUS", "SIGFPE", "SIGILL"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CampaignConfig {
    #[serde(default = "default_project")]
    pub project: String,
    pub workspace: PathBuf,
    pub build_command: Vec<String>,
    pub test_command: Vec<String>,
    pub debugger_command: Vec<String>,
    /// Fixed thresholds; when absent they come from calibration.
    #[serde(default)]
    pub build_threshold_secs: Option<f64>,
    #[serde(default)]
    pub test_threshold_secs: Option<f64>,
    #[serde(default = "default_multiplier")]
    pub threshold_multiplier: f64,
    /// Lower bound applied to calibrated thresholds.
    #[serde(default)]
    pub min_threshold_secs: f64,
    #[serde(default = "default_max_mutations")]
    pub max_mutations: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_kinds")]
    pub mutator_kinds: BTreeSet<MutatorKind>,
    #[serde(default = "default_signals")]
    pub crash_signals: BTreeSet<String>,
    /// Coverage TSV (`file<TAB>function<TAB>hits`).
    #[serde(default)]
    pub coverage: Option<PathBuf>,
}

fn default_project() -> String {
    "project".to_string()
}

fn default_multiplier() -> f64 {
    1.0
}

fn default_max_mutations() -> usize {
    1000
}

fn default_kinds() -> BTreeSet<MutatorKind> {
    MutatorKind::ALL.into_iter().collect()
}

fn default_signals() -> BTreeSet<String> {
    DEFAULT_CRASH_SIGNALS.iter().map(|s| s.to_string()).collect()
}

impl CampaignConfig {
    /// Parse TOML text. Relative paths are resolved against `base_dir`.
    pub fn from_toml(text: &str, base_dir: &Path) -> Result<Self, CampaignError> {
        let mut cfg: CampaignConfig = toml::from_str(text).map_err(|e| CampaignError::Config(e.to_string()))?;
        cfg.workspace = base_dir.join(&cfg.workspace);
        cfg.coverage = cfg.coverage.map(|c| base_dir.join(c));
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CampaignError> {
        let text = std::fs::read_to_string(path).map_err(CampaignError::io(path))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::from_toml(&text, base)
    }

    pub fn validate(&self) -> Result<(), CampaignError> {
        let bad = |m: &str| Err(CampaignError::Config(m.to_string()));
        if self.build_command.is_empty() || self.test_command.is_empty() {
            return bad("build_command and test_command must be non-empty");
        }
        if !self.debugger_command.iter().any(|a| a == TEST_PLACEHOLDER) {
            return bad("debugger_command must contain a {TEST} element");
        }
        for t in [self.build_threshold_secs, self.test_threshold_secs].into_iter().flatten() {
            if !(t > 0.0) {
                return bad("thresholds must be positive");
            }
        }
        if !(self.threshold_multiplier > 0.0) || !(self.min_threshold_secs >= 0.0) {
            return bad("threshold_multiplier must be positive and min_threshold_secs non-negative");
        }
        if self.max_mutations == 0 {
            return bad("max_mutations must be at least 1");
        }
        if self.mutator_kinds.is_empty() {
            return bad("mutator_kinds must not be empty");
        }
        Ok(())
    }

    /// The debugger argv with the test command spliced in.
    pub fn debug_argv(&self) -> Vec<String> {
        let mut argv = Vec::new();
        for a in &self.debugger_command {
            if a == TEST_PLACEHOLDER {
                argv.extend(self.test_command.iter().cloned());
            } else {
                argv.push(a.clone());
            }
        }
        argv
    }
}
