use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Duration;

use sha2::{Digest, Sha256};

use super::process::{run_command, signal_display_name, ProcessResult, ProcessStatus};
use super::{CampaignConfig, CampaignError, ExecutionOutcome, Phase};
use crate::mutation::{apply_mutation, revert_mutation, source_files, Mutation};
use crate::stacktrace::signal_name;

/// A working tree plus the digests of its pristine source files.
#[derive(Debug, Clone)]
pub struct Workspace {
    root: PathBuf,
    pristine: BTreeMap<PathBuf, [u8; 32]>,
}

fn digest(bytes: &[u8]) -> [u8; 32] {
    Sha256::digest(bytes).into()
}

impl Workspace {
    /// Record the current contents of every source file as pristine.
    pub fn snapshot(root: &Path) -> Result<Self, CampaignError> {
        let mut pristine = BTreeMap::new();
        for rel in source_files(root)? {
            let bytes = std::fs::read(root.join(&rel)).map_err(CampaignError::io(root.join(&rel)))?;
            pristine.insert(rel, digest(&bytes));
        }
        Ok(Workspace {
            root: root.to_path_buf(),
            pristine,
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    /// Same pristine digests as `other`, regardless of location.
    pub fn same_sources(&self, other: &Workspace) -> bool {
        self.pristine == other.pristine
    }

    fn check(&self, rel: &Path, bytes: &[u8]) -> bool {
        self.pristine.get(rel) == Some(&digest(bytes))
    }

    /// Fails with `WorkspaceDirty` unless `rel` matches its pristine digest.
    pub fn verify_file(&self, rel: &Path) -> Result<(), CampaignError> {
        let path = self.root.join(rel);
        let bytes = std::fs::read(&path).map_err(CampaignError::io(&path))?;
        if self.check(rel, &bytes) {
            Ok(())
        } else {
            Err(CampaignError::WorkspaceDirty { path })
        }
    }

    pub fn verify_all(&self) -> Result<(), CampaignError> {
        self.pristine.keys().try_for_each(|rel| self.verify_file(rel))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thresholds {
    pub build: Duration,
    pub test: Duration,
}

enum TestVerdict {
    Crash { signal: String, trace: String },
    Completed { ok: bool },
}

fn classify_test(r: &ProcessResult, config: &CampaignConfig) -> TestVerdict {
    let reported = r
        .stdout
        .lines()
        .chain(r.stderr.lines())
        .filter_map(signal_name)
        .find(|s| config.crash_signals.contains(*s));
    if let Some(signal) = reported {
        return TestVerdict::Crash {
            signal: signal.to_string(),
            trace: r.stdout.clone(),
        };
    }
    if let ProcessStatus::Signaled(s) = r.status {
        let name = signal_display_name(s);
        if config.crash_signals.contains(&name) {
            return TestVerdict::Crash {
                signal: name,
                trace: format!("{}{}", r.stdout, r.stderr),
            };
        }
    }
    let out = &r.stdout;
    let ok = if out.contains("exited with code") {
        false
    } else if out.contains("exited normally") {
        true
    } else {
        r.success()
    };
    TestVerdict::Completed { ok }
}

fn run(argv: &[String], cwd: &Path, timeout: Option<Duration>) -> Result<ProcessResult, CampaignError> {
    run_command(argv, cwd, timeout).map_err(CampaignError::io(format!("{} (running {:?})", cwd.display(), argv[0])))
}

/// Build and test the pristine tree; thresholds are the measured durations
/// times `threshold_multiplier` (floored at `min_threshold_secs`) unless the
/// config fixes them.
pub fn calibrate_thresholds(config: &CampaignConfig, workspace: &Workspace) -> Result<Thresholds, CampaignError> {
    let build = run(&config.build_command, workspace.root(), None)?;
    if !build.success() {
        return Err(CampaignError::BaselineFailed(format!(
            "pristine build failed ({:?}): {}",
            build.status,
            build.stderr.trim()
        )));
    }
    let test = run(&config.debug_argv(), workspace.root(), None)?;
    match classify_test(&test, config) {
        TestVerdict::Crash { signal, .. } => {
            return Err(CampaignError::BaselineFailed(format!("pristine tests crashed with {signal}")));
        }
        TestVerdict::Completed { ok: false } => {
            return Err(CampaignError::BaselineFailed("pristine tests failed".into()));
        }
        TestVerdict::Completed { ok: true } => {}
    }
    let scale = |measured: Duration, fixed: Option<f64>| match fixed {
        Some(secs) => Duration::from_secs_f64(secs),
        None => Duration::from_secs_f64(
            (measured.as_secs_f64() * config.threshold_multiplier).max(config.min_threshold_secs),
        ),
    };
    Ok(Thresholds {
        build: scale(build.elapsed, config.build_threshold_secs),
        test: scale(test.elapsed, config.test_threshold_secs),
    })
}

fn build_and_test(ws: &Workspace, config: &CampaignConfig, thresholds: Thresholds) -> Result<ExecutionOutcome, CampaignError> {
    let build = run(&config.build_command, ws.root(), Some(thresholds.build))?;
    let build_secs = build.elapsed.as_secs_f64();
    match build.status {
        ProcessStatus::TimedOut => {
            return Ok(ExecutionOutcome::Timeout {
                phase: Phase::Build,
                build_secs,
                test_secs: 0.0,
            })
        }
        ProcessStatus::Exited(0) => {}
        _ => return Ok(ExecutionOutcome::BuildFailure { build_secs }),
    }
    let test = run(&config.debug_argv(), ws.root(), Some(thresholds.test))?;
    let test_secs = test.elapsed.as_secs_f64();
    if test.status == ProcessStatus::TimedOut {
        return Ok(ExecutionOutcome::Timeout {
            phase: Phase::Test,
            build_secs,
            test_secs,
        });
    }
    Ok(match classify_test(&test, config) {
        TestVerdict::Crash { signal, trace } => ExecutionOutcome::Crash {
            signal,
            raw_trace: trace,
            build_secs,
            test_secs,
        },
        TestVerdict::Completed { .. } => ExecutionOutcome::TestsPassed { build_secs, test_secs },
    })
}

/// Apply `m`, build, test under the debugger, classify, and restore the
/// file. The file is always restored to its pristine bytes; if the recorded
/// revert does not reproduce them the step fails with `RevertFailed`.
pub fn execute_step(
    ws: &Workspace,
    m: &Mutation,
    config: &CampaignConfig,
    thresholds: Thresholds,
) -> Result<ExecutionOutcome, CampaignError> {
    let path = ws.root().join(&m.file);
    let pristine = std::fs::read(&path).map_err(CampaignError::io(&path))?;
    if !ws.check(&m.file, &pristine) {
        return Err(CampaignError::WorkspaceDirty { path });
    }
    let mutated = apply_mutation(&pristine, m)?;
    std::fs::write(&path, &mutated).map_err(CampaignError::io(&path))?;

    let outcome = build_and_test(ws, config, thresholds);

    let revert_failure = |reason: String| CampaignError::RevertFailed {
        id: m.id.clone(),
        path: path.clone(),
        reason,
    };
    let current = std::fs::read(&path).map_err(|e| revert_failure(e.to_string()));
    let reverted = current.and_then(|cur| revert_mutation(&cur, m).map_err(|e| revert_failure(e.to_string())));
    let problem = match reverted {
        Ok(bytes) if bytes == pristine => None,
        Ok(_) => Some(revert_failure("reverted bytes differ from pristine".into())),
        Err(e) => Some(e),
    };
    std::fs::write(&path, &pristine).map_err(|e| revert_failure(e.to_string()))?;
    let written = std::fs::read(&path).map_err(|e| revert_failure(e.to_string()))?;
    if written != pristine {
        return Err(revert_failure("file does not read back as pristine".into()));
    }
    if let Some(err) = problem {
        return Err(err);
    }
    outcome
}
