use std::collections::HashSet;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::Mutex;

use super::step::{execute_step, Thresholds, Workspace};
use super::{CampaignConfig, CampaignError, CampaignSummary, CrashRecord, OutcomeVariant};
use crate::mutation::{is_valid_mutation_id, Mutation, MutatorKind};

#[derive(Debug, Clone)]
pub struct CampaignFiles {
    /// Append-only CrashRecord JSONL.
    pub records: PathBuf,
    /// Completed mutation ids, one per line.
    pub journal: PathBuf,
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    /// Number of workspace clones stepping in parallel.
    pub jobs: usize,
    /// Where clones live when `jobs > 1`.
    pub clone_dir: Option<PathBuf>,
    /// Stop after this many steps, as if interrupted.
    pub stop_after: Option<usize>,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            jobs: 1,
            clone_dir: None,
            stop_after: None,
        }
    }
}

/// Completed ids; a missing journal is empty.
pub fn read_journal(path: &Path) -> Result<HashSet<String>, CampaignError> {
    let file = match File::open(path) {
        Ok(f) => f,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(HashSet::new()),
        Err(e) => return Err(CampaignError::io(path)(e)),
    };
    let mut ids = HashSet::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(CampaignError::io(path))?;
        let id = line.trim();
        if !is_valid_mutation_id(id) {
            return Err(CampaignError::CorruptJournal {
                path: path.to_path_buf(),
                line: i + 1,
            });
        }
        ids.insert(id.to_string());
    }
    Ok(ids)
}

fn recorded_ids(path: &Path) -> Result<HashSet<String>, CampaignError> {
    if !path.exists() {
        return Ok(HashSet::new());
    }
    let rows: Vec<serde_json::Value> = crate::jsonl::read_jsonl(path)?;
    Ok(rows
        .iter()
        .filter_map(|r| r.get("id").and_then(|v| v.as_str()).map(str::to_string))
        .collect())
}

struct Sink {
    records: File,
    records_path: PathBuf,
    journal: File,
    journal_path: PathBuf,
    already_recorded: HashSet<String>,
}

impl Sink {
    fn commit(&mut self, id: &str, record: Option<&CrashRecord>) -> Result<(), CampaignError> {
        if let Some(r) = record.filter(|r| !self.already_recorded.contains(&r.id)) {
            let mut line = serde_json::to_string(r).expect("records serialize");
            line.push('\n');
            self.records
                .write_all(line.as_bytes())
                .and_then(|_| self.records.flush())
                .map_err(CampaignError::io(&self.records_path))?;
        }
        writeln!(self.journal, "{id}")
            .and_then(|_| self.journal.flush())
            .map_err(CampaignError::io(&self.journal_path))
    }
}

fn append(path: &Path) -> Result<File, CampaignError> {
    OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(CampaignError::io(path))
}

fn copy_tree(from: &Path, to: &Path) -> Result<(), CampaignError> {
    if to.exists() {
        std::fs::remove_dir_all(to).map_err(CampaignError::io(to))?;
    }
    for entry in walkdir::WalkDir::new(from) {
        let entry = entry.map_err(|e| CampaignError::io(from)(e.into()))?;
        let rel = entry.path().strip_prefix(from).expect("walk stays under root");
        let dest = to.join(rel);
        if entry.file_type().is_dir() {
            std::fs::create_dir_all(&dest).map_err(CampaignError::io(&dest))?;
        } else if entry.file_type().is_file() {
            std::fs::copy(entry.path(), &dest).map_err(CampaignError::io(&dest))?;
        }
    }
    Ok(())
}

struct StepResult {
    index: usize,
    kind: MutatorKind,
    variant: OutcomeVariant,
    record: Option<CrashRecord>,
}

/// Execute every planned mutation not yet in the journal. Crash records and
/// journal entries are appended as each step finishes, so an interrupted
/// campaign resumes where it stopped. Returns the records of this run.
pub fn run_campaign(
    config: &CampaignConfig,
    thresholds: Thresholds,
    plan: &[Mutation],
    files: &CampaignFiles,
    opts: &RunOptions,
) -> Result<(Vec<CrashRecord>, CampaignSummary), CampaignError> {
    let done = read_journal(&files.journal)?;
    let mut pending: Vec<&Mutation> = plan.iter().filter(|m| !done.contains(&m.id)).collect();
    let mut summary = CampaignSummary {
        planned: plan.len(),
        resumed: plan.len() - pending.len(),
        ..Default::default()
    };
    if let Some(k) = opts.stop_after {
        pending.truncate(k);
    }
    if pending.is_empty() {
        return Ok((Vec::new(), summary));
    }

    let sink = Mutex::new(Sink {
        records: append(&files.records)?,
        records_path: files.records.clone(),
        journal: append(&files.journal)?,
        journal_path: files.journal.clone(),
        already_recorded: recorded_ids(&files.records)?,
    });

    let main = Workspace::snapshot(&config.workspace)?;
    let jobs = opts.jobs.clamp(1, pending.len());
    let mut workspaces = Vec::with_capacity(jobs);
    let mut clone_roots = Vec::new();
    if jobs == 1 {
        workspaces.push(main);
    } else {
        let base = opts
            .clone_dir
            .clone()
            .ok_or_else(|| CampaignError::Config("parallel campaigns need a clone directory".into()))?;
        for i in 0..jobs {
            let root = base.join(format!("clone-{i}"));
            copy_tree(&config.workspace, &root)?;
            let ws = Workspace::snapshot(&root)?;
            if !ws.same_sources(&main) {
                return Err(CampaignError::WorkspaceDirty { path: root });
            }
            clone_roots.push(root);
            workspaces.push(ws);
        }
    }

    let next = AtomicUsize::new(0);
    let abort = AtomicBool::new(false);
    let results: Mutex<Vec<StepResult>> = Mutex::new(Vec::new());
    let failures: Mutex<Vec<(usize, CampaignError)>> = Mutex::new(Vec::new());

    std::thread::scope(|scope| {
        for ws in &workspaces {
            scope.spawn(|| loop {
                if abort.load(Ordering::SeqCst) {
                    break;
                }
                let index = next.fetch_add(1, Ordering::SeqCst);
                let Some(m) = pending.get(index) else { break };
                let step = execute_step(ws, m, config, thresholds).and_then(|outcome| {
                    let record = CrashRecord::from_outcome(m, &outcome, &config.project);
                    sink.lock().expect("sink lock").commit(&m.id, record.as_ref())?;
                    Ok(StepResult {
                        index,
                        kind: m.kind,
                        variant: outcome.variant(),
                        record,
                    })
                });
                match step {
                    Ok(r) => {
                        log::debug!("{} {:?}", m.id, r.variant);
                        results.lock().expect("results lock").push(r);
                    }
                    Err(e) => {
                        abort.store(true, Ordering::SeqCst);
                        failures.lock().expect("failures lock").push((index, e));
                        break;
                    }
                }
            });
        }
    });

    for root in &clone_roots {
        let _ = std::fs::remove_dir_all(root);
    }
    let mut failures = failures.into_inner().expect("failures lock");
    if !failures.is_empty() {
        failures.sort_by_key(|(i, _)| *i);
        return Err(failures.swap_remove(0).1);
    }
    let mut results = results.into_inner().expect("results lock");
    results.sort_by_key(|r| r.index);
    let mut records = Vec::new();
    for r in results {
        summary.record(r.kind, r.variant);
        records.extend(r.record);
    }
    Ok((records, summary))
}
