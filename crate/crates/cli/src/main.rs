use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

mod commands;

/// Mutation-driven crash datasets and fault-localization scoring.
#[derive(Debug, Parser)]
#[command(name = "mutaloc", version)]
pub struct Cli {
    /// Campaign config (TOML).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Seed for planning and splitting; overrides the config.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Parallel workspace clones for `campaign`.
    #[arg(long, global = true, default_value_t = 1)]
    pub jobs: usize,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// More logging (repeatable).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum TraceFormat {
    Gdb,
    Hana,
    Generic,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ObfuscateArg {
    PerLine,
    PerTerm,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum DedupArg {
    Pair,
    Trace,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PromptMode {
    Finetune,
    ZeroShot,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum EvalModeArg {
    FileFunction,
    Function,
    Authentic,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum BaselineArg {
    Innermost,
    Nn,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Enumerate mutation sites and write a coverage-filtered plan.
    Enumerate {
        /// Source tree; defaults to the config workspace.
        #[arg(long)]
        root: Option<PathBuf>,
        /// Coverage TSV; defaults to the config value.
        #[arg(long)]
        coverage: Option<PathBuf>,
        /// Comma-separated mutator kinds.
        #[arg(long, value_delimiter = ',')]
        kinds: Vec<String>,
        #[arg(long)]
        max: Option<usize>,
    },
    /// Execute a plan: mutate, build, test, record crashes.
    Campaign {
        /// Plan JSONL; defaults to `<out>/plan.jsonl`.
        #[arg(long)]
        plan: Option<PathBuf>,
        /// Stop after this many steps (resume later).
        #[arg(long)]
        max_steps: Option<usize>,
    },
    /// Render raw debugger output the way samples store it.
    Preprocess {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long, value_enum, default_value_t = TraceFormat::Gdb)]
        format: TraceFormat,
        #[arg(long, default_value_t = mutaloc_core::stacktrace::DEFAULT_TOKEN_BUDGET)]
        budget: usize,
        #[arg(long, value_enum)]
        obfuscate: Option<ObfuscateArg>,
        /// Print to stdout instead of writing files.
        #[arg(long)]
        print: bool,
    },
    /// Turn crash records into a deduplicated, split dataset.
    Dataset {
        /// CrashRecord JSONL files.
        #[arg(long = "records", required = true)]
        records: Vec<PathBuf>,
        /// Authentic crash reports JSONL.
        #[arg(long)]
        authentic: Option<PathBuf>,
        #[arg(long, default_value_t = mutaloc_core::dataset::DEFAULT_TRAIN_FRACTION)]
        train_fraction: f64,
        #[arg(long, value_enum, default_value_t = DedupArg::Pair)]
        dedup: DedupArg,
        #[arg(long, value_enum, default_value_t = TraceFormat::Gdb)]
        format: TraceFormat,
        #[arg(long, default_value_t = mutaloc_core::stacktrace::DEFAULT_TOKEN_BUDGET)]
        budget: usize,
    },
    /// Emit fine-tuning examples or zero-shot prompts.
    Prompts {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long, value_enum)]
        mode: PromptMode,
        #[arg(long)]
        project_name: Option<String>,
        #[arg(long, default_value = "C programming language")]
        language: String,
        #[arg(long, default_value = "open-source project")]
        description: String,
        /// Replacement zero-shot template with a {STACK} placeholder.
        #[arg(long)]
        template: Option<PathBuf>,
    },
    /// Score predictions or a baseline against a dataset.
    Eval {
        #[arg(long)]
        dataset: PathBuf,
        /// Predictions JSONL.
        #[arg(long, required_unless_present = "baseline", conflicts_with = "baseline")]
        predictions: Option<PathBuf>,
        #[arg(long, value_enum)]
        baseline: Option<BaselineArg>,
        #[arg(long, value_enum, default_value_t = EvalModeArg::FileFunction)]
        mode: EvalModeArg,
        /// Set semantics for average precision instead of clipped counts.
        #[arg(long)]
        set_semantics: bool,
    },
    /// Collect summary, stats and evaluation tables into one Markdown file.
    Report,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(commands::exit_code(&e))
        }
    }
}
