use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde_json::json;

use mutaloc_core::campaign::{
    self, calibrate_thresholds, load_coverage, read_journal, run_campaign, CampaignConfig, CampaignError,
    CampaignFiles, CrashRecord, RunOptions, Workspace,
};
use mutaloc_core::dataset::{self, AuthenticReport, DedupMode, PreprocessOptions, Sample, Split};
use mutaloc_core::evaluation::{self, ApSemantics, EvalMode, EvalOptions, EvalReport, Prediction};
use mutaloc_core::jsonl::{read_jsonl, write_jsonl};
use mutaloc_core::mutation::{enumerate_tree, Mutation, MutatorKind};
use mutaloc_core::prompting::{self, ProjectMeta, PromptTemplate};
use mutaloc_core::stacktrace::{self, ObfuscationMode, ParseOptions, SourceFormat, TokenCounter};

use crate::{BaselineArg, Cli, Command, DedupArg, EvalModeArg, ObfuscateArg, PromptMode, TraceFormat};

pub const DEFAULT_SEED: u64 = 0;

/// 2 for errors that may leave a working tree untrustworthy, 1 otherwise.
pub fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<CampaignError>() {
        Some(e) if e.is_hygiene_fatal() => 2,
        _ => 1,
    }
}

pub fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Enumerate {
            root,
            coverage,
            kinds,
            max,
        } => enumerate(cli, root.as_deref(), coverage.as_deref(), kinds, *max),
        Command::Campaign { plan, max_steps } => campaign(cli, plan.as_deref(), *max_steps),
        Command::Preprocess {
            inputs,
            format,
            budget,
            obfuscate,
            print,
        } => preprocess(cli, inputs, *format, *budget, *obfuscate, *print),
        Command::Dataset {
            records,
            authentic,
            train_fraction,
            dedup,
            format,
            budget,
        } => build_dataset(cli, records, authentic.as_deref(), *train_fraction, *dedup, *format, *budget),
        Command::Prompts {
            dataset,
            mode,
            project_name,
            language,
            description,
            template,
        } => prompts(cli, dataset, *mode, project_name.as_deref(), language, description, template.as_deref()),
        Command::Eval {
            dataset,
            predictions,
            baseline,
            mode,
            set_semantics,
        } => eval(cli, dataset, predictions.as_deref(), *baseline, *mode, *set_semantics),
        Command::Report => report(cli),
    }
}

fn load_config(cli: &Cli) -> Result<Option<CampaignConfig>> {
    cli.config
        .as_deref()
        .map(|p| CampaignConfig::load(p).with_context(|| format!("loading {}", p.display())))
        .transpose()
}

fn out_dir(cli: &Cli) -> Result<&Path> {
    fs::create_dir_all(&cli.out).with_context(|| format!("creating {}", cli.out.display()))?;
    Ok(&cli.out)
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn write_json(path: &Path, value: &serde_json::Value) -> Result<()> {
    write_text(path, &format!("{}\n", serde_json::to_string_pretty(value)?))
}

fn source_format(f: TraceFormat) -> SourceFormat {
    match f {
        TraceFormat::Gdb => SourceFormat::GdbTopFirst,
        TraceFormat::Hana => SourceFormat::HanaDump,
        TraceFormat::Generic => SourceFormat::Generic,
    }
}

fn enumerate(
    cli: &Cli,
    root: Option<&Path>,
    coverage: Option<&Path>,
    kinds: &[String],
    max: Option<usize>,
) -> Result<()> {
    let config = load_config(cli)?;
    let root: PathBuf = match (root, &config) {
        (Some(r), _) => r.to_path_buf(),
        (None, Some(c)) => c.workspace.clone(),
        (None, None) => bail!("no source tree: pass --root or --config"),
    };
    let coverage = coverage
        .map(Path::to_path_buf)
        .or_else(|| config.as_ref().and_then(|c| c.coverage.clone()))
        .context("no coverage file: pass --coverage or set `coverage` in the config")?;
    let report = fs::read_to_string(&coverage).with_context(|| format!("reading coverage {}", coverage.display()))?;
    let targets = load_coverage(&report)?;

    let mut plan_config = config.unwrap_or_else(|| CampaignConfig {
        project: "project".into(),
        workspace: root.clone(),
        build_command: Vec::new(),
        test_command: Vec::new(),
        debugger_command: Vec::new(),
        build_threshold_secs: None,
        test_threshold_secs: None,
        threshold_multiplier: 1.0,
        min_threshold_secs: 0.0,
        max_mutations: 1000,
        seed: DEFAULT_SEED,
        mutator_kinds: MutatorKind::ALL.into_iter().collect(),
        crash_signals: BTreeSet::new(),
        coverage: None,
    });
    if !kinds.is_empty() {
        plan_config.mutator_kinds = kinds
            .iter()
            .map(|k| k.trim().parse::<MutatorKind>())
            .collect::<Result<_, _>>()?;
    }
    if let Some(m) = max {
        if m == 0 {
            bail!("--max must be at least 1");
        }
        plan_config.max_mutations = m;
    }
    if let Some(seed) = cli.seed {
        plan_config.seed = seed;
    }

    let sites = enumerate_tree(&root, &plan_config.mutator_kinds)?;
    let plan = campaign::plan(&sites, &targets, &plan_config)?;
    let out = out_dir(cli)?;
    write_jsonl(&out.join("plan.jsonl"), &plan)?;

    let mut site_counts: BTreeMap<MutatorKind, usize> = BTreeMap::new();
    for s in &sites {
        *site_counts.entry(s.kind).or_default() += 1;
    }
    let mut plan_counts: BTreeMap<MutatorKind, usize> = BTreeMap::new();
    for m in &plan {
        *plan_counts.entry(m.kind).or_default() += 1;
    }
    println!("{:<20} {:>6} {:>6}", "mutator", "sites", "plan");
    for kind in &plan_config.mutator_kinds {
        println!(
            "{:<20} {:>6} {:>6}",
            kind.name(),
            site_counts.get(kind).copied().unwrap_or(0),
            plan_counts.get(kind).copied().unwrap_or(0)
        );
    }
    println!("{} mutations planned -> {}", plan.len(), out.join("plan.jsonl").display());
    Ok(())
}

fn campaign(cli: &Cli, plan_path: Option<&Path>, max_steps: Option<usize>) -> Result<()> {
    let config = load_config(cli)?.context("campaign needs --config")?;
    let out = out_dir(cli)?;
    let plan_path = plan_path.map(Path::to_path_buf).unwrap_or_else(|| out.join("plan.jsonl"));
    let plan: Vec<Mutation> = read_jsonl(&plan_path).with_context(|| format!("reading plan {}", plan_path.display()))?;
    let files = CampaignFiles {
        records: out.join("crashes.jsonl"),
        journal: out.join("journal.txt"),
    };
    let done = read_journal(&files.journal)?;
    let pending = plan.iter().filter(|m| !done.contains(&m.id)).count();

    if pending == 0 {
        println!("planned {}, executed 0, resumed {}: nothing to do", plan.len(), plan.len());
        return Ok(());
    }
    let (summary, thresholds) = {
        let ws = Workspace::snapshot(&config.workspace)?;
        let thresholds = calibrate_thresholds(&config, &ws)?;
        log::info!("thresholds: build {:?}, test {:?}", thresholds.build, thresholds.test);
        let opts = RunOptions {
            jobs: cli.jobs,
            clone_dir: Some(out.join("clones")),
            stop_after: max_steps,
        };
        let (_, summary) = run_campaign(&config, thresholds, &plan, &files, &opts)?;
        (summary, thresholds)
    };

    write_json(
        &out.join("summary.json"),
        &json!({
            "summary": summary,
            "build_threshold_secs": thresholds.build.as_secs_f64(),
            "test_threshold_secs": thresholds.test.as_secs_f64(),
        }),
    )?;
    println!(
        "planned {}, executed {}, resumed {}, crashes {}",
        summary.planned, summary.executed, summary.resumed, summary.crash_records
    );
    for (variant, n) in &summary.by_outcome {
        println!("  {variant:?}: {n}");
    }
    Ok(())
}

fn preprocess(
    cli: &Cli,
    inputs: &[PathBuf],
    format: TraceFormat,
    budget: usize,
    obfuscate: Option<ObfuscateArg>,
    print: bool,
) -> Result<()> {
    let opts = ParseOptions::default();
    for input in inputs {
        let raw = fs::read_to_string(input).with_context(|| format!("reading {}", input.display()))?;
        let mut rendered = stacktrace::preprocess(&raw, source_format(format), &opts, budget, TokenCounter::Lexical)
            .with_context(|| format!("preprocessing {}", input.display()))?;
        if let Some(mode) = obfuscate {
            let mode = match mode {
                ObfuscateArg::PerLine => ObfuscationMode::PerLine,
                ObfuscateArg::PerTerm => ObfuscationMode::PerTerm,
            };
            rendered = stacktrace::obfuscate(&rendered, mode);
        }
        if print {
            println!("{rendered}");
        } else {
            let dir = out_dir(cli)?.join("preprocessed");
            fs::create_dir_all(&dir)?;
            let stem = input.file_stem().map_or("trace".into(), |s| s.to_string_lossy().into_owned());
            write_text(&dir.join(format!("{stem}.txt")), &format!("{rendered}\n"))?;
        }
    }
    Ok(())
}

fn build_dataset(
    cli: &Cli,
    record_files: &[PathBuf],
    authentic: Option<&Path>,
    train_fraction: f64,
    dedup: DedupArg,
    format: TraceFormat,
    budget: usize,
) -> Result<()> {
    let seed = cli.seed.unwrap_or(DEFAULT_SEED);
    let opts = PreprocessOptions {
        format: source_format(format),
        token_budget: budget,
        ..Default::default()
    };
    let mut samples = Vec::new();
    for path in record_files {
        let records: Vec<CrashRecord> = read_jsonl(path).with_context(|| format!("reading {}", path.display()))?;
        for r in &records {
            match dataset::sample_from_record(r, &opts) {
                Ok(s) => samples.push(s),
                Err(e) => log::warn!("skipping {e}"),
            }
        }
    }
    let mode = match dedup {
        DedupArg::Pair => DedupMode::PairUnique,
        DedupArg::Trace => DedupMode::TraceUnique,
    };
    let samples = dataset::split(dataset::deduplicate(samples, mode), train_fraction, seed)?;
    let out = out_dir(cli)?;
    write_jsonl(&out.join("dataset.jsonl"), &samples)?;

    let mut by_project: BTreeMap<String, Vec<Sample>> = BTreeMap::new();
    for s in &samples {
        by_project.entry(s.project.clone()).or_default().push(s.clone());
    }
    let mut rows = Vec::new();
    for (project, group) in &by_project {
        rows.push((project.clone(), dataset::stats(group)?));
    }
    if let Some(path) = authentic {
        let reports: Vec<AuthenticReport> = read_jsonl(path).with_context(|| format!("reading {}", path.display()))?;
        let kept = dataset::filter_authentic(&reports);
        write_jsonl(&out.join("authentic.jsonl"), &kept)?;
        println!("authentic: kept {} of {} reports", kept.len(), reports.len());
    }
    let table = dataset::stats_markdown(&rows);
    write_text(&out.join("stats.md"), &table)?;
    let stats_json: BTreeMap<&str, &dataset::DatasetStats> = rows.iter().map(|(p, s)| (p.as_str(), s)).collect();
    write_json(&out.join("stats.json"), &serde_json::to_value(stats_json)?)?;
    let train = samples.iter().filter(|s| s.split == Split::Train).count();
    println!("{} samples ({} train, {} val)", samples.len(), train, samples.len() - train);
    print!("{table}");
    Ok(())
}

fn safe_name(id: &str) -> String {
    id.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect()
}

fn prompts(
    cli: &Cli,
    dataset_path: &Path,
    mode: PromptMode,
    project_name: Option<&str>,
    language: &str,
    description: &str,
    template: Option<&Path>,
) -> Result<()> {
    let samples: Vec<Sample> = read_jsonl(dataset_path).with_context(|| format!("reading {}", dataset_path.display()))?;
    let out = out_dir(cli)?;
    match mode {
        PromptMode::Finetune => {
            let dir = out.join("finetune");
            fs::create_dir_all(&dir)?;
            for (split, name) in [(Split::Train, "train.jsonl"), (Split::Val, "val.jsonl")] {
                let examples = samples
                    .iter()
                    .filter(|s| s.split == split)
                    .map(prompting::finetune_example)
                    .collect::<Result<Vec<_>, _>>()?;
                write_jsonl(&dir.join(name), &examples)?;
                println!("{}: {} examples", name, examples.len());
            }
        }
        PromptMode::ZeroShot => {
            let template = match template {
                Some(p) => PromptTemplate::new(fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?)?,
                None => PromptTemplate::default(),
            };
            let dir = out.join("prompts");
            fs::create_dir_all(&dir)?;
            let mut n = 0;
            for s in evaluation::scored_samples(&samples) {
                let meta = ProjectMeta::new(project_name.unwrap_or(&s.project), language, description)?;
                write_text(&dir.join(format!("{}.txt", safe_name(&s.id))), &template.fill(&meta, &s.rendered_trace))?;
                n += 1;
            }
            println!("{n} zero-shot prompts -> {}", dir.display());
        }
    }
    Ok(())
}

fn eval(
    cli: &Cli,
    dataset_path: &Path,
    predictions: Option<&Path>,
    baseline: Option<BaselineArg>,
    mode: EvalModeArg,
    set_semantics: bool,
) -> Result<()> {
    let samples: Vec<Sample> = read_jsonl(dataset_path).with_context(|| format!("reading {}", dataset_path.display()))?;
    let mode = match mode {
        EvalModeArg::FileFunction => EvalMode::FileAndFunction,
        EvalModeArg::Function => EvalMode::FunctionOnly,
        EvalModeArg::Authentic => EvalMode::Authentic,
    };
    let opts = EvalOptions {
        ap_semantics: if set_semantics { ApSemantics::Set } else { ApSemantics::Clipped },
    };
    let (default_tag, preds): (String, Vec<Prediction>) = match (baseline, predictions) {
        (Some(BaselineArg::Innermost), _) => ("innermost".into(), evaluation::innermost_predictions(&samples, mode)),
        (Some(BaselineArg::Nn), _) => ("nn".into(), evaluation::nn_predictions(&samples, mode)?),
        (None, Some(path)) => {
            let tag = path.file_stem().map_or("model".into(), |s| s.to_string_lossy().into_owned());
            (tag, read_jsonl(path).with_context(|| format!("reading {}", path.display()))?)
        }
        (None, None) => bail!("pass --predictions or --baseline"),
    };

    let mut groups: BTreeMap<String, Vec<Prediction>> = BTreeMap::new();
    for p in preds {
        groups.entry(p.model_tag.clone()).or_default().push(p);
    }
    if groups.is_empty() {
        groups.insert(default_tag, Vec::new());
    }
    let mut reports: Vec<EvalReport> = Vec::new();
    for (tag, group) in &groups {
        let mut r = evaluation::evaluate(&samples, group, mode, opts)?;
        r.model_tag = tag.clone();
        reports.push(r);
    }
    let out = out_dir(cli)?;
    write_json(&out.join("eval.json"), &serde_json::to_value(&reports)?)?;
    let md = format!(
        "Accuracy (%)\n\n{}\nAverage precision (%)\n\n{}",
        evaluation::accuracy_markdown(&reports),
        evaluation::average_precision_markdown(&reports)
    );
    write_text(&out.join("eval.md"), &md)?;
    print!("{md}");
    for r in &reports {
        println!(
            "{}: scored {}, missing {}, unparseable {}, unseen-target correct {}",
            r.model_tag, r.scored, r.missing_count, r.unparseable_count, r.unseen_target_correct
        );
    }
    Ok(())
}

fn report(cli: &Cli) -> Result<()> {
    let out = out_dir(cli)?;
    let mut text = String::from("# Report\n");
    let summary = out.join("summary.json");
    if summary.exists() {
        let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&summary)?)?;
        text.push_str("\n## Campaign\n\n| Outcome | Count |\n|---|---:|\n");
        if let Some(map) = v["summary"]["by_outcome"].as_object() {
            for (k, n) in map {
                text.push_str(&format!("| {k} | {n} |\n"));
            }
        }
        text.push_str(&format!(
            "\nPlanned {}, executed {}, resumed {}.\n",
            v["summary"]["planned"], v["summary"]["executed"], v["summary"]["resumed"]
        ));
    }
    for (file, title) in [("stats.md", "Dataset"), ("eval.md", "Evaluation")] {
        let path = out.join(file);
        if path.exists() {
            text.push_str(&format!("\n## {title}\n\n{}", fs::read_to_string(&path)?));
        }
    }
    if text == "# Report\n" {
        bail!("nothing to report in {}", out.display());
    }
    write_text(&out.join("report.md"), &text)?;
    print!("{text}");
    Ok(())
}
