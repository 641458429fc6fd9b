use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};

const SRC: &str = "\
int pick(int n)
{
    int r = 0;
    if (n < 3)
        r = 1;
    return r + n * 2;
}
";

struct Tiny {
    dir: tempfile::TempDir,
}

impl Tiny {
    fn new(build: &str) -> Self {
        let dir = tempfile::tempdir().unwrap();
        let ws = dir.path().join("ws");
        fs::create_dir(&ws).unwrap();
        fs::write(ws.join("m.c"), SRC).unwrap();
        fs::write(ws.join("build.sh"), build).unwrap();
        fs::write(
            ws.join("test.sh"),
            "grep -q 'if (n < 3)' m.c && exit 0\necho '#0  pick (n=1) at m.c:4'\necho '#1  main () at t.c:2'\nkill -SEGV $$\n",
        )
        .unwrap();
        fs::write(dir.path().join("coverage.tsv"), "# file\tfunction\thits\nm.c\tpick\t3\n").unwrap();
        fs::write(
            dir.path().join("campaign.toml"),
            r#"project = "tiny"
workspace = "ws"
coverage = "coverage.tsv"
build_command = ["sh", "build.sh"]
test_command = ["sh", "test.sh"]
debugger_command = ["{TEST}"]
build_threshold_secs = 10.0
test_threshold_secs = 10.0
"#,
        )
        .unwrap();
        Tiny { dir }
    }

    fn path(&self, rel: &str) -> PathBuf {
        self.dir.path().join(rel)
    }

    fn run(&self, args: &[&str]) -> Output {
        let mut full = vec!["--config", "campaign.toml", "--out", "out"];
        full.extend_from_slice(args);
        mutaloc(self.dir.path(), &full)
    }
}

fn mutaloc(cwd: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mutaloc"))
        .args(args)
        .current_dir(cwd)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn jsonl(path: &Path) -> Vec<Value> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect()
}

#[test]
fn usage_errors_exit_one() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(mutaloc(tmp.path(), &["frobnicate"]).status.code(), Some(1));
    assert_eq!(mutaloc(tmp.path(), &["--help"]).status.code(), Some(0));
    let o = mutaloc(tmp.path(), &["enumerate", "--root", "."]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("coverage"), "{}", stderr(&o));
}

#[test]
fn missing_coverage_file_exits_one() {
    let t = Tiny::new("true\n");
    fs::remove_file(t.path("coverage.tsv")).unwrap();
    let o = t.run(&["enumerate"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("coverage.tsv"), "{}", stderr(&o));
}

#[test]
fn kinds_filter_limits_the_plan() {
    let t = Tiny::new("true\n");
    let o = t.run(&["enumerate", "--kinds", "Comparison"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let plan = jsonl(&t.path("out/plan.jsonl"));
    assert!(!plan.is_empty());
    assert!(plan.iter().all(|m| m["kind"] == "Comparison"));
    assert_eq!(t.run(&["enumerate", "--kinds", "Bogus"]).status.code(), Some(1));
}

#[test]
fn campaign_then_rerun_does_nothing() {
    let t = Tiny::new("true\n");
    assert!(t.run(&["enumerate"]).status.success());
    let plan = jsonl(&t.path("out/plan.jsonl"));
    let o = t.run(&["campaign"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains(&format!("planned {}, executed {}", plan.len(), plan.len())));
    let summary: Value = serde_json::from_str(&fs::read_to_string(t.path("out/summary.json")).unwrap()).unwrap();
    let crashes = summary["summary"]["crash_records"].as_u64().unwrap() as usize;
    assert!(crashes > 0);
    assert_eq!(jsonl(&t.path("out/crashes.jsonl")).len(), crashes);

    let again = t.run(&["campaign"]);
    assert!(again.status.success());
    assert!(stdout(&again).contains("executed 0"), "{}", stdout(&again));
    assert_eq!(fs::read_to_string(t.path("ws/m.c")).unwrap(), SRC);
}

#[test]
fn max_steps_then_resume() {
    let t = Tiny::new("true\n");
    assert!(t.run(&["enumerate"]).status.success());
    let n = jsonl(&t.path("out/plan.jsonl")).len();
    assert!(t.run(&["campaign", "--max-steps", "2"]).status.success());
    let o = t.run(&["campaign"]);
    assert!(stdout(&o).contains(&format!("executed {}, resumed 2", n - 2)), "{}", stdout(&o));
}

#[test]
fn corrupt_journal_exits_one_with_line() {
    let t = Tiny::new("true\n");
    assert!(t.run(&["enumerate"]).status.success());
    let id = jsonl(&t.path("out/plan.jsonl"))[0]["id"].as_str().unwrap().to_string();
    fs::write(t.path("out/journal.txt"), format!("{id}\n{id}\n%%garbage\n")).unwrap();
    let o = t.run(&["campaign"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));
}

#[test]
fn failing_baseline_build_exits_two() {
    let t = Tiny::new("exit 1\n");
    assert!(t.run(&["enumerate"]).status.success());
    let o = t.run(&["campaign"]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert_eq!(fs::read_to_string(t.path("ws/m.c")).unwrap(), SRC);
}

fn write_records(path: &Path, n: usize) {
    let lines: String = (0..n)
        .map(|i| {
            let trace = format!(
                "Program received signal SIGSEGV, Segmentation fault.\n#0  0x00005555555551{i:02x} in leaf{i} (p=0x0) at src/leaf.c:{}\n#1  0x0000555555555200 in main () at src/main.c:9\n",
                10 + i
            );
            let target = if i % 2 == 0 { format!("leaf{i}") } else { format!("helper{i}") };
            json!({
                "id": format!("rec-{i}"),
                "project": "demo",
                "mutator": "Comparison",
                "target_file": "src/leaf.c",
                "target_function": target,
                "signal": "SIGSEGV",
                "raw_trace": trace,
                "build_secs": 0.5,
                "test_secs": 0.2,
                "captured_at": "2026-01-01T00:00:00Z",
            })
            .to_string()
                + "\n"
        })
        .collect();
    fs::write(path, lines).unwrap();
}

#[test]
fn dataset_prompts_and_eval() {
    let tmp = tempfile::tempdir().unwrap();
    let cwd = tmp.path();
    write_records(&cwd.join("records.jsonl"), 20);
    let o = mutaloc(cwd, &["--seed", "3", "dataset", "--records", "records.jsonl"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let stats = fs::read_to_string(cwd.join("out/stats.md")).unwrap();
    assert!(stats.starts_with("| Project | #C | #T | %L |"));
    assert!(stats.contains("| demo | 20 | 20 | 50.0 |"), "{stats}");
    let samples = jsonl(&cwd.join("out/dataset.jsonl"));
    let val = samples.iter().filter(|s| s["split"] == "Val").count();
    assert_eq!((samples.len(), val), (20, 2));

    let o = mutaloc(cwd, &["prompts", "--dataset", "out/dataset.jsonl", "--mode", "zero-shot"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let files: Vec<_> = fs::read_dir(cwd.join("out/prompts")).unwrap().collect();
    assert_eq!(files.len(), val);

    let o = mutaloc(cwd, &["prompts", "--dataset", "out/dataset.jsonl", "--mode", "finetune"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(jsonl(&cwd.join("out/finetune/train.jsonl")).len(), 18);

    fs::write(cwd.join("empty.jsonl"), "").unwrap();
    let o = mutaloc(cwd, &["eval", "--dataset", "out/dataset.jsonl", "--predictions", "empty.jsonl"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let reports: Value = serde_json::from_str(&fs::read_to_string(cwd.join("out/eval.json")).unwrap()).unwrap();
    assert_eq!(reports[0]["missing_count"], val);
    assert_eq!(reports[0]["unparseable_count"], 0);
    assert_eq!(reports[0]["accuracy_total"], 0.0);

    let o = mutaloc(cwd, &["eval", "--dataset", "out/dataset.jsonl", "--baseline", "innermost", "--mode", "function"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let md = fs::read_to_string(cwd.join("out/eval.md")).unwrap();
    assert!(md.contains("| Model | Local | Non-Local | Total |"));
    assert!(mutaloc(cwd, &["report"]).status.success());
    assert!(fs::read_to_string(cwd.join("out/report.md")).unwrap().contains("| innermost |"));
}

#[test]
fn preprocess_prints_rendered_trace() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(
        tmp.path().join("t.gdb"),
        "Program received signal SIGSEGV, Segmentation fault.\n#0  0x0000555555555159 in g (p=0x0) at c.c:2\n#1  0x000055555555517d in main () at c.c:3\n",
    )
    .unwrap();
    let o = mutaloc(tmp.path(), &["preprocess", "t.gdb", "--print"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("#0  in g at c.c:2\n#1  in main at c.c:3\nProgram received signal SIGSEGV"), "{}", stdout(&o));
}
