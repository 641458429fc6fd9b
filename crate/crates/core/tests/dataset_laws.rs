use mutaloc_core::campaign::CrashRecord;
use mutaloc_core::dataset::{
    deduplicate, sample_from_record, split, stats, stats_markdown, DatasetError, DedupMode, Locality,
    PreprocessOptions, Sample, Split,
};
use mutaloc_core::mutation::MutatorKind;

const TRACES: [&str; 5] = [
    "Program received signal SIGSEGV, Segmentation fault.\n#0  0x0000555555555189 in buf_get (b=0x0, i=3) at src/buffer.c:30\n#1  0x00005555555551a0 in main () at tests/test_toy.c:12\n",
    "Program received signal SIGSEGV, Segmentation fault.\n#0  0x0000555555555289 in buf_sum (b=0x7ffe) at src/buffer.c:40\n#1  0x00005555555552a0 in main () at tests/test_toy.c:20\n",
    "Program received signal SIGSEGV, Segmentation fault.\n#0  0x0000555555555389 in table_get (t=0x0, k=0x4) at src/table.c:50\n#1  0x00005555555553a0 in main () at tests/test_toy.c:30\n",
    "Program received signal SIGABRT, Aborted.\n#0  0x0000555555555489 in str_reverse (s=0x0) at src/strutil.c:10\n#1  0x00005555555554a0 in main () at tests/test_toy.c:40\n",
    "Program received signal SIGFPE, Arithmetic exception.\n#0  0x0000555555555589 in stats_mean (xs=0x1, n=0) at src/stats.c:8\n#1  0x00005555555555a0 in main () at tests/test_toy.c:50\n",
];

// (trace, file, function); hand-labelled locality in the comments.
const ROWS: [(usize, &str, &str); 20] = [
    (0, "src/buffer.c", "buf_get"),     // local
    (0, "src/buffer.c", "buf_get"),     // local, repeat of 1
    (0, "src/buffer.c", "buf_grow"),
    (0, "src/buffer.c", "buf_push"),
    (1, "src/buffer.c", "buf_sum"),     // local
    (1, "src/buffer.c", "buf_sum"),     // local, repeat of 5
    (1, "src/buffer.c", "buf_sum"),     // local, repeat of 5
    (1, "src/buffer.c", "buf_get"),
    (2, "src/table.c", "table_get"),    // local
    (2, "src/table.c", "hash_key"),
    (2, "src/table.c", "table_put"),
    (2, "src/table.c", "hash_key"),     // repeat of 10
    (3, "src/strutil.c", "str_reverse"), // local
    (3, "src/strutil.c", "str_copy"),
    (3, "src/strutil.c", "str_reverse"), // local, repeat of 13
    (4, "src/stats.c", "stats_mean"),   // local
    (4, "src/stats.c", "stats_max"),
    (4, "src/stats.c", "clamp"),
    (0, "src/stats.c", "clamp"),
    (1, "src/table.c", "hash_key"),
];

fn records() -> Vec<CrashRecord> {
    ROWS.iter()
        .enumerate()
        .map(|(i, (t, file, func))| CrashRecord {
            id: format!("r{:02}", i + 1),
            project: "toy".into(),
            mutator: if i % 2 == 0 { MutatorKind::Comparison } else { MutatorKind::Delete },
            target_file: file.to_string(),
            target_function: func.to_string(),
            signal: "SIGSEGV".into(),
            raw_trace: TRACES[*t].into(),
            build_secs: 0.1,
            test_secs: 0.1,
            captured_at: chrono::Utc::now(),
        })
        .collect()
}

fn samples() -> Vec<Sample> {
    records()
        .iter()
        .map(|r| sample_from_record(r, &PreprocessOptions::default()).unwrap())
        .collect()
}

#[test]
fn raw_counts_match_hand_labels() {
    let all = samples();
    let s = stats(&all).unwrap();
    assert_eq!(s.crash_count, 20);
    assert_eq!(s.unique_targets, 12);
    assert!((s.percent_local - 45.0).abs() < 1e-9);
    assert_eq!(s.max_trace_depth, 2);
    assert!((s.mean_occurrence_per_trace - 4.0).abs() < 1e-12);
    assert!((s.mean_occurrence_per_pair - 20.0 / 15.0).abs() < 1e-12);
    assert_eq!(s.per_mutator["Comparison"], 10);
    assert_eq!(s.per_mutator["Delete"], 10);
    let local: Vec<&str> = all.iter().filter(|s| s.locality == Locality::Local).map(|s| s.id.as_str()).collect();
    assert_eq!(local, ["r01", "r02", "r05", "r06", "r07", "r09", "r13", "r15", "r16"]);
}

#[test]
fn pair_dedup_counts() {
    let d = deduplicate(samples(), DedupMode::PairUnique);
    let ids: Vec<&str> = d.iter().map(|s| s.id.as_str()).collect();
    assert_eq!(ids.len(), 15);
    for gone in ["r02", "r06", "r07", "r12", "r15"] {
        assert!(!ids.contains(&gone));
    }
    let s = stats(&d).unwrap();
    assert_eq!((s.crash_count, s.unique_targets), (15, 12));
    assert!((s.percent_local - 100.0 / 3.0).abs() < 1e-9);
    let table = stats_markdown(&[("toy".into(), s)]);
    assert_eq!(table.lines().nth(2), Some("| toy | 15 | 12 | 33.3 |"));
}

#[test]
fn trace_dedup_keeps_first_per_trace() {
    let d = deduplicate(samples(), DedupMode::TraceUnique);
    let ids: Vec<&str> = d.iter().map(|s| s.id.as_str()).collect();
    assert_eq!(ids, ["r01", "r05", "r09", "r13", "r16"]);
    assert_eq!(stats(&d).unwrap().percent_local, 100.0);
}

#[test]
fn split_sizes_and_reproducibility() {
    let d = deduplicate(samples(), DedupMode::PairUnique);
    let membership = |seed| -> Vec<Split> { split(d.clone(), 0.9, seed).unwrap().into_iter().map(|s| s.split).collect() };
    let first = membership(5);
    assert_eq!(first.iter().filter(|s| **s == Split::Train).count(), 13);
    assert_eq!(first.iter().filter(|s| **s == Split::Val).count(), 2);
    for _ in 0..5 {
        assert_eq!(membership(5), first);
    }
    assert!((0..20).any(|seed| membership(seed) != first));
    let kept: Vec<String> = split(d.clone(), 0.9, 5).unwrap().into_iter().map(|s| s.id).collect();
    assert_eq!(kept, d.iter().map(|s| s.id.clone()).collect::<Vec<_>>());
}

#[test]
fn split_refuses_repeated_pairs() {
    assert!(matches!(split(samples(), 0.9, 1), Err(DatasetError::NotDeduplicated(id)) if id == "r02"));
    let d = deduplicate(samples(), DedupMode::PairUnique);
    assert!(matches!(split(d, 1.5, 1), Err(DatasetError::BadFraction(_))));
}
