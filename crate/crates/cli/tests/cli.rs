use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

use irspec_core::model::{save_json, SpectralDataset, TaskType};
use irspec_core::MethodPlan;
use serde_json::Value;

const QUESTION: &str = "Can NIR spectra tell which brand an ink sample comes from?";

fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn irspec(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_irspec"))
        .args(args)
        .env_remove("LLM_API_KEY")
        .env_remove("LLM_MODEL")
        .env_remove("LLM_BASE_URL")
        .output()
        .unwrap()
}

fn ok(out: &Output) -> String {
    assert!(
        out.status.success(),
        "exit {:?}\nstdout:\n{}\nstderr:\n{}",
        out.status.code(),
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Compares with a committed golden file; `UPDATE_FIXTURES=1` rewrites it.
fn check_golden(name: &str, actual: &[u8]) {
    let path = fixtures().join("golden").join(name);
    if std::env::var_os("UPDATE_FIXTURES").is_some() {
        std::fs::write(&path, actual).unwrap();
    }
    let expected = std::fs::read(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    assert!(
        expected == actual,
        "{name} differs from the golden copy; rerun with UPDATE_FIXTURES=1 if intended"
    );
}

fn golden_config() -> PathBuf {
    fixtures().join("golden/run_config.json")
}

#[test]
fn mock_run_reproduces_golden_report() {
    let d = tempfile::tempdir().unwrap();
    let out = d.path().join("run");
    ok(&irspec(&[
        "run",
        s(&golden_config()),
        "--mock-backend",
        "--out",
        s(&out),
    ]));
    for f in [
        "run_report.json",
        "comparison.csv",
        "transcript.jsonl",
        "plan.json",
        "retrieval.json",
    ] {
        assert!(out.join(f).exists(), "{f}");
    }
    check_golden("run_report.json", &std::fs::read(out.join("run_report.json")).unwrap());
}

#[test]
fn mock_run_makes_no_network_calls() {
    let d = tempfile::tempdir().unwrap();
    let text = ok(&irspec(&[
        "--json",
        "run",
        s(&golden_config()),
        "--mock-backend",
        "--repeats",
        "2",
        "--out",
        s(d.path()),
    ]));
    let v: Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["network_calls"], 0);
    assert_eq!(v["failed_repeats"], 0);
}

#[test]
fn single_turn_flag_records_one_round() {
    let d = tempfile::tempdir().unwrap();
    ok(&irspec(&[
        "run",
        s(&golden_config()),
        "--mock-backend",
        "--single-turn",
        "--repeats",
        "2",
        "--out",
        s(d.path()),
    ]));
    let report: Value = serde_json::from_slice(&std::fs::read(d.path().join("run_report.json")).unwrap()).unwrap();
    assert_eq!(report["config"]["max_rounds"], 1);
    assert_eq!(report["method"], "LLM(single)");
    assert_eq!(report["repeats"].as_array().unwrap().len(), 2);
}

#[test]
fn seed_flag_changes_the_run_and_is_recorded() {
    let d = tempfile::tempdir().unwrap();
    let run = |seed: &str, dir: &str| {
        let out = d.path().join(dir);
        ok(&irspec(&[
            "--seed",
            seed,
            "run",
            s(&golden_config()),
            "--mock-backend",
            "--repeats",
            "1",
            "--out",
            s(&out),
        ]));
        std::fs::read_to_string(out.join("run_report.json")).unwrap()
    };
    let a = run("3", "a");
    assert_eq!(a, run("3", "b"));
    assert_ne!(a, run("4", "c"));
    let v: Value = serde_json::from_str(&a).unwrap();
    assert_eq!(v["repeats"][0]["seed"], 3);
}

#[test]
fn missing_api_key_fails_before_any_work() {
    let d = tempfile::tempdir().unwrap();
    let out_dir = d.path().join("never");
    let out = irspec(&["run", s(&golden_config()), "--out", s(&out_dir)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("LLM_API_KEY"));
    assert!(!out_dir.exists());

    let out = irspec(&["--json", "run", s(&golden_config()), "--out", s(&out_dir)]);
    assert_eq!(out.status.code(), Some(1));
    let v: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(v["error"]["kind"], "config");
    assert_eq!(v["error"]["code"], 1);
}

#[test]
fn bad_configs_exit_with_status_one() {
    let d = tempfile::tempdir().unwrap();
    let cfg = d.path().join("bad.json");
    std::fs::write(
        &cfg,
        r#"{"$schema":"irspec-run/9","dataset":"x","plan":{"kb_query":"ink"},"output_dir":"o"}"#,
    )
    .unwrap();
    let out = irspec(&["run", s(&cfg), "--mock-backend"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("schema"));

    std::fs::write(
        &cfg,
        r#"{"$schema":"irspec-run/1","dataset":"missing.json","plan":"interactive","output_dir":"o"}"#,
    )
    .unwrap();
    let out = irspec(&["run", s(&cfg), "--mock-backend"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn pipeline_failures_exit_with_status_two() {
    let d = tempfile::tempdir().unwrap();
    let cfg = d.path().join("cfg.json");
    // the mock cannot name a material outside its lexicon
    let text = format!(
        r#"{{"$schema":"irspec-run/1","dataset":{:?},"plan":{{"question":"What is this mystery powder?"}},"knowledge_base":{:?},"output_dir":"o"}}"#,
        s(&fixtures().join("datasets/ink.json")),
        s(&fixtures().join("kb.jsonl"))
    );
    std::fs::write(&cfg, text).unwrap();
    let out = irspec(&["run", s(&cfg), "--mock-backend"]);
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stderr).contains("extraction"));
}

fn session(answers: &str, out: &Path) -> Output {
    let d = tempfile::tempdir().unwrap();
    let file = d.path().join("answers.txt");
    std::fs::write(&file, answers).unwrap();
    irspec(&[
        "session",
        s(&fixtures().join("datasets/ink.json")),
        QUESTION,
        "--kb",
        s(&fixtures().join("kb.jsonl")),
        "--answers",
        s(&file),
        "--out",
        s(out),
        "--mock-backend",
    ])
}

#[test]
fn session_accepting_first_candidate_writes_it() {
    let d = tempfile::tempdir().unwrap();
    let text = ok(&session("1\naccept\n", d.path()));
    assert!(text.contains("1) SG+SNV → PCA"), "{text}");
    assert!(text.contains("kb-ink-001: "), "citation missing: {text}");
    let bytes = std::fs::read(d.path().join("plan.json")).unwrap();
    check_golden("plan.json", &bytes);
    let plan = MethodPlan::load(d.path().join("plan.json")).unwrap();
    assert_eq!(plan.summary(), "SG+SNV → PCA");
    assert_eq!(plan.provenance, ["kb-ink-001"]);
}

#[test]
fn session_parameter_edit_reruns_preview() {
    let d = tempfile::tempdir().unwrap();
    let text = ok(&session("1\nm=7\naccept\n", d.path()));
    assert_eq!(text.matches("preview:").count(), 2, "{text}");
    let bytes = std::fs::read(d.path().join("plan.json")).unwrap();
    check_golden("plan_edited.json", &bytes);
    let plan: Value = serde_json::from_slice(&bytes).unwrap();
    assert_eq!(plan["steps"][0]["m"], 7);
}

#[test]
fn session_manual_entry_is_marked_manual() {
    let d = tempfile::tempdir().unwrap();
    ok(&session("0\nSNV+FD PCA\naccept\n", d.path()));
    let plan = MethodPlan::load(d.path().join("plan.json")).unwrap();
    assert_eq!(plan.provenance, ["manual"]);
    assert_eq!(plan.summary(), "SNV+FD → PCA");
}

#[test]
fn session_abort_writes_nothing() {
    for answers in ["quit\n", "1\n", ""] {
        let d = tempfile::tempdir().unwrap();
        let out = session(answers, d.path());
        assert_eq!(out.status.code(), Some(1), "{answers:?}");
        assert!(!d.path().join("plan.json").exists());
        assert!(String::from_utf8_lossy(&out.stderr).contains("aborted"));
    }
}

#[test]
fn scripted_replay_matches_live_stdin() {
    let d = tempfile::tempdir().unwrap();
    let live_dir = d.path().join("live");
    let mut child = Command::new(env!("CARGO_BIN_EXE_irspec"))
        .args([
            "session",
            s(&fixtures().join("datasets/ink.json")),
            QUESTION,
            "--kb",
            s(&fixtures().join("kb.jsonl")),
            "--out",
            s(&live_dir),
            "--mock-backend",
        ])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(b"1\nm=7\naccept\n").unwrap();
    let live = child.wait_with_output().unwrap();
    let replay_dir = d.path().join("replay");
    let replay = session("1\nm=7\naccept\n", &replay_dir);
    let (a, b) = (ok(&live), ok(&replay));
    assert_eq!(a.replace(s(&live_dir), "OUT"), b.replace(s(&replay_dir), "OUT"));
    assert_eq!(
        std::fs::read(live_dir.join("plan.json")).unwrap(),
        std::fs::read(replay_dir.join("plan.json")).unwrap()
    );
}

#[test]
fn kb_build_query_and_eval() {
    let d = tempfile::tempdir().unwrap();
    let idx = d.path().join("kb.idx");
    ok(&irspec(&[
        "kb",
        "build",
        s(&fixtures().join("kb.jsonl")),
        "--engine",
        "bm25",
        "-o",
        s(&idx),
    ]));
    assert_eq!(&std::fs::read(&idx).unwrap()[..4], b"SKB1");

    let text = ok(&irspec(&["kb", "query", s(&idx), "pu er tea", "--top-k", "3"]));
    let hits: Vec<Value> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert!(!hits.is_empty() && hits.len() <= 3);
    assert_eq!(hits[0]["id"], "kb-tea-001");
    let scores: Vec<f64> = hits.iter().map(|h| h["score"].as_f64().unwrap()).collect();
    assert!(scores.windows(2).all(|w| w[0] >= w[1]));

    let text = ok(&irspec(&[
        "--json",
        "kb",
        "eval",
        "--corpus",
        s(&fixtures().join("retrieval/corpus.jsonl")),
        "--queries",
        s(&fixtures().join("retrieval/queries.jsonl")),
    ]));
    let v: Value = serde_json::from_str(&text).unwrap();
    let p = |e: &str| v["precision"][e].as_f64().unwrap();
    assert!(p("bow") < p("bm25") && p("bow") < p("tfidf"), "{v}");
    assert_eq!(v["documents"], 200);
    assert_eq!(v["queries"], 100);

    let out = irspec(&["kb", "query", s(&d.path().join("nope.idx")), "ink"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn extract_with_mock_backend() {
    let text = ok(&irspec(&["--json", "extract", "--mock-backend", QUESTION]));
    let v: Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["research_object"], "ink");
    assert_eq!(v["task"], "classification");
    let out = irspec(&["extract", QUESTION]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn plot_is_deterministic_and_counts_files() {
    let d = tempfile::tempdir().unwrap();
    let ink = fixtures().join("datasets/ink.json");
    let (a, b) = (d.path().join("a"), d.path().join("b"));
    ok(&irspec(&["plot", s(&ink), "--out", s(&a)]));
    ok(&irspec(&["plot", s(&ink), "--out", s(&b)]));
    let mut names: Vec<String> = std::fs::read_dir(&a)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert_eq!(names.len(), 81);
    assert_eq!(names.iter().filter(|n| n.starts_with("spectrum_")).count(), 80);
    assert!(names.contains(&"features.svg".to_string()));
    for n in &names {
        let x = std::fs::read(a.join(n)).unwrap();
        assert_eq!(x, std::fs::read(b.join(n)).unwrap(), "{n}");
        assert!(x.starts_with(b"<svg"));
    }
}

#[test]
fn plot_of_empty_dataset_warns_and_succeeds() {
    let d = tempfile::tempdir().unwrap();
    let path = d.path().join("empty.json");
    let grid: Vec<f64> = (0..10).map(|i| 900.0 + i as f64).collect();
    save_json(
        &SpectralDataset::<f64>::empty("nothing", TaskType::Classification, grid),
        &path,
    )
    .unwrap();
    let out_dir = d.path().join("plots");
    let out = irspec(&["plot", s(&path), "--out", s(&out_dir)]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("warning"));
    assert!(!out_dir.exists() || std::fs::read_dir(&out_dir).unwrap().next().is_none());
}

#[test]
fn compare_rebuilds_baselines_from_reports() {
    let d = tempfile::tempdir().unwrap();
    let (m, s1) = (d.path().join("multi"), d.path().join("single"));
    ok(&irspec(&[
        "run",
        s(&golden_config()),
        "--mock-backend",
        "--repeats",
        "2",
        "--out",
        s(&m),
    ]));
    ok(&irspec(&[
        "run",
        s(&golden_config()),
        "--mock-backend",
        "--single-turn",
        "--repeats",
        "2",
        "--out",
        s(&s1),
    ]));
    let table = d.path().join("table");
    let text = ok(&irspec(&[
        "compare",
        s(&golden_config()),
        s(&m.join("run_report.json")),
        s(&s1.join("run_report.json")),
        "--out",
        s(&table),
    ]));
    assert!(text.starts_with("method,metric,mean,std\n"));
    for row in ["LLM(multi),accuracy,", "LLM(single),accuracy,", "KNN(k=3),accuracy,"] {
        assert!(text.contains(row), "{text}");
    }
    assert_eq!(std::fs::read_to_string(table.join("comparison.csv")).unwrap(), text);
    // a different plan gives features that no longer match the recorded hashes
    let edited = fixtures().join("golden/plan_edited.json");
    let out = irspec(&[
        "compare",
        s(&golden_config()),
        s(&m.join("run_report.json")),
        "--plan",
        s(&edited),
    ]);
    assert_eq!(out.status.code(), Some(2));
}
