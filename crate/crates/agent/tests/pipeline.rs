use std::path::{Path, PathBuf};

use irspec_agent::gateway::Gateway;
use irspec_agent::mock::AlgorithmicBackend;
use irspec_agent::pipeline::{cap_samples, run_pipeline, PipelineError, PlanSource, RunConfig, RunOptions};
use irspec_agent::reasoning::{RunReport, MULTI_METHOD, SINGLE_METHOD};
use irspec_agent::synthetic::demo_dataset;
use irspec_core::model::{load_json, save_json, TaskType};

fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

#[test]
fn bundled_dataset_matches_generator() {
    let path = fixtures().join("datasets/ink.json");
    let dir = tempfile::tempdir().unwrap();
    let fresh = dir.path().join("ink.json");
    save_json(&demo_dataset(), &fresh).unwrap();
    if std::env::var_os("UPDATE_FIXTURES").is_some() {
        std::fs::copy(&fresh, &path).unwrap();
    }
    assert_eq!(
        std::fs::read(&path).unwrap(),
        std::fs::read(&fresh).unwrap(),
        "rerun with UPDATE_FIXTURES=1"
    );
    let ds = load_json::<f64>(&path).unwrap();
    assert_eq!(ds, demo_dataset());
    assert_eq!((ds.len(), ds.classes().len()), (80, 4));
}

fn config(out: &Path) -> RunConfig {
    let mut c = RunConfig::load(&fixtures().join("golden/run_config.json")).unwrap();
    c.output_dir = out.to_path_buf();
    c
}

fn run(c: &RunConfig, opts: RunOptions) -> (Gateway, RunReport) {
    c.validate().unwrap();
    let gw = Gateway::new(AlgorithmicBackend::new());
    let o = run_pipeline(c, opts, &gw).unwrap();
    (gw, o.report)
}

#[test]
fn mock_run_writes_every_artifact_deterministically() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let (gw, report) = run(&config(a.path()), RunOptions::default());
    assert_eq!(gw.network_attempts(), 0);
    assert_eq!(report.method, MULTI_METHOD);
    assert_eq!(report.material, "ink");
    assert_eq!(report.failed_repeats, 0);
    assert_eq!(report.repeats.len(), 5);
    run(&config(b.path()), RunOptions::default());
    for f in [
        "entities.json",
        "retrieval.json",
        "plan.json",
        "quality.json",
        "run_report.json",
        "run_report.csv",
        "comparison.csv",
        "comparison.json",
        "transcript.jsonl",
    ] {
        let x = std::fs::read(a.path().join(f)).unwrap_or_else(|e| panic!("{f}: {e}"));
        assert_eq!(x, std::fs::read(b.path().join(f)).unwrap(), "{f} differs between runs");
        let text = String::from_utf8(x).unwrap();
        assert!(
            !text.contains(a.path().to_str().unwrap()),
            "{f} mentions the output path"
        );
    }
    let plan = std::fs::read_to_string(a.path().join("plan.json")).unwrap();
    assert!(plan.contains("kb-ink-001"), "{plan}");
    let csv = std::fs::read_to_string(a.path().join("comparison.csv")).unwrap();
    assert!(csv.starts_with("method,metric,mean,std\n"));
    assert!(csv.contains("LLM(multi),accuracy,"));
    assert!(csv.contains("KNN(k=3),accuracy,"));
}

#[test]
fn single_turn_option_sets_one_round() {
    let d = tempfile::tempdir().unwrap();
    let (gw, report) = run(
        &config(d.path()),
        RunOptions {
            single_turn: true,
            repeats: Some(2),
        },
    );
    assert_eq!(report.method, SINGLE_METHOD);
    assert_eq!(report.config.max_rounds, 1);
    assert_eq!(report.repeats.len(), 2);
    // one extraction call, then a validation and a test call per repeat
    assert_eq!(gw.attempts(), 1 + 2 * 2);
}

#[test]
fn anomaly_and_regression_runs_complete() {
    let d = tempfile::tempdir().unwrap();
    let mut c = config(d.path());
    c.task = Some(TaskType::AnomalyDetection);
    c.anomaly = serde_json::from_str(r#"{"reference_class": "ink_A"}"#).unwrap();
    c.plan = PlanSource::KbQuery("ink".into());
    let (_, report) = run(
        &c,
        RunOptions {
            single_turn: false,
            repeats: Some(2),
        },
    );
    assert_eq!(report.task, TaskType::AnomalyDetection);
    for r in &report.repeats {
        let auc = r.test_metrics["auc"];
        assert!((0.0..=1.0).contains(&auc));
    }

    let ww = tempfile::tempdir().unwrap();
    let data = ww.path().join("ww.json");
    save_json(&irspec_core::synthetic::wastewater(60, 3).unwrap(), &data).unwrap();
    let mut c = config(&ww.path().join("out"));
    c.dataset = data;
    c.plan = PlanSource::KbQuery("waste water".into());
    let (_, report) = run(
        &c,
        RunOptions {
            single_turn: false,
            repeats: Some(2),
        },
    );
    assert_eq!(report.task, TaskType::Regression);
    assert!(report.aggregate.mean.contains_key("rmse"));
}

#[test]
fn config_errors_surface_before_any_work() {
    let d = tempfile::tempdir().unwrap();
    let mut c = config(d.path());
    c.dataset = d.path().join("missing.json");
    let e = c.validate().unwrap_err();
    assert_eq!(e.exit_code(), 1);
    let mut c = config(d.path());
    c.plan = PlanSource::Interactive;
    assert!(matches!(c.validate(), Err(PipelineError::Config(_))));
    let mut c = config(d.path());
    c.knowledge_base = None;
    assert!(c.validate().is_err());
    assert!(RunConfig::from_json(
        r#"{"$schema": "irspec-run/9", "dataset": "x", "plan": "interactive", "output_dir": "o"}"#
    )
    .is_err());
    assert!(
        RunConfig::from_json(r#"{"dataset": "x", "plan": {"kb_query": "ink"}, "output_dir": "o", "bogus": 1}"#)
            .is_err()
    );
}

#[test]
fn sample_cap_is_deterministic() {
    let ds = demo_dataset();
    let a = cap_samples(&ds, 50, 1).unwrap();
    assert_eq!(a.len(), 50);
    assert_eq!(a, cap_samples(&ds, 50, 1).unwrap());
    assert_ne!(a.ids(), cap_samples(&ds, 50, 2).unwrap().ids());
    assert_eq!(cap_samples(&ds, 80, 1).unwrap(), ds);
}
