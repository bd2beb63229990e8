use std::sync::{Arc, Mutex};
use std::time::Duration;

use irspec_agent::gateway::{
    estimate_tokens, BackendError, FaultBackend, Gateway, LlmConfig, LlmError, ScriptedBackend, Transcript,
};
use irspec_agent::mock::AlgorithmicBackend;
use irspec_agent::reasoning::RepeatInput;
use irspec_agent::reasoning::{build_prompt, run_repeats, PromptContext, PromptError, ReasoningConfig, MULTI_METHOD};
use irspec_core::model::TaskType;
use irspec_core::synthetic::{separable_blobs, UndercoveredDesign};

fn ctx(budget: usize) -> PromptContext {
    PromptContext {
        material: "blobs".into(),
        feature_description: "synthetic coordinates".into(),
        unit: String::new(),
        token_budget: budget,
    }
}

#[test]
fn budget_admits_eighty_exemplars_and_blocks_the_eighty_first() {
    let (fm, truth) = separable_blobs(41, 2, 5, 4.0, 9).unwrap();
    let queries = [81usize];
    let eighty: Vec<usize> = (0..80).collect();
    let eighty_one: Vec<usize> = (0..81).collect();
    let open = ctx(usize::MAX);
    let est80 =
        estimate_tokens(&build_prompt(TaskType::Classification, &fm, &truth, &eighty, &queries, &open).unwrap());
    let est81 =
        estimate_tokens(&build_prompt(TaskType::Classification, &fm, &truth, &eighty_one, &queries, &open).unwrap());
    assert!(est81 > est80);

    // a context window whose 80% budget is exactly the 80-row prompt
    let llm = LlmConfig {
        context_tokens: (est80 as f64 / 0.8).ceil() as usize,
        ..LlmConfig::default()
    };
    let budget = llm.token_budget();
    assert!(budget >= est80 && budget < est81, "{est80} ≤ {budget} < {est81}");
    let tight = ctx(budget);
    let m80 = build_prompt(TaskType::Classification, &fm, &truth, &eighty, &queries, &tight).unwrap();
    assert_eq!(
        build_prompt(TaskType::Classification, &fm, &truth, &eighty_one, &queries, &tight),
        Err(PromptError::BudgetExceeded {
            estimated: est81,
            budget
        })
    );

    let gw = Gateway::new(AlgorithmicBackend::new());
    gw.complete(&llm, &m80, "80").unwrap();
    let m81 = build_prompt(TaskType::Classification, &fm, &truth, &eighty_one, &queries, &open).unwrap();
    assert_eq!(
        gw.complete(&llm, &m81, "81"),
        Err(LlmError::BudgetExceeded {
            estimated: est81,
            budget
        })
    );
    assert_eq!(gw.attempts(), 1);
}

#[test]
fn backoff_doubles_with_bounded_jitter_and_honours_retry_after() {
    let waits = Arc::new(Mutex::new(Vec::new()));
    let w = waits.clone();
    let faults = [
        BackendError::Timeout,
        BackendError::Transport("reset".into()),
        BackendError::RateLimited {
            retry_after_ms: Some(2500),
        },
    ];
    let gw = Gateway::new(FaultBackend::new(AlgorithmicBackend::new(), faults))
        .with_sleeper(move |d: Duration| w.lock().unwrap().push(d));
    let msgs = irspec_agent::extraction::extraction_messages("Classify inks");
    let ex = gw.complete(&LlmConfig::default(), &msgs, "retry").unwrap();
    assert_eq!(ex.attempts, 4);
    let waits = waits.lock().unwrap();
    let ms: Vec<u128> = waits.iter().map(Duration::as_millis).collect();
    assert!((1000..1250).contains(&ms[0]), "{ms:?}");
    assert!((2000..2500).contains(&ms[1]), "{ms:?}");
    assert_eq!(ms[2], 2500);
}

#[test]
fn mock_backends_never_touch_the_network() {
    let gw = Gateway::new(AlgorithmicBackend::new());
    let msgs = irspec_agent::extraction::extraction_messages("Detect counterfeit ink");
    let a = gw.complete(&LlmConfig::default(), &msgs, "a").unwrap();
    let b = gw.complete(&LlmConfig::default(), &msgs, "b").unwrap();
    assert_eq!(a.response, b.response);
    assert_eq!((a.latency_ms, b.latency_ms), (0, 0));
    assert_eq!(gw.network_attempts(), 0);
}

fn undercovered(seed: u64) -> RepeatInput {
    let d = UndercoveredDesign::generate(seed).unwrap();
    let split = d.split(seed);
    RepeatInput {
        features: d.features,
        truth: d.labels,
        split,
        context: ctx(LlmConfig::default().token_budget()),
    }
}

#[test]
fn replaying_a_transcript_reproduces_the_run() {
    let cfg = ReasoningConfig {
        repeats: 3,
        seed: 4,
        ..Default::default()
    };
    let llm = LlmConfig::default();
    let live = Gateway::new(AlgorithmicBackend::new());
    let a = run_repeats(
        TaskType::Classification,
        &cfg,
        &live,
        &llm,
        MULTI_METHOD,
        &mut |_, s| Ok(undercovered(s)),
    )
    .unwrap();

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("transcript.jsonl");
    live.transcript().write(&path).unwrap();
    let replay = Gateway::new(ScriptedBackend::from_transcript(&Transcript::read(&path).unwrap()));
    let mut b = run_repeats(
        TaskType::Classification,
        &cfg,
        &replay,
        &llm,
        MULTI_METHOD,
        &mut |_, s| Ok(undercovered(s)),
    )
    .unwrap();
    assert_eq!(b.backend, "scripted");
    b.backend = a.backend.clone();
    assert_eq!(a.to_json(), b.to_json());
    assert_eq!(live.transcript(), replay.transcript());
}
