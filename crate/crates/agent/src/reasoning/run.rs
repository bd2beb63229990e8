use std::collections::{BTreeMap, BTreeSet};

use irspec_core::model::{FeatureMatrix, Label, Split, TaskType};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use super::config::ReasoningConfig;
use super::hard::select_hard_samples;
use super::metrics::{converged, primary_metric, task_metrics};
use super::parse::{parse_predictions, Predictions};
use super::prompt::{build_prompt, render_label, PromptContext, PromptError};
use super::report::{
    aggregate, FailureKind, RepeatReport, RepeatStatus, RunReport, SplitIds, StopReason, TurnState,
    REPORT_SCHEMA_VERSION,
};
use crate::gateway::{Gateway, LlmConfig, LlmError, Message};

pub const MULTI_METHOD: &str = "LLM(multi)";
pub const SINGLE_METHOD: &str = "LLM(single)";

/// Attempts per query batch, counting correction turns.
const PARSE_ATTEMPTS: usize = 3;

/// Everything one repeat reasons over.
#[derive(Debug, Clone)]
pub struct RepeatInput {
    pub features: FeatureMatrix,
    pub truth: Vec<Label>,
    pub split: Split,
    pub context: PromptContext,
}

/// Why a repeat, or a whole run, produced no result.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunFailure {
    pub kind: FailureKind,
    pub message: String,
}

impl RunFailure {
    fn data(message: impl Into<String>) -> Self {
        Self {
            kind: FailureKind::Data,
            message: message.into(),
        }
    }
}

impl std::fmt::Display for RunFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for RunFailure {}

fn provider_failure(tag: &str, e: LlmError) -> RunFailure {
    let kind = match e {
        LlmError::BudgetExceeded { .. } | LlmError::InvalidRequest(_) => FailureKind::Data,
        LlmError::EmptyResponse => FailureKind::Response,
        _ => FailureKind::Provider,
    };
    RunFailure {
        kind,
        message: format!("{tag}: {e}"),
    }
}

pub fn feature_hash(fm: &FeatureMatrix) -> String {
    hex::encode(Sha256::digest(fm.canonical_bytes()))
}

fn split_ids(fm: &FeatureMatrix, s: &Split) -> SplitIds {
    let ids = |v: &[usize]| v.iter().map(|&i| fm.ids()[i].clone()).collect();
    SplitIds {
        train: ids(&s.train),
        validation: ids(&s.validation),
        test: ids(&s.test),
    }
}

struct Asked {
    predictions: Predictions,
    seqs: Vec<usize>,
}

/// Sends `messages`; an unusable answer gets a correction turn, up to
/// [`PARSE_ATTEMPTS`] calls in total.
fn ask(
    task: TaskType,
    gw: &Gateway,
    llm: &LlmConfig,
    mut messages: Vec<Message>,
    expected: &[String],
    tag: &str,
) -> Result<Asked, RunFailure> {
    let mut seqs = Vec::new();
    let mut last = String::new();
    for attempt in 1..=PARSE_ATTEMPTS {
        let ex = gw
            .complete(llm, &messages, &format!("{tag} attempt {attempt}"))
            .map_err(|e| provider_failure(&format!("{tag} attempt {attempt}"), e))?;
        seqs.push(gw.transcript_len() - 1);
        match parse_predictions(task, &ex.response, expected) {
            Ok(predictions) => return Ok(Asked { predictions, seqs }),
            Err(e) => {
                log::warn!("{tag} attempt {attempt}: {e}");
                last = e.to_string();
                messages.push(Message::assistant(ex.response));
                messages.push(Message::user(format!(
                    "Your reply could not be used: {e}. Reply again with only the JSON array, answering every query id exactly once."
                )));
            }
        }
    }
    Err(RunFailure {
        kind: FailureKind::Response,
        message: format!("{tag}: no usable answer after {PARSE_ATTEMPTS} attempts: {last}"),
    })
}

/// Builds a prompt from `pool`, leaving out exemplars until it fits the
/// budget: oldest hard samples first, then training exemplars in
/// `drop_order`. Returns the messages and the indices left out.
fn fitted_prompt(
    task: TaskType,
    input: &RepeatInput,
    pool: &[usize],
    queries: &[usize],
    drop_order: &[usize],
) -> Result<(Vec<Message>, Vec<usize>), RunFailure> {
    let train: BTreeSet<usize> = input.split.train.iter().copied().collect();
    let mut candidates: Vec<usize> = pool.iter().copied().filter(|i| !train.contains(i)).collect();
    candidates.extend(drop_order.iter().copied().filter(|i| pool.contains(i)));
    let mut dropped: Vec<usize> = Vec::new();
    loop {
        let shown: Vec<usize> = pool.iter().copied().filter(|i| !dropped.contains(i)).collect();
        match build_prompt(task, &input.features, &input.truth, &shown, queries, &input.context) {
            Ok(m) => return Ok((m, dropped)),
            Err(PromptError::BudgetExceeded { estimated, budget }) => {
                let next = candidates.get(dropped.len()).copied();
                match next {
                    Some(i) if dropped.len() + 1 < pool.len() => dropped.push(i),
                    _ => {
                        return Err(RunFailure::data(format!(
                            "prompt needs ~{estimated} tokens even with one exemplar; budget is {budget}"
                        )))
                    }
                }
            }
            Err(e) => return Err(RunFailure::data(e.to_string())),
        }
    }
}

fn truth_map(fm: &FeatureMatrix, truth: &[Label], idx: &[usize]) -> BTreeMap<String, Label> {
    idx.iter().map(|&i| (fm.ids()[i].clone(), truth[i].clone())).collect()
}

fn drive(
    task: TaskType,
    cfg: &ReasoningConfig,
    gw: &Gateway,
    llm: &LlmConfig,
    input: &RepeatInput,
    rep: &mut RepeatReport,
) -> Result<(), RunFailure> {
    let fm = &input.features;
    if input.truth.len() != fm.len() {
        return Err(RunFailure::data(format!(
            "{} labels for {} samples",
            input.truth.len(),
            fm.len()
        )));
    }
    input
        .split
        .validate(fm.len())
        .map_err(|e| RunFailure::data(e.to_string()))?;
    if input.split.train.is_empty() || input.split.validation.is_empty() || input.split.test.is_empty() {
        return Err(RunFailure::data("every split part must be non-empty"));
    }
    let llm = llm.with_temperature(cfg.temperature);
    let index: BTreeMap<&str, usize> = fm.ids().iter().enumerate().map(|(i, id)| (id.as_str(), i)).collect();
    let val = &input.split.validation;
    let val_ids: Vec<String> = val.iter().map(|&i| fm.ids()[i].clone()).collect();
    let val_truth = truth_map(fm, &input.truth, val);
    let mut drop_order = input.split.train.clone();
    drop_order.shuffle(&mut ChaCha8Rng::seed_from_u64(rep.seed));

    let mut pool: Vec<usize> = input.split.train.clone();
    let mut previous: Option<f64> = None;
    for t in 1..=cfg.max_rounds {
        let (messages, dropped) = fitted_prompt(task, input, &pool, val, &drop_order)?;
        let tag = format!("repeat {} round {t}", rep.repeat);
        let asked = ask(task, gw, &llm, messages, &val_ids, &tag)?;
        let metrics = task_metrics(task, &asked.predictions.by_id, &val_truth)
            .map_err(|e| RunFailure::data(format!("{tag}: {e}")))?;
        let metric = metrics[primary_metric(task)];
        let pool_ids: BTreeSet<String> = pool.iter().map(|&i| fm.ids()[i].clone()).collect();
        let hard = select_hard_samples(task, &asked.predictions.by_id, &val_truth, &pool_ids, cfg);
        rep.rounds.push(TurnState {
            round: t,
            exemplar_ids: pool
                .iter()
                .filter(|i| !dropped.contains(i))
                .map(|&i| fm.ids()[i].clone())
                .collect(),
            truncated_ids: dropped.iter().map(|&i| fm.ids()[i].clone()).collect(),
            predictions: asked.predictions.by_id,
            metrics,
            metric,
            hard_samples: hard.clone(),
            transcript_seqs: asked.seqs,
            warnings: asked.predictions.warnings,
        });
        let stop = match previous {
            Some(p) if converged(p, metric, cfg.delta, cfg.stop_rule) => Some(StopReason::Converged),
            _ if hard.is_empty() => Some(StopReason::NoHardSamples),
            _ if t == cfg.max_rounds => Some(StopReason::MaxRounds),
            _ => None,
        };
        if let Some(reason) = stop {
            rep.stop_reason = Some(reason);
            if reason == StopReason::Converged {
                rep.convergence_round = Some(t);
            }
            break;
        }
        pool.extend(hard.iter().map(|id| index[id.as_str()]));
        previous = Some(metric);
    }

    // the held-out test set is touched exactly once, after the loop
    let test = &input.split.test;
    let test_ids: Vec<String> = test.iter().map(|&i| fm.ids()[i].clone()).collect();
    let (messages, _) = fitted_prompt(task, input, &pool, test, &drop_order)?;
    let asked = ask(
        task,
        gw,
        &llm,
        messages,
        &test_ids,
        &format!("repeat {} test", rep.repeat),
    )?;
    rep.test_metrics =
        task_metrics(task, &asked.predictions.by_id, &truth_map(fm, &input.truth, test)).map_err(RunFailure::data)?;
    rep.test_predictions = asked.predictions.by_id;
    rep.test_transcript_seqs = asked.seqs;
    Ok(())
}

/// Runs the validation loop for one repeat, then scores the test set once.
/// Failures are recorded in the returned report.
pub fn run_multi_turn(
    task: TaskType,
    cfg: &ReasoningConfig,
    gw: &Gateway,
    llm: &LlmConfig,
    input: &RepeatInput,
    repeat: usize,
    seed: u64,
) -> RepeatReport {
    let mut rep = RepeatReport::new(repeat, seed);
    rep.feature_hash = feature_hash(&input.features);
    rep.split = split_ids(&input.features, &input.split);
    match drive(task, cfg, gw, llm, input, &mut rep) {
        Ok(()) => rep.status = RepeatStatus::Ok,
        Err(e) => {
            log::error!("repeat {repeat} failed: {e}");
            rep.error = Some(e.message);
            rep.failure = Some(e.kind);
        }
    }
    rep
}

/// One validation call and one test call: the loop capped at one round.
pub fn single_turn(
    task: TaskType,
    cfg: &ReasoningConfig,
    gw: &Gateway,
    llm: &LlmConfig,
    input: &RepeatInput,
    repeat: usize,
    seed: u64,
) -> RepeatReport {
    run_multi_turn(task, &cfg.single_turn(), gw, llm, input, repeat, seed)
}

/// Runs `cfg.repeats` repeats with seeds `cfg.seed + r`. `prepare` builds the
/// input of each repeat from its seed.
pub fn run_repeats(
    task: TaskType,
    cfg: &ReasoningConfig,
    gw: &Gateway,
    llm: &LlmConfig,
    method: &str,
    prepare: &mut dyn FnMut(usize, u64) -> Result<RepeatInput, String>,
) -> Result<RunReport, RunFailure> {
    cfg.validate().map_err(RunFailure::data)?;
    let loop_cfg = if method == SINGLE_METHOD {
        cfg.single_turn()
    } else {
        cfg.clone()
    };
    let mut labels = BTreeMap::new();
    let mut material = String::new();
    let mut repeats = Vec::with_capacity(cfg.repeats);
    for r in 0..cfg.repeats {
        let seed = cfg.seed.wrapping_add(r as u64);
        let rep = match prepare(r, seed) {
            Ok(input) => {
                if material.is_empty() {
                    material = input.context.material.clone();
                }
                for (id, l) in input.features.ids().iter().zip(&input.truth) {
                    labels.entry(id.clone()).or_insert_with(|| render_label(l));
                }
                run_multi_turn(task, &loop_cfg, gw, llm, &input, r, seed)
            }
            Err(e) => {
                let mut rep = RepeatReport::new(r, seed);
                rep.error = Some(e);
                rep.failure = Some(FailureKind::Data);
                rep
            }
        };
        repeats.push(rep);
    }
    let ok: Vec<&RepeatReport> = repeats.iter().filter(|r| r.is_ok()).collect();
    if ok.is_empty() {
        let first = &repeats[0];
        return Err(RunFailure {
            kind: first.failure.unwrap_or(FailureKind::Data),
            message: format!(
                "all {} repeats failed; first error: {}",
                repeats.len(),
                first.error.clone().unwrap_or_default()
            ),
        });
    }
    Ok(RunReport {
        schema_version: REPORT_SCHEMA_VERSION,
        method: method.to_string(),
        task,
        material,
        backend: gw.backend_name().to_string(),
        model: llm.model.clone(),
        config: loop_cfg,
        labels,
        aggregate: aggregate(ok.iter().map(|r| &r.test_metrics)),
        failed_repeats: repeats.len() - ok.len(),
        repeats,
    })
}
