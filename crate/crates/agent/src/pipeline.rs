//! End-to-end run: dataset → method plan → preprocessing → features →
//! reasoning → comparison, with every intermediate written to one output
//! directory.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use irspec_core::baselines::BaselineSpec;
use irspec_core::features::extract_features;
use irspec_core::model::{
    build_anomaly_dataset, load_dataset, split_dataset, DatasetFormat, Label, SpectralDataset, SplitRatio, TaskType,
    DEFAULT_NOISE_SCALE,
};
use irspec_core::preprocess::{apply_chain, chain_abbrev, QualityReport};
use irspec_core::MethodPlan;
use irspec_kb::{build_index, load_records, plan_from_records, query, Engine, QueryResult, DEFAULT_TOP_K};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::compare::{compare, ComparisonTable};
use crate::extraction::{extract_entities, ExtractedEntities, ExtractionError};
use crate::gateway::{Gateway, LlmConfig, LlmError};
use crate::reasoning::{
    run_repeats, FailureKind, PromptContext, ReasoningConfig, RepeatInput, RunReport, MULTI_METHOD, SINGLE_METHOD,
};

pub const RUN_CONFIG_SCHEMA: &str = "irspec-run/1";
pub const DEFAULT_MAX_SAMPLES: usize = 80;

fn d_schema() -> String {
    RUN_CONFIG_SCHEMA.into()
}
fn d_max_samples() -> usize {
    DEFAULT_MAX_SAMPLES
}
fn d_engine() -> Engine {
    Engine::BM25
}
fn d_noise() -> f64 {
    DEFAULT_NOISE_SCALE
}

/// Where the method plan comes from. Exactly one source per run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum PlanSource {
    /// Query the knowledge base with this research object.
    KbQuery(String),
    /// Extract the research object from a question, then query.
    Question(String),
    /// A plan file, e.g. written by a session.
    File(PathBuf),
    /// Only meaningful for the interactive session command.
    Interactive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnomalyOptions {
    pub reference_class: String,
    #[serde(default = "d_noise")]
    pub noise_scale: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(rename = "$schema", default = "d_schema")]
    pub schema: String,
    pub dataset: PathBuf,
    /// Defaults to the dataset's own task.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub task: Option<TaskType>,
    pub plan: PlanSource,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub knowledge_base: Option<PathBuf>,
    #[serde(default = "d_engine")]
    pub engine: Engine,
    #[serde(default)]
    pub llm: LlmConfig,
    #[serde(default)]
    pub reasoning: ReasoningConfig,
    /// `None` runs the defaults for the task; an empty list runs none.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub baselines: Option<Vec<BaselineSpec>>,
    pub output_dir: PathBuf,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "d_max_samples")]
    pub max_samples: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub anomaly: Option<AnomalyOptions>,
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("config: {0}")]
    Config(String),
    #[error("{stage}: {message}")]
    Stage { stage: &'static str, message: String },
    #[error("{stage}: {source}")]
    Provider {
        stage: &'static str,
        #[source]
        source: LlmError,
    },
    #[error("{stage}: {message}")]
    ProviderRun { stage: &'static str, message: String },
    #[error("writing {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl PipelineError {
    /// Exit status: 1 user/config, 2 pipeline, 3 provider.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Config(_) => 1,
            PipelineError::Stage { .. } | PipelineError::Io { .. } => 2,
            PipelineError::Provider { .. } | PipelineError::ProviderRun { .. } => 3,
        }
    }
}

fn stage(stage: &'static str) -> impl Fn(String) -> PipelineError {
    move |message| PipelineError::Stage { stage, message }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, PipelineError> {
        let c: Self = serde_json::from_str(text).map_err(|e| PipelineError::Config(e.to_string()))?;
        if c.schema != RUN_CONFIG_SCHEMA {
            return Err(PipelineError::Config(format!(
                "unsupported config schema `{}`, expected `{RUN_CONFIG_SCHEMA}`",
                c.schema
            )));
        }
        Ok(c)
    }

    /// Reads a config; relative paths inside it are taken relative to the
    /// config file.
    pub fn load(path: &Path) -> Result<Self, PipelineError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| PipelineError::Config(format!("reading {}: {e}", path.display())))?;
        let mut c = Self::from_json(&text)?;
        let base = path.parent().unwrap_or(Path::new(""));
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut c.dataset);
        fix(&mut c.output_dir);
        if let Some(kb) = c.knowledge_base.as_mut() {
            fix(kb);
        }
        if let PlanSource::File(p) = &mut c.plan {
            fix(p);
        }
        Ok(c)
    }

    /// Checks that can fail before any computation.
    pub fn validate(&self) -> Result<(), PipelineError> {
        let cfg = |m: String| PipelineError::Config(m);
        self.reasoning.validate().map_err(cfg)?;
        self.llm.validate().map_err(cfg)?;
        if self.max_samples < irspec_core::model::MIN_SPLIT_SAMPLES {
            return Err(cfg(format!(
                "max_samples {} is below the splitter minimum",
                self.max_samples
            )));
        }
        if !self.dataset.exists() {
            return Err(cfg(format!("dataset {} does not exist", self.dataset.display())));
        }
        match &self.plan {
            PlanSource::Interactive => return Err(cfg(
                "plan source `interactive` needs the session command; run it and point `plan` at the written plan file"
                    .into(),
            )),
            PlanSource::File(p) if !p.exists() => return Err(cfg(format!("plan file {} does not exist", p.display()))),
            PlanSource::KbQuery(_) | PlanSource::Question(_) => match &self.knowledge_base {
                None => return Err(cfg("a knowledge-base query needs `knowledge_base`".into())),
                Some(kb) if !kb.exists() => return Err(cfg(format!("knowledge base {} does not exist", kb.display()))),
                _ => {}
            },
            _ => {}
        }
        if self.task == Some(TaskType::AnomalyDetection) && self.anomaly.is_none() {
            return Err(cfg("anomaly detection needs `anomaly.reference_class`".into()));
        }
        for b in self.baselines.iter().flatten() {
            b.validate().map_err(|e| cfg(e.to_string()))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RunOptions {
    pub single_turn: bool,
    pub repeats: Option<usize>,
}

/// Retrieval step as written to `retrieval.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RetrievalRecord {
    pub query: String,
    pub engine: Engine,
    pub result: QueryResult,
    pub candidates: Vec<MethodPlan>,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub entities: Option<ExtractedEntities>,
    pub retrieval: Option<RetrievalRecord>,
    pub plan: MethodPlan,
    pub quality: QualityReport,
    pub report: RunReport,
    pub comparison: ComparisonTable,
    pub files: Vec<PathBuf>,
}

/// Deterministic subsample of at most `max` samples, kept in original order.
pub fn cap_samples(ds: &SpectralDataset, max: usize, seed: u64) -> Result<SpectralDataset, String> {
    if ds.len() <= max {
        return Ok(ds.clone());
    }
    let mut idx: Vec<usize> = (0..ds.len()).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    idx.truncate(max);
    idx.sort_unstable();
    ds.subset(&idx).map_err(|e| e.to_string())
}

/// Loads the dataset and shapes it for `task`: anomaly runs build the
/// one-class set around the reference class; everything is capped at
/// `max_samples`.
pub fn prepare_dataset(cfg: &RunConfig) -> Result<(SpectralDataset, TaskType), PipelineError> {
    let ds: SpectralDataset =
        load_dataset(&cfg.dataset, DatasetFormat::from_path(&cfg.dataset)).map_err(|e| stage("load")(e.to_string()))?;
    let task = cfg.task.unwrap_or(ds.task());
    let ds = match (task, ds.task()) {
        (TaskType::AnomalyDetection, TaskType::Classification) => {
            let a = cfg
                .anomaly
                .as_ref()
                .ok_or_else(|| PipelineError::Config("anomaly detection needs `anomaly.reference_class`".into()))?;
            let built = build_anomaly_dataset(&ds, &a.reference_class, cfg.seed, a.noise_scale)
                .map_err(|e| stage("anomaly")(e.to_string()))?;
            built.dataset
        }
        (t, d) if t == d => ds,
        (t, d) => return Err(PipelineError::Config(format!("cannot run {t} on a {d} dataset"))),
    };
    let ds = cap_samples(&ds, cfg.max_samples, cfg.seed).map_err(stage("load"))?;
    Ok((ds, task))
}

fn retrieve(cfg: &RunConfig, text: &str) -> Result<RetrievalRecord, PipelineError> {
    let kb = cfg
        .knowledge_base
        .as_ref()
        .ok_or_else(|| PipelineError::Config("no knowledge base".into()))?;
    retrieve_plans(kb, cfg.engine, text)
}

/// Top-3 retrieval over the records in `kb` and the distinct plans they
/// recommend.
pub fn retrieve_plans(kb: &Path, engine: Engine, text: &str) -> Result<RetrievalRecord, PipelineError> {
    let records = load_records(kb).map_err(|e| stage("retrieval")(e.to_string()))?;
    let idx = build_index(&records, engine).map_err(|e| stage("retrieval")(e.to_string()))?;
    let result = query(&idx, text, DEFAULT_TOP_K).map_err(|e| stage("retrieval")(e.to_string()))?;
    let candidates = plan_from_records(&result.hits, &records).map_err(|e| stage("retrieval")(e.to_string()))?;
    Ok(RetrievalRecord {
        query: text.to_string(),
        engine,
        result,
        candidates,
    })
}

/// Extraction (if asked) and retrieval, or the plan file.
pub fn resolve_plan(
    cfg: &RunConfig,
    gw: &Gateway,
) -> Result<(Option<ExtractedEntities>, Option<RetrievalRecord>, MethodPlan), PipelineError> {
    match &cfg.plan {
        PlanSource::File(p) => {
            let plan = MethodPlan::load(p).map_err(|e| stage("plan")(e.to_string()))?;
            Ok((None, None, plan))
        }
        PlanSource::KbQuery(q) => {
            let r = retrieve(cfg, q)?;
            let plan = r.candidates[0].clone();
            Ok((None, Some(r), plan))
        }
        PlanSource::Question(q) => {
            let e = extract_entities(gw, &cfg.llm, q).map_err(|e| match e {
                ExtractionError::Llm(source) => PipelineError::Provider {
                    stage: "extraction",
                    source,
                },
                e => stage("extraction")(e.to_string()),
            })?;
            let r = retrieve(cfg, &e.research_object)?;
            let plan = r.candidates[0].clone();
            Ok((Some(e), Some(r), plan))
        }
        PlanSource::Interactive => Err(PipelineError::Config(
            "interactive plans come from the session command".into(),
        )),
    }
}

fn describe(plan: &MethodPlan) -> String {
    let chain = if plan.steps.is_empty() {
        "raw".to_string()
    } else {
        format!("{} preprocessed", chain_abbrev(&plan.steps))
    };
    format!("{} features of {chain} spectra", plan.feature.kind_name())
}

fn unit_of(labels: &[Label]) -> String {
    labels
        .iter()
        .find_map(|l| match l {
            Label::Value { unit, .. } => Some(unit.clone()),
            _ => None,
        })
        .unwrap_or_default()
}

/// Builds the reasoning input of one repeat: split by `seed`, then features
/// fitted per the extractor's policy on that split's training part.
pub fn repeat_input(
    processed: &SpectralDataset,
    plan: &MethodPlan,
    token_budget: usize,
    seed: u64,
) -> Result<RepeatInput, String> {
    let split = split_dataset(processed, SplitRatio::default(), seed).map_err(|e| e.to_string())?;
    let (features, _) = extract_features(&plan.feature, processed, &split.train).map_err(|e| e.to_string())?;
    Ok(RepeatInput {
        features,
        truth: processed.labels().to_vec(),
        split,
        context: PromptContext {
            material: processed.material().to_string(),
            feature_description: describe(plan),
            unit: unit_of(processed.labels()),
            token_budget,
        },
    })
}

fn write(dir: &Path, name: &str, text: &str, files: &mut Vec<PathBuf>) -> Result<(), PipelineError> {
    let path = dir.join(name);
    std::fs::write(&path, text).map_err(|source| PipelineError::Io {
        path: path.display().to_string(),
        source,
    })?;
    files.push(path);
    Ok(())
}

fn json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("artifact serialises");
    s.push('\n');
    s
}

/// Runs every stage and writes the artifacts. The config must already be
/// validated.
pub fn run_pipeline(cfg: &RunConfig, opts: RunOptions, gw: &Gateway) -> Result<RunOutcome, PipelineError> {
    let (ds, task) = prepare_dataset(cfg)?;
    let (entities, retrieval, plan) = resolve_plan(cfg, gw)?;
    plan.validate().map_err(|e| stage("plan")(e.to_string()))?;
    let (processed, quality) = apply_chain(&ds, &plan.steps).map_err(|e| stage("preprocess")(e.to_string()))?;

    let mut rcfg = ReasoningConfig {
        seed: cfg.seed,
        ..cfg.reasoning.clone()
    };
    if let Some(n) = opts.repeats {
        rcfg.repeats = n;
    }
    let method = if opts.single_turn { SINGLE_METHOD } else { MULTI_METHOD };
    let budget = cfg.llm.token_budget();
    let mut prepare = |_: usize, seed: u64| repeat_input(&processed, &plan, budget, seed);
    let report = run_repeats(task, &rcfg, gw, &cfg.llm, method, &mut prepare).map_err(|f| match f.kind {
        FailureKind::Provider => PipelineError::ProviderRun {
            stage: "reasoning",
            message: f.message,
        },
        _ => stage("reasoning")(f.message),
    })?;
    let specs = cfg
        .baselines
        .clone()
        .unwrap_or_else(|| BaselineSpec::defaults_for(task));
    let comparison = compare(&[&report], &specs, &mut prepare).map_err(|e| stage("compare")(e.to_string()))?;

    let dir = &cfg.output_dir;
    std::fs::create_dir_all(dir).map_err(|source| PipelineError::Io {
        path: dir.display().to_string(),
        source,
    })?;
    let mut files = Vec::new();
    if let Some(e) = &entities {
        write(dir, "entities.json", &json(e), &mut files)?;
    }
    if let Some(r) = &retrieval {
        write(dir, "retrieval.json", &json(r), &mut files)?;
    }
    write(dir, "plan.json", &json(&plan), &mut files)?;
    let mut q = BTreeMap::new();
    q.insert("samples", serde_json::to_value(processed.len()).unwrap());
    q.insert("quality", serde_json::to_value(&quality).unwrap());
    write(dir, "quality.json", &json(&q), &mut files)?;
    write(dir, "run_report.json", &report.to_json(), &mut files)?;
    write(dir, "run_report.csv", &report.to_csv(), &mut files)?;
    write(dir, "comparison.csv", &comparison.to_csv(), &mut files)?;
    write(dir, "comparison.json", &comparison.to_json(), &mut files)?;
    write(dir, "transcript.jsonl", &gw.transcript().to_jsonl(), &mut files)?;
    Ok(RunOutcome {
        entities,
        retrieval,
        plan,
        quality,
        report,
        comparison,
        files,
    })
}
