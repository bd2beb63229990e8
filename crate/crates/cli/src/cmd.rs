use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use anyhow::Context;
use irspec_agent::compare::compare as compare_runs;
use irspec_agent::extraction::{evaluate_extraction, extract_entities, load_cases, ExtractionError};
use irspec_agent::gateway::{Gateway, HttpBackend, LlmConfig};
use irspec_agent::mock::AlgorithmicBackend;
use irspec_agent::pipeline::{
    prepare_dataset, repeat_input, retrieve_plans, run_pipeline, PipelineError, RunConfig, RunOptions,
};
use irspec_agent::reasoning::RunReport;
use irspec_agent::session::{Session, SessionError};
use irspec_agent::synthetic::{cases_to_jsonl, demo_dataset, entity_cases, ENTITY_CASES_SEED, ENTITY_CASE_COUNT};
use irspec_core::baselines::BaselineSpec;
use irspec_core::features::extract_features;
use irspec_core::model::{load_dataset, save_json, DatasetFormat, Label, SpectralDataset};
use irspec_core::plan::MANUAL;
use irspec_core::preprocess::apply_chain;
use irspec_core::MethodPlan;
use irspec_kb::synthetic::{fixture_records, retrieval_benchmark, BENCHMARK_SEED};
use irspec_kb::{build_index, evaluate_retrieval, load_queries, load_records, query, save_queries, save_records};
use irspec_kb::{Engine, KbIndex};
use serde_json::{json, Value};

use crate::svg;

pub struct Global {
    pub json: bool,
    pub seed: Option<u64>,
}

/// What a command prints: `text` normally, `json` under `--json`.
pub struct Output {
    pub text: String,
    pub json: Value,
}

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub kind: &'static str,
    pub message: String,
}

impl CliError {
    fn config(message: impl Into<String>) -> Self {
        Self {
            code: 1,
            kind: "config",
            message: message.into(),
        }
    }

    fn pipeline(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            kind: "pipeline",
            message: message.into(),
        }
    }

    fn provider(message: impl Into<String>) -> Self {
        Self {
            code: 3,
            kind: "provider",
            message: message.into(),
        }
    }

    pub fn to_json(&self) -> String {
        json!({"error": {"kind": self.kind, "code": self.code, "message": self.message}}).to_string()
    }
}

impl From<PipelineError> for CliError {
    fn from(e: PipelineError) -> Self {
        let kind = match e.exit_code() {
            1 => "config",
            3 => "provider",
            _ => "pipeline",
        };
        Self {
            code: e.exit_code() as u8,
            kind,
            message: e.to_string(),
        }
    }
}

impl From<ExtractionError> for CliError {
    fn from(e: ExtractionError) -> Self {
        match e {
            ExtractionError::Llm(e) => Self::provider(format!("extraction: {e}")),
            ExtractionError::EmptyQuestion => Self::config("extraction: empty question"),
            e => Self::pipeline(format!("extraction: {e}")),
        }
    }
}

// Write failures on artifacts are pipeline errors.
impl From<anyhow::Error> for CliError {
    fn from(e: anyhow::Error) -> Self {
        Self::pipeline(format!("{e:#}"))
    }
}

type CmdResult = Result<Output, CliError>;

fn engine(name: &str) -> Result<Engine, CliError> {
    name.parse()
        .map_err(|e: irspec_kb::KbError| CliError::config(e.to_string()))
}

fn load_input_dataset(path: &Path) -> Result<SpectralDataset, CliError> {
    load_dataset(path, DatasetFormat::from_path(path)).map_err(|e| CliError::config(format!("{}: {e}", path.display())))
}

/// The offline backend, or the HTTP provider when its key is set.
fn gateway(llm: &mut LlmConfig, mock: bool) -> Result<Gateway, CliError> {
    if mock {
        return Ok(Gateway::new(AlgorithmicBackend::new()));
    }
    llm.apply_env();
    let key = llm.api_key().ok_or_else(|| {
        CliError::config(format!(
            "{} is not set; export it or pass --mock-backend",
            llm.api_key_env
        ))
    })?;
    let backend = HttpBackend::new(llm, key).map_err(|e| CliError::provider(format!("{e:?}")))?;
    Ok(Gateway::new(backend))
}

pub fn kb_build(_: &Global, records: &Path, engine_name: &str, output: &Path) -> CmdResult {
    let engine = engine(engine_name)?;
    let recs = load_records(records).map_err(|e| CliError::config(e.to_string()))?;
    let idx = build_index(&recs, engine).map_err(|e| CliError::config(e.to_string()))?;
    idx.save(output).map_err(|e| CliError::pipeline(e.to_string()))?;
    Ok(Output {
        text: format!("wrote {} ({} records, {engine})\n", output.display(), idx.len()),
        json: json!({"index": output, "records": idx.len(), "engine": engine}),
    })
}

pub fn kb_query(_: &Global, index: &Path, text: &str, top_k: usize, engine_name: &str) -> CmdResult {
    let idx = if index.extension().is_some_and(|e| e == "jsonl") {
        let recs = load_records(index).map_err(|e| CliError::config(e.to_string()))?;
        build_index(&recs, engine(engine_name)?).map_err(|e| CliError::config(e.to_string()))?
    } else {
        KbIndex::load(index).map_err(|e| CliError::config(e.to_string()))?
    };
    let result = query(&idx, text, top_k).map_err(|e| CliError::config(e.to_string()))?;
    let mut out = String::new();
    for h in &result.hits {
        writeln!(out, "{}", serde_json::to_string(h).expect("hit serialises")).unwrap();
    }
    if result.empty_query {
        log::warn!("no query term occurs in the index vocabulary");
    }
    Ok(Output {
        text: out,
        json: serde_json::to_value(&result).expect("result serialises"),
    })
}

pub fn kb_eval(g: &Global, files: Option<(&Path, &Path)>, top_k: usize) -> CmdResult {
    let (records, queries, source) = match files {
        Some((c, q)) => (
            load_records(c).map_err(|e| CliError::config(e.to_string()))?,
            load_queries(q).map_err(|e| CliError::config(e.to_string()))?,
            json!({"corpus": c, "queries": q}),
        ),
        None => {
            let seed = g.seed.unwrap_or(BENCHMARK_SEED);
            let (r, q) = retrieval_benchmark(seed);
            (r, q, json!({"synthetic_seed": seed}))
        }
    };
    let mut text = String::new();
    let mut precision = serde_json::Map::new();
    for e in Engine::ALL {
        let idx = build_index(&records, e).map_err(|e| CliError::config(e.to_string()))?;
        let p = evaluate_retrieval(&idx, &queries, top_k).map_err(|e| CliError::config(e.to_string()))?;
        writeln!(text, "{:<6} {:.4}", e.name(), p).unwrap();
        precision.insert(e.name().into(), json!(p));
    }
    Ok(Output {
        text,
        json: json!({"top_k": top_k, "documents": records.len(), "queries": queries.len(), "source": source, "precision": precision}),
    })
}

pub fn extract(_: &Global, question: &str, mock: bool) -> CmdResult {
    let mut llm = LlmConfig::default();
    let gw = gateway(&mut llm, mock)?;
    let e = extract_entities(&gw, &llm, question)?;
    Ok(Output {
        text: format!("research_object: {}\ntask: {}\n", e.research_object, e.task),
        json: serde_json::to_value(&e).expect("entities serialise"),
    })
}

pub fn extract_eval(_: &Global, cases: &Path, threshold: u32, mock: bool) -> CmdResult {
    let cases = load_cases(cases).map_err(|e| CliError::config(format!("{}: {e}", cases.display())))?;
    let mut llm = LlmConfig::default();
    let gw = gateway(&mut llm, mock)?;
    let ev = evaluate_extraction(&gw, &llm, &cases, threshold)?;
    Ok(Output {
        text: format!(
            "cases: {}\nresearch_object accuracy: {:.1}%\ntask accuracy: {:.1}%\n",
            ev.cases.len(),
            ev.object_accuracy,
            ev.task_accuracy
        ),
        json: serde_json::to_value(&ev).expect("evaluation serialises"),
    })
}

pub struct RunFlags {
    pub single_turn: bool,
    pub mock_backend: bool,
    pub repeats: Option<usize>,
    pub out: Option<PathBuf>,
}

pub fn run(g: &Global, config: &Path, flags: RunFlags) -> CmdResult {
    let mut cfg = RunConfig::load(config)?;
    if let Some(s) = g.seed {
        cfg.seed = s;
    }
    if let Some(o) = flags.out {
        cfg.output_dir = o;
    }
    if flags.repeats == Some(0) {
        return Err(CliError::config("--repeats must be at least 1"));
    }
    cfg.validate()?;
    let gw = gateway(&mut cfg.llm, flags.mock_backend)?;
    let outcome = run_pipeline(
        &cfg,
        RunOptions {
            single_turn: flags.single_turn,
            repeats: flags.repeats,
        },
        &gw,
    )?;
    let r = &outcome.report;
    let mut text = format!(
        "{} on {} ({}): {} repeats, {} failed\n",
        r.method,
        r.material,
        r.task,
        r.repeats.len(),
        r.failed_repeats
    );
    writeln!(text, "plan: {}", outcome.plan.summary()).unwrap();
    for row in &outcome.comparison.rows {
        writeln!(
            text,
            "  {:<20} {:<9} {:.4} ± {:.4}",
            row.method, row.metric, row.mean, row.std
        )
        .unwrap();
    }
    writeln!(text, "artifacts in {}", cfg.output_dir.display()).unwrap();
    Ok(Output {
        text,
        json: json!({
            "output_dir": cfg.output_dir,
            "files": outcome.files,
            "method": r.method,
            "aggregate": r.aggregate,
            "failed_repeats": r.failed_repeats,
            "comparison": outcome.comparison.rows,
            "network_calls": gw.network_attempts(),
        }),
    })
}

#[allow(clippy::too_many_arguments)]
pub fn session(
    g: &Global,
    dataset: &Path,
    question: &str,
    kb: &Path,
    engine_name: &str,
    answers: Option<&Path>,
    out_dir: &Path,
    mock: bool,
) -> CmdResult {
    let engine = engine(engine_name)?;
    let ds = load_input_dataset(dataset)?;
    if !kb.exists() {
        return Err(CliError::config(format!(
            "knowledge base {} does not exist",
            kb.display()
        )));
    }
    let input: Box<dyn BufRead> = match answers {
        Some(p) => Box::new(BufReader::new(
            std::fs::File::open(p).map_err(|e| CliError::config(format!("{}: {e}", p.display())))?,
        )),
        None => Box::new(std::io::stdin().lock()),
    };
    let mut llm = LlmConfig::default();
    let gw = gateway(&mut llm, mock)?;
    let entities = extract_entities(&gw, &llm, question)?;
    let retrieval = retrieve_plans(kb, engine, &entities.research_object)?;
    let citations: BTreeMap<String, String> = load_records(kb)
        .map_err(|e| CliError::config(e.to_string()))?
        .into_iter()
        .map(|r| (r.id, r.citation))
        .collect();
    // keep stdout clean for the JSON result
    let dialogue: Box<dyn Write> = if g.json {
        Box::new(std::io::stderr())
    } else {
        Box::new(std::io::stdout())
    };
    let plan = Session::new(input, dialogue, &retrieval.candidates, &citations, &ds)
        .run()
        .map_err(|e| match e {
            SessionError::AbortedByUser => CliError {
                code: 1,
                kind: "aborted",
                message: e.to_string(),
            },
            SessionError::Io(e) => CliError::pipeline(format!("session: {e}")),
        })?;
    std::fs::create_dir_all(out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
    let path = out_dir.join("plan.json");
    plan.save(&path).map_err(|e| CliError::pipeline(e.to_string()))?;
    Ok(Output {
        text: format!("wrote {}\n", path.display()),
        json: json!({"plan_file": path, "research_object": entities.research_object, "plan": plan}),
    })
}

fn class_key(l: &Label) -> String {
    match l {
        Label::Class(c) => c.clone(),
        Label::Flag(true) => "normal".into(),
        Label::Flag(false) => "anomaly".into(),
        Label::Value { .. } => "sample".into(),
    }
}

fn file_stem(id: &str) -> String {
    id.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '_' {
                c
            } else {
                '_'
            }
        })
        .collect()
}

pub fn plot(_: &Global, dataset: &Path, plan: Option<&Path>, out_dir: &Path) -> CmdResult {
    let ds = load_input_dataset(dataset)?;
    if ds.is_empty() {
        log::warn!("{} holds no spectra; nothing to plot", dataset.display());
        eprintln!("warning: {} holds no spectra; nothing to plot", dataset.display());
        return Ok(Output {
            text: String::new(),
            json: json!({"files": [], "warning": "empty dataset"}),
        });
    }
    let plan = match plan {
        Some(p) => MethodPlan::load(p).map_err(|e| CliError::config(e.to_string()))?,
        None => MethodPlan::from_names("SG+SNV", "PCA", vec![MANUAL.into()]).expect("default plan is valid"),
    };
    let (processed, _) = apply_chain(&ds, &plan.steps).map_err(|e| CliError::pipeline(format!("preprocess: {e}")))?;
    let all: Vec<usize> = (0..processed.len()).collect();
    let (fm, _) =
        extract_features(&plan.feature, &processed, &all).map_err(|e| CliError::pipeline(format!("features: {e}")))?;

    std::fs::create_dir_all(out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
    let mut files = Vec::new();
    let mut save = |name: String, body: String| -> Result<(), CliError> {
        let path = out_dir.join(name);
        std::fs::write(&path, body).with_context(|| format!("writing {}", path.display()))?;
        files.push(path);
        Ok(())
    };
    for (i, (raw, proc)) in ds.spectra().iter().zip(processed.spectra()).enumerate() {
        let body = svg::spectrum_pair(
            raw.id(),
            raw.wavelengths(),
            raw.intensities(),
            proc.intensities(),
            &plan.summary(),
        );
        save(format!("spectrum_{i:03}_{}.svg", file_stem(raw.id())), body)?;
    }
    let names = fm.feature_names();
    let x_name = names.first().cloned().unwrap_or_default();
    let y_name = names.get(1).cloned().unwrap_or_else(|| "0".into());
    let points: Vec<svg::Point> = fm
        .rows()
        .iter()
        .zip(processed.labels())
        .map(|(row, l)| svg::Point {
            x: row.first().copied().unwrap_or(0.0),
            y: row.get(1).copied().unwrap_or(0.0),
            group: class_key(l),
        })
        .collect();
    save(
        "features.svg".into(),
        svg::scatter(&points, &x_name, &y_name, &plan.summary()),
    )?;
    let text = files.iter().map(|f| format!("{}\n", f.display())).collect();
    Ok(Output {
        text,
        json: json!({ "files": files }),
    })
}

pub fn compare(g: &Global, config: &Path, reports: &[PathBuf], plan: Option<&Path>, out: Option<&Path>) -> CmdResult {
    let mut cfg = RunConfig::load(config)?;
    if let Some(s) = g.seed {
        cfg.seed = s;
    }
    let runs: Vec<RunReport> = reports
        .iter()
        .map(|p| {
            let text = std::fs::read_to_string(p).map_err(|e| CliError::config(format!("{}: {e}", p.display())))?;
            RunReport::from_json(&text).map_err(|e| CliError::config(format!("{}: {e}", p.display())))
        })
        .collect::<Result<_, _>>()?;
    let plan_path = match plan {
        Some(p) => p.to_path_buf(),
        None => reports[0].parent().unwrap_or(Path::new("")).join("plan.json"),
    };
    let plan = MethodPlan::load(&plan_path).map_err(|e| CliError::config(e.to_string()))?;
    let (ds, task) = prepare_dataset(&cfg)?;
    let (processed, _) = apply_chain(&ds, &plan.steps).map_err(|e| CliError::pipeline(format!("preprocess: {e}")))?;
    let budget = cfg.llm.token_budget();
    let mut prepare = |_: usize, seed: u64| repeat_input(&processed, &plan, budget, seed);
    let specs = cfg
        .baselines
        .clone()
        .unwrap_or_else(|| BaselineSpec::defaults_for(task));
    let refs: Vec<&RunReport> = runs.iter().collect();
    let table = compare_runs(&refs, &specs, &mut prepare).map_err(|e| CliError::pipeline(format!("compare: {e}")))?;
    let mut files = Vec::new();
    if let Some(dir) = out {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        for (name, body) in [("comparison.csv", table.to_csv()), ("comparison.json", table.to_json())] {
            let path = dir.join(name);
            std::fs::write(&path, body).with_context(|| format!("writing {}", path.display()))?;
            files.push(path);
        }
    }
    Ok(Output {
        text: table.to_csv(),
        json: json!({"rows": table.rows, "files": files}),
    })
}

/// Regenerates the bundled fixtures under `out`.
pub fn synth(g: &Global, out: &Path) -> CmdResult {
    let wrap = |e: &dyn std::fmt::Display| CliError::pipeline(e.to_string());
    std::fs::create_dir_all(out.join("retrieval")).with_context(|| format!("creating {}", out.display()))?;
    std::fs::create_dir_all(out.join("datasets")).with_context(|| format!("creating {}", out.display()))?;
    let mut files = Vec::new();
    let kb = out.join("kb.jsonl");
    save_records(&fixture_records(), &kb).map_err(|e| wrap(&e))?;
    files.push(kb);
    let (docs, queries) = retrieval_benchmark(g.seed.unwrap_or(BENCHMARK_SEED));
    let corpus = out.join("retrieval/corpus.jsonl");
    save_records(&docs, &corpus).map_err(|e| wrap(&e))?;
    files.push(corpus);
    let qpath = out.join("retrieval/queries.jsonl");
    save_queries(&queries, &qpath).map_err(|e| wrap(&e))?;
    files.push(qpath);
    let cases = out.join("entity_cases.jsonl");
    let text = cases_to_jsonl(&entity_cases(g.seed.unwrap_or(ENTITY_CASES_SEED), ENTITY_CASE_COUNT));
    std::fs::write(&cases, text).with_context(|| format!("writing {}", cases.display()))?;
    files.push(cases);
    let ink = out.join("datasets/ink.json");
    save_json(&demo_dataset(), &ink).map_err(|e| wrap(&e))?;
    files.push(ink);
    Ok(Output {
        text: files.iter().map(|f| format!("{}\n", f.display())).collect(),
        json: json!({ "files": files }),
    })
}
