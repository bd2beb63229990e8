//! `irspec`: knowledge-base management, entity extraction, experiment runs,
//! the method-selection session, plots and method comparison.

mod cmd;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "irspec",
    version,
    about = "Spectral analysis with literature retrieval and multi-turn LLM reasoning"
)]
struct Cli {
    /// Print machine-readable JSON (errors go to stderr as JSON too).
    #[arg(long, global = true)]
    json: bool,
    /// Seed override for every random choice the command makes.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Knowledge-base index management and retrieval evaluation.
    #[command(subcommand)]
    Kb(KbCommand),
    /// Extract the research object and task type from a question.
    Extract(ExtractArgs),
    /// Run the full pipeline described by a config file.
    Run(RunArgs),
    /// Choose, refine and accept a method plan in a terminal dialogue.
    Session(SessionArgs),
    /// Raw-vs-processed spectra and a feature scatter as SVG.
    Plot(PlotArgs),
    /// Compare run reports with each other and with classical baselines.
    Compare(CompareArgs),
    /// Write the bundled fixtures.
    #[command(hide = true)]
    Synth(SynthArgs),
}

#[derive(Subcommand)]
enum KbCommand {
    /// Build an index cache from a JSON-lines record file.
    Build {
        records: PathBuf,
        #[arg(long, default_value = "bm25")]
        engine: String,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Query an index cache (or a record file, indexed on the fly).
    Query {
        index: PathBuf,
        text: String,
        #[arg(long, default_value_t = irspec_kb::DEFAULT_TOP_K)]
        top_k: usize,
        /// Engine used when INDEX is a record file.
        #[arg(long, default_value = "bm25")]
        engine: String,
    },
    /// Mean top-k precision of every engine on a labelled query set.
    Eval {
        /// Defaults to the synthetic benchmark generated from `--seed`.
        #[arg(long, requires = "queries")]
        corpus: Option<PathBuf>,
        #[arg(long, requires = "corpus")]
        queries: Option<PathBuf>,
        #[arg(long, default_value_t = irspec_kb::DEFAULT_TOP_K)]
        top_k: usize,
    },
}

#[derive(Args)]
struct BackendArgs {
    /// Use the offline algorithmic backend instead of the HTTP provider.
    #[arg(long)]
    mock_backend: bool,
}

#[derive(Args)]
struct ExtractArgs {
    #[arg(required_unless_present = "eval")]
    question: Option<String>,
    /// Score extraction on a JSON-lines file of labelled questions.
    #[arg(long, conflicts_with = "question")]
    eval: Option<PathBuf>,
    /// Fuzzy similarity (0-100) at which an object counts as correct.
    #[arg(long, default_value_t = irspec_agent::extraction::DEFAULT_FUZZY_THRESHOLD)]
    threshold: u32,
    #[command(flatten)]
    backend: BackendArgs,
}

#[derive(Args)]
struct RunArgs {
    config: PathBuf,
    /// One reasoning round per repeat.
    #[arg(long)]
    single_turn: bool,
    #[arg(long)]
    repeats: Option<usize>,
    /// Output directory (overrides the config).
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    backend: BackendArgs,
}

#[derive(Args)]
struct SessionArgs {
    dataset: PathBuf,
    question: String,
    #[arg(long)]
    kb: PathBuf,
    #[arg(long, default_value = "bm25")]
    engine: String,
    /// Read answers from this file instead of the terminal.
    #[arg(long)]
    answers: Option<PathBuf>,
    #[arg(long, default_value = ".")]
    out: PathBuf,
    #[command(flatten)]
    backend: BackendArgs,
}

#[derive(Args)]
struct PlotArgs {
    dataset: PathBuf,
    /// Plan to apply; defaults to SG+SNV then PCA.
    #[arg(long)]
    plan: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct CompareArgs {
    /// The run config the reports were produced with.
    config: PathBuf,
    #[arg(required = true)]
    reports: Vec<PathBuf>,
    /// Defaults to plan.json next to the first report.
    #[arg(long)]
    plan: Option<PathBuf>,
    /// Write comparison.csv and comparison.json here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, default_value = "fixtures")]
    out: PathBuf,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let g = cmd::Global {
        json: cli.json,
        seed: cli.seed,
    };
    let result = match cli.command {
        Command::Kb(KbCommand::Build {
            records,
            engine,
            output,
        }) => cmd::kb_build(&g, &records, &engine, &output),
        Command::Kb(KbCommand::Query {
            index,
            text,
            top_k,
            engine,
        }) => cmd::kb_query(&g, &index, &text, top_k, &engine),
        Command::Kb(KbCommand::Eval { corpus, queries, top_k }) => {
            cmd::kb_eval(&g, corpus.as_deref().zip(queries.as_deref()), top_k)
        }
        Command::Extract(a) => match a.eval {
            Some(path) => cmd::extract_eval(&g, &path, a.threshold, a.backend.mock_backend),
            None => cmd::extract(&g, a.question.as_deref().unwrap_or_default(), a.backend.mock_backend),
        },
        Command::Run(a) => cmd::run(
            &g,
            &a.config,
            cmd::RunFlags {
                single_turn: a.single_turn,
                mock_backend: a.backend.mock_backend,
                repeats: a.repeats,
                out: a.out,
            },
        ),
        Command::Session(a) => cmd::session(
            &g,
            &a.dataset,
            &a.question,
            &a.kb,
            &a.engine,
            a.answers.as_deref(),
            &a.out,
            a.backend.mock_backend,
        ),
        Command::Plot(a) => cmd::plot(&g, &a.dataset, a.plan.as_deref(), &a.out),
        Command::Compare(a) => cmd::compare(&g, &a.config, &a.reports, a.plan.as_deref(), a.out.as_deref()),
        Command::Synth(a) => cmd::synth(&g, &a.out),
    };
    match result {
        Ok(out) => {
            if g.json {
                println!(
                    "{}",
                    serde_json::to_string_pretty(&out.json).expect("output serialises")
                );
            } else if !out.text.is_empty() {
                print!("{}", out.text);
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            if g.json {
                eprintln!("{}", e.to_json());
            } else {
                eprintln!("error: {}", e.message);
            }
            ExitCode::from(e.code)
        }
    }
}
