mod config;

use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context as _;
use clap::builder::NonEmptyStringValueParser;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use personarag::concept_extract::{build_cooccurrence_edges, graph_communities, Lexicon, DEFAULT_MIN_COUNT};
use personarag::context_engine::{ContextEngine, Query, RetrievalConfig, SemanticContext, TaskKind};
use personarag::eval_harness::{
    build_history_graph, load_dataset, run_task, ContextMode, EvalTask, RunOptions, TaskSpec, DEFAULT_EVAL_USERS,
};
use personarag::graph_store::{EdgeKind, KnowledgeGraph};
use personarag::llm_gateway::{BackendKind, Gateway, RemoteConfig, DEFAULT_MAX_IN_FLIGHT};
use personarag::prompt_builder::build_prompt;

use config::FileConfig;

const PRECEDENCE: &str = "Settings resolve as: command-line flag, then environment variable, \
then the --config file, then the built-in default.";

#[derive(Debug, Parser)]
#[command(name = "personarag", version, about = "Persona-aware retrieval and prompting over an interaction graph")]
#[command(after_help = PRECEDENCE)]
struct Cli {
    /// TOML configuration file.
    #[arg(long, global = true, env = "PERSONARAG_CONFIG", value_name = "FILE")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build a graph from the history records of a dataset and save it.
    Ingest {
        #[command(flatten)]
        source: SourceArgs,
        /// Snapshot file to write.
        #[arg(long, value_name = "FILE")]
        out: PathBuf,
    },
    /// Print the retrieved context for a user and query as JSON.
    Context {
        #[command(flatten)]
        query: QueryArgs,
        #[command(flatten)]
        source: SourceArgs,
        #[command(flatten)]
        retrieval: RetrievalArgs,
    },
    /// Print the rendered prompt for a user and query.
    Prompt {
        #[command(flatten)]
        query: QueryArgs,
        #[arg(long, value_enum)]
        task: TaskArg,
        /// Render only the base section and empty markers.
        #[arg(long)]
        no_context: bool,
        #[command(flatten)]
        source: SourceArgs,
        #[command(flatten)]
        retrieval: RetrievalArgs,
    },
    /// Print concept communities as JSON.
    Communities {
        #[command(flatten)]
        source: SourceArgs,
    },
    /// Run a task end to end and print the metrics report as JSON.
    Eval {
        #[arg(long, value_enum)]
        task: TaskArg,
        /// Number of most active users to evaluate.
        #[arg(long, value_name = "N", value_parser = clap::value_parser!(u64).range(1..))]
        users: Option<u64>,
        /// Evaluate with the base prompt only.
        #[arg(long)]
        no_context: bool,
        #[command(flatten)]
        source: SourceArgs,
        #[command(flatten)]
        retrieval: RetrievalArgs,
        #[command(flatten)]
        backend: BackendArgs,
    },
}

#[derive(Debug, Args)]
struct QueryArgs {
    #[arg(long, value_parser = NonEmptyStringValueParser::new())]
    user: String,
    #[arg(long, value_parser = NonEmptyStringValueParser::new())]
    query: String,
}

#[derive(Debug, Args)]
struct SourceArgs {
    /// JSONL dataset; its history records form the graph.
    #[arg(long, env = "PERSONARAG_DATA", value_name = "FILE")]
    data: Option<PathBuf>,
    /// Saved graph snapshot; takes priority over --data where both apply.
    #[arg(long, env = "PERSONARAG_SNAPSHOT", value_name = "FILE")]
    snapshot: Option<PathBuf>,
    /// Keyword list, one entry per line.
    #[arg(long, env = "PERSONARAG_LEXICON", value_name = "FILE")]
    lexicon: Option<PathBuf>,
    /// Minimum co-occurrence count for concept edges.
    #[arg(long, value_name = "N")]
    min_count: Option<u64>,
}

#[derive(Debug, Args)]
struct RetrievalArgs {
    #[arg(long, env = "PERSONARAG_K_USER", value_name = "K")]
    k_user: Option<usize>,
    #[arg(long, env = "PERSONARAG_K_GLOBAL", value_name = "K")]
    k_global: Option<usize>,
    #[arg(long, env = "PERSONARAG_M_CONCEPTS", value_name = "M")]
    m_concepts: Option<usize>,
}

#[derive(Debug, Args)]
struct BackendArgs {
    #[arg(long, value_enum, env = "PERSONARAG_LLM")]
    llm: Option<LlmArg>,
    /// Chat-completions URL for the remote backend.
    #[arg(long, env = "PERSONARAG_ENDPOINT", value_name = "URL")]
    endpoint: Option<String>,
    #[arg(long, env = "PERSONARAG_MODEL")]
    model: Option<String>,
    /// Name of the environment variable holding the API key.
    #[arg(long, env = "PERSONARAG_API_KEY_ENV", value_name = "VAR")]
    api_key_env: Option<String>,
    /// Upper bound on concurrent remote requests.
    #[arg(long, value_name = "N", value_parser = clap::value_parser!(u64).range(1..))]
    max_in_flight: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum TaskArg {
    Lamp2n,
    Lamp2m,
    Lamp3,
}

impl From<TaskArg> for EvalTask {
    fn from(t: TaskArg) -> Self {
        match t {
            TaskArg::Lamp2n => EvalTask::News,
            TaskArg::Lamp2m => EvalTask::MovieTag,
            TaskArg::Lamp3 => EvalTask::Rating,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum LlmArg {
    Mock,
    Remote,
}

enum Failure {
    Usage(String),
    Runtime(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Runtime(e)
    }
}

type Outcome<T> = Result<T, Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "warn".into()),
        )
        .with_writer(std::io::stderr)
        .init();

    match run(cli) {
        Ok(out) => {
            let mut stdout = std::io::stdout().lock();
            if stdout.write_all(out.as_bytes()).and_then(|_| stdout.flush()).is_err() {
                return ExitCode::from(1);
            }
            ExitCode::SUCCESS
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}\n\nFor more information, try '--help'.");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Outcome<String> {
    let file = match &cli.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    match cli.command {
        Command::Ingest { source, out } => {
            let data = source.data.clone().or(file.data.clone()).ok_or_else(|| usage("ingest needs --data"))?;
            let lexicon = load_lexicon(&source, &file)?;
            let graph = graph_from_dataset(&data, lexicon.as_ref(), min_count(&source, &file))?;
            graph
                .save_snapshot(&out)
                .with_context(|| format!("cannot write snapshot {}", out.display()))?;
            Ok(json_line(&json!({
                "categories": graph.categories().count(),
                "concept_edges": graph.edges_of_kind(EdgeKind::ConceptConcept).len(),
                "concepts": graph.concepts().count(),
                "interactions": graph.interaction_count(),
                "snapshot": out.display().to_string(),
                "users": graph.user_ids().count(),
            })))
        }
        Command::Context { query, source, retrieval } => {
            let graph = load_graph(&source, &file)?;
            let cfg = retrieval_config(&retrieval, &file);
            let engine = ContextEngine::new(&graph);
            let q = Query::new(query.user.clone(), query.query, TaskKind::Classification)
                .map_err(|e| usage(&e.to_string()))?;
            Ok(json_line(&engine.get_semantic_context(&query.user, &q, &cfg).to_json()))
        }
        Command::Prompt { query, task, no_context, source, retrieval } => {
            let graph = load_graph(&source, &file)?;
            let cfg = retrieval_config(&retrieval, &file);
            let spec = TaskSpec::new(task.into());
            let q = Query::new(query.user.clone(), query.query, spec.kind.task_kind())
                .map_err(|e| usage(&e.to_string()))?
                .with_labels(spec.labels.clone());
            let ctx = if no_context {
                SemanticContext::empty()
            } else {
                ContextEngine::new(&graph).get_semantic_context(&query.user, &q, &cfg)
            };
            let prompt = build_prompt(&q, &ctx, &spec.labels).context("cannot render prompt")?;
            Ok(prompt.text)
        }
        Command::Communities { source } => {
            let graph = load_graph(&source, &file)?;
            let partition = graph_communities(&graph).context("cannot detect communities")?;
            Ok(json_line(&partition.to_json()))
        }
        Command::Eval { task, users, no_context, source, retrieval, backend } => {
            let data = source.data.clone().or(file.data.clone()).ok_or_else(|| usage("eval needs --data"))?;
            let gateway = build_gateway(&backend, &file)?;
            let lexicon = load_lexicon(&source, &file)?;
            let cfg = retrieval_config(&retrieval, &file);
            let records = load_dataset(&data).context("cannot load dataset")?;
            let opts = RunOptions {
                n_users: users.map_or(DEFAULT_EVAL_USERS, |n| n as usize),
                context: if no_context { ContextMode::Empty } else { ContextMode::Full },
                lexicon,
                model: model_name(&backend, &file),
                ..RunOptions::default()
            };
            let report = run_task(&TaskSpec::new(task.into()), &records, &cfg, &gateway, &opts)
                .context("evaluation failed")?;
            Ok(report.to_json_string())
        }
    }
}

fn usage(msg: &str) -> Failure {
    Failure::Usage(msg.to_string())
}

fn json_line(value: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("JSON values always serialize");
    s.push('\n');
    s
}

fn min_count(source: &SourceArgs, file: &FileConfig) -> u64 {
    source.min_count.or(file.min_count).unwrap_or(DEFAULT_MIN_COUNT)
}

fn load_lexicon(source: &SourceArgs, file: &FileConfig) -> Outcome<Option<Lexicon>> {
    match source.lexicon.as_ref().or(file.lexicon.as_ref()) {
        Some(path) => Ok(Some(Lexicon::load(path).context("cannot load lexicon")?)),
        None => Ok(None),
    }
}

fn graph_from_dataset(path: &Path, lexicon: Option<&Lexicon>, min_count: u64) -> Outcome<KnowledgeGraph> {
    let records = load_dataset(path).context("cannot load dataset")?;
    let mut graph = build_history_graph(&records, lexicon).context("cannot build graph")?;
    let edges = build_cooccurrence_edges(&graph, min_count);
    graph.set_concept_edges(&edges).context("cannot install concept edges")?;
    Ok(graph)
}

fn load_graph(source: &SourceArgs, file: &FileConfig) -> Outcome<KnowledgeGraph> {
    if let Some(path) = source.snapshot.as_ref().or(file.snapshot.as_ref()) {
        return Ok(KnowledgeGraph::load_snapshot(path).context("cannot load snapshot")?);
    }
    let data = source
        .data
        .as_ref()
        .or(file.data.as_ref())
        .ok_or_else(|| usage("one of --snapshot or --data is required"))?;
    let lexicon = load_lexicon(source, file)?;
    graph_from_dataset(data, lexicon.as_ref(), min_count(source, file))
}

fn retrieval_config(args: &RetrievalArgs, file: &FileConfig) -> RetrievalConfig {
    let d = RetrievalConfig::default();
    RetrievalConfig {
        k_user: args.k_user.or(file.retrieval.k_user).unwrap_or(d.k_user),
        k_global: args.k_global.or(file.retrieval.k_global).unwrap_or(d.k_global),
        m_concepts: args.m_concepts.or(file.retrieval.m_concepts).unwrap_or(d.m_concepts),
    }
}

fn model_name(args: &BackendArgs, file: &FileConfig) -> String {
    args.model.clone().or(file.llm.model.clone()).unwrap_or_else(|| "mock".into())
}

fn build_gateway(args: &BackendArgs, file: &FileConfig) -> Outcome<Gateway> {
    let kind = match (args.llm, file.llm.backend.as_deref()) {
        (Some(k), _) => k,
        (None, None) => LlmArg::Mock,
        (None, Some(name)) => LlmArg::from_str(name, true)
            .map_err(|_| usage(&format!("unknown llm backend `{name}` in config")))?,
    };
    if kind == LlmArg::Mock {
        return Ok(Gateway::mock());
    }
    let endpoint = args
        .endpoint
        .clone()
        .or(file.llm.endpoint.clone())
        .ok_or_else(|| usage("--llm remote needs --endpoint"))?;
    if args.model.is_none() && file.llm.model.is_none() {
        return Err(usage("--llm remote needs --model"));
    }
    let mut remote = RemoteConfig::new(endpoint);
    remote.credential_env = args.api_key_env.clone().or(file.llm.api_key_env.clone());
    remote.max_in_flight = args
        .max_in_flight
        .map(|n| n as usize)
        .or(file.llm.max_in_flight)
        .unwrap_or(DEFAULT_MAX_IN_FLIGHT);
    Gateway::new(BackendKind::Remote(remote)).map_err(|e| usage(&e.to_string()))
}
