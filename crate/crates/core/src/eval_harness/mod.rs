//! End-to-end evaluation on LaMP-style personalization tasks.
//!
//! History records build the graph and index; test records of the selected
//! users are then answered against that frozen state. Test text is never
//! indexed.

mod dataset;
mod metrics;

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use serde::{Serialize, Serializer};
use thiserror::Error;
use tracing::info;

pub use dataset::{load_dataset, parse_dataset, select_eval_users, DatasetRecord, Gold, Split};
pub use metrics::{classification_metrics, regression_metrics};

use crate::concept_extract::Lexicon;
use crate::context_engine::{ContextEngine, Query, RetrievalConfig, SemanticContext, TaskKind};
use crate::exec::Execution;
use crate::graph_store::{GraphError, InteractionInput, KnowledgeGraph};
use crate::llm_gateway::{parse_label, parse_rating, CompletionRequest, Gateway, LlmError};
use crate::prompt_builder::{build_prompt, PromptError};

pub const RATING_MIN: i64 = 1;
pub const RATING_MAX: i64 = 5;
pub const DEFAULT_EVAL_USERS: usize = 100;

pub const NEWS_LABELS: [&str; 15] = [
    "business",
    "crime",
    "culture & arts",
    "education",
    "entertainment",
    "food & drink",
    "healthy living",
    "parents",
    "politics",
    "religion",
    "science & technology",
    "sports",
    "style & beauty",
    "travel",
    "women",
];

pub const MOVIE_TAGS: [&str; 15] = [
    "action",
    "based on a book",
    "classic",
    "comedy",
    "dark comedy",
    "dystopia",
    "fantasy",
    "psychology",
    "romance",
    "sci-fi",
    "social commentary",
    "thought-provoking",
    "true story",
    "twist ending",
    "violence",
];

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("cannot read {}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("no test records for the selected users")]
    EmptyTestSet,
    #[error("metrics need at least one pair")]
    EmptyInput,
    #[error("record {index} (user `{user_id}`): {reason}")]
    InvalidRecord {
        index: usize,
        user_id: String,
        reason: String,
    },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Prompt(#[from] PromptError),
    #[error("backend failure on {query_id}")]
    Backend {
        query_id: String,
        #[source]
        source: LlmError,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum EvalTask {
    #[serde(rename = "lamp2n")]
    News,
    #[serde(rename = "lamp2m")]
    MovieTag,
    #[serde(rename = "lamp3")]
    Rating,
}

impl EvalTask {
    pub fn name(self) -> &'static str {
        match self {
            EvalTask::News => "lamp2n",
            EvalTask::MovieTag => "lamp2m",
            EvalTask::Rating => "lamp3",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name.to_ascii_lowercase().as_str() {
            "lamp2n" | "lamp-2n" | "news" => Some(EvalTask::News),
            "lamp2m" | "lamp-2m" | "movies" | "movie" => Some(EvalTask::MovieTag),
            "lamp3" | "lamp-3" | "rating" => Some(EvalTask::Rating),
            _ => None,
        }
    }

    pub fn task_kind(self) -> TaskKind {
        match self {
            EvalTask::Rating => TaskKind::Rating,
            _ => TaskKind::Classification,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaskSpec {
    pub kind: EvalTask,
    /// Sorted label set; empty for rating tasks.
    pub labels: Vec<String>,
}

impl TaskSpec {
    pub fn new(kind: EvalTask) -> Self {
        let labels: &[&str] = match kind {
            EvalTask::News => &NEWS_LABELS,
            EvalTask::MovieTag => &MOVIE_TAGS,
            EvalTask::Rating => &[],
        };
        TaskSpec {
            kind,
            labels: labels.iter().map(|s| s.to_string()).collect(),
        }
    }

    pub fn with_labels<I: IntoIterator<Item = S>, S: Into<String>>(kind: EvalTask, labels: I) -> Self {
        let labels: BTreeSet<String> = labels.into_iter().map(|l| l.into().to_lowercase()).collect();
        TaskSpec {
            kind,
            labels: labels.into_iter().collect(),
        }
    }

    pub fn is_classification(&self) -> bool {
        self.kind.task_kind() == TaskKind::Classification
    }
}

/// Whether prompts carry the retrieved context or only the base section.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ContextMode {
    #[default]
    Full,
    Empty,
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub n_users: usize,
    pub context: ContextMode,
    pub lexicon: Option<Lexicon>,
    pub model: String,
    pub exec: Execution,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            n_users: DEFAULT_EVAL_USERS,
            context: ContextMode::Full,
            lexicon: None,
            model: "mock".into(),
            exec: Execution::default(),
        }
    }
}

/// Metric value written with exactly ten decimals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fixed10(pub f64);

impl Serialize for Fixed10 {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let raw = serde_json::value::RawValue::from_string(format!("{:.10}", self.0))
            .map_err(serde::ser::Error::custom)?;
        raw.serialize(s)
    }
}

// Field order is alphabetical so the serialized keys come out sorted.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QueryRecord {
    pub gold: Gold,
    pub prediction: Option<Gold>,
    pub query_id: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsReport {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub accuracy: Option<Fixed10>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub macro_f1: Option<Fixed10>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mae: Option<Fixed10>,
    pub n_parse_failures: usize,
    pub n_queries: usize,
    pub records: Vec<QueryRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rmse: Option<Fixed10>,
    pub task: EvalTask,
}

impl MetricsReport {
    /// Pretty JSON with sorted keys and a single trailing newline.
    pub fn to_json_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report is plain data");
        s.push('\n');
        s
    }
}

struct TestItem<'a> {
    query_id: String,
    record: &'a DatasetRecord,
}

fn record_content(r: &DatasetRecord) -> String {
    match (r.title.trim(), r.text.trim()) {
        ("", text) => text.to_string(),
        (title, "") => title.to_string(),
        (title, text) => format!("{title}\n{text}"),
    }
}

fn validate(task: &TaskSpec, records: &[DatasetRecord]) -> Result<(), EvalError> {
    let labels: BTreeSet<&str> = task.labels.iter().map(String::as_str).collect();
    for (index, r) in records.iter().enumerate() {
        let invalid = |reason: String| EvalError::InvalidRecord {
            index,
            user_id: r.user_id.clone(),
            reason,
        };
        if r.user_id.is_empty() {
            return Err(invalid("empty user_id".into()));
        }
        match (&r.gold, task.is_classification()) {
            (Gold::Label(l), true) if labels.contains(l.to_lowercase().as_str()) => {}
            (Gold::Rating(v), false) if (RATING_MIN..=RATING_MAX).contains(v) => {}
            (gold, _) => return Err(invalid(format!("gold `{gold}` invalid for task {}", task.kind.name()))),
        }
        if r.split == Split::Test && record_content(r).is_empty() {
            return Err(invalid("test record has no text".into()));
        }
    }
    Ok(())
}

/// Graph over the history split only.
pub fn build_history_graph(
    records: &[DatasetRecord],
    lexicon: Option<&Lexicon>,
) -> Result<KnowledgeGraph, EvalError> {
    let mut graph = KnowledgeGraph::new();
    for r in records.iter().filter(|r| r.split == Split::History) {
        graph.add_interaction(
            &InteractionInput {
                user_id: r.user_id.clone(),
                title: r.title.clone(),
                text: r.text.clone(),
                category: r.gold.to_string(),
                timestamp: r.timestamp,
            },
            lexicon,
        )?;
    }
    Ok(graph)
}

pub fn run_task(
    task: &TaskSpec,
    records: &[DatasetRecord],
    cfg: &RetrievalConfig,
    gateway: &Gateway,
    opts: &RunOptions,
) -> Result<MetricsReport, EvalError> {
    validate(task, records)?;
    let graph = build_history_graph(records, opts.lexicon.as_ref())?;

    let users: BTreeSet<String> = select_eval_users(records, opts.n_users).into_iter().collect();
    let mut per_user: BTreeMap<&str, usize> = BTreeMap::new();
    let items: Vec<TestItem> = records
        .iter()
        .filter(|r| r.split == Split::Test && users.contains(&r.user_id))
        .map(|r| {
            let n = per_user.entry(r.user_id.as_str()).or_default();
            *n += 1;
            TestItem {
                query_id: format!("q:{}:{:04}", r.user_id, n),
                record: r,
            }
        })
        .collect();
    if items.is_empty() {
        return Err(EvalError::EmptyTestSet);
    }
    info!(
        task = task.kind.name(),
        users = users.len(),
        queries = items.len(),
        interactions = graph.interaction_count(),
        "evaluating"
    );

    let engine = ContextEngine::with_execution(&graph, opts.exec);
    let kind = task.kind.task_kind();
    let outcomes = opts.exec.map(&items, |item| -> Result<QueryRecord, EvalError> {
        let r = item.record;
        let query = Query::new(r.user_id.clone(), record_content(r), kind)
            .expect("validated records have user and text")
            .with_labels(task.labels.clone());
        let ctx = match opts.context {
            ContextMode::Full => engine.get_semantic_context(&r.user_id, &query, cfg),
            ContextMode::Empty => SemanticContext::empty(),
        };
        let prompt = build_prompt(&query, &ctx, &task.labels)?;
        let raw = gateway
            .complete(&CompletionRequest::new(prompt.text, opts.model.clone()))
            .map_err(|source| EvalError::Backend {
                query_id: item.query_id.clone(),
                source,
            })?;
        let prediction = match kind {
            TaskKind::Classification => parse_label(&raw, &task.labels).ok().map(Gold::Label),
            TaskKind::Rating => parse_rating(&raw, RATING_MIN, RATING_MAX).ok().map(Gold::Rating),
        };
        let gold = match &r.gold {
            Gold::Label(l) => Gold::Label(l.to_lowercase()),
            g => g.clone(),
        };
        Ok(QueryRecord {
            gold,
            prediction,
            query_id: item.query_id.clone(),
        })
    });
    let mut records_out = outcomes.into_iter().collect::<Result<Vec<_>, _>>()?;
    records_out.sort_by(|a, b| a.query_id.cmp(&b.query_id));
    summarize(task.kind, records_out)
}

/// Computes the report metrics from per-query records.
pub fn summarize(kind: EvalTask, records: Vec<QueryRecord>) -> Result<MetricsReport, EvalError> {
    let n_parse_failures = records.iter().filter(|r| r.prediction.is_none()).count();
    let mut report = MetricsReport {
        accuracy: None,
        macro_f1: None,
        mae: None,
        n_parse_failures,
        n_queries: records.len(),
        records: Vec::new(),
        rmse: None,
        task: kind,
    };
    match kind.task_kind() {
        TaskKind::Classification => {
            let pairs: Vec<(String, Option<String>)> = records
                .iter()
                .map(|r| {
                    let pred = match &r.prediction {
                        Some(Gold::Label(l)) => Some(l.clone()),
                        _ => None,
                    };
                    (r.gold.to_string(), pred)
                })
                .collect();
            let (acc, f1) = classification_metrics(&pairs)?;
            report.accuracy = Some(Fixed10(acc));
            report.macro_f1 = Some(Fixed10(f1));
        }
        TaskKind::Rating => {
            let pairs: Vec<(i64, i64)> = records
                .iter()
                .map(|r| {
                    let gold = match r.gold {
                        Gold::Rating(g) => g,
                        _ => unreachable!("rating records carry integer gold"),
                    };
                    let pred = match r.prediction {
                        Some(Gold::Rating(p)) => p,
                        // a non-answer is scored at the farthest end of the scale
                        _ if gold - RATING_MIN >= RATING_MAX - gold => RATING_MIN,
                        _ => RATING_MAX,
                    };
                    (gold, pred)
                })
                .collect();
            let (mae, rmse) = regression_metrics(&pairs)?;
            debug_assert!(mae <= rmse);
            report.mae = Some(Fixed10(mae));
            report.rmse = Some(Fixed10(rmse));
        }
    }
    report.records = records;
    Ok(report)
}
