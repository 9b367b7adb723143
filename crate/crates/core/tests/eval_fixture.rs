use std::path::PathBuf;

use personarag::context_engine::RetrievalConfig;
use personarag::eval_harness::{load_dataset, run_task, ContextMode, EvalTask, Fixed10, MetricsReport, RunOptions, TaskSpec};
use personarag::exec::Execution;
use personarag::llm_gateway::Gateway;

fn fixture() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/news.jsonl")
}

fn run(context: ContextMode, exec: Execution) -> MetricsReport {
    let records = load_dataset(&fixture()).unwrap();
    let opts = RunOptions { context, exec, ..RunOptions::default() };
    run_task(&TaskSpec::new(EvalTask::News), &records, &RetrievalConfig::default(), &Gateway::mock(), &opts).unwrap()
}

// Values audited with scripts/audit_mock_pipeline.py.
#[test]
fn pinned_news_fixture_metrics() {
    let full = run(ContextMode::Full, Execution::default());
    assert_eq!(full.n_queries, 60);
    assert_eq!(full.n_parse_failures, 0);
    assert_eq!(full.accuracy, Some(Fixed10(0.9)));
    let f1 = full.macro_f1.unwrap().0;
    assert_eq!(format!("{f1:.10}"), "0.9050106326");

    let misses: Vec<&str> = full
        .records
        .iter()
        .filter(|r| Some(&r.gold) != r.prediction.as_ref())
        .map(|r| r.query_id.as_str())
        .collect();
    assert_eq!(misses, ["q:u05:0003", "q:u12:0003", "q:u14:0003", "q:u15:0001", "q:u16:0003", "q:u17:0002"]);

    let empty = run(ContextMode::Empty, Execution::default());
    assert_eq!(format!("{:.10}", empty.accuracy.unwrap().0), "0.1166666667");
    assert_eq!(format!("{:.10}", empty.macro_f1.unwrap().0), "0.0261194030");
}

#[test]
fn report_independent_of_execution_mode() {
    let a = run(ContextMode::Full, Execution::Sequential).to_json_string();
    let b = run(ContextMode::Full, Execution::Parallel).to_json_string();
    assert_eq!(a, b);
    assert!(a.contains("\"accuracy\": 0.9000000000,"));
}
