//! Benchmark harness: random-search control, experiment runner and report
//! emission.

mod experiment;
mod random_search;
mod report;

pub use experiment::{
    run_experiment, run_experiment_on, Algorithm, EngineParams, ExperimentConfig, InstanceFormat, ProblemSource,
};
pub use random_search::{random_search_baseline, random_search_traced};
pub use report::{
    describe, emit_report, emit_traces_csv, summary_table, AlgorithmSummary, CsvRow, GlobalBest, OracleSummary, ReportFormat,
    RunRecord, RunReport, TraceRow,
};
