use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problems::ProblemKind;
use crate::trace::TracePoint;

use super::experiment::{Algorithm, ExperimentConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleSummary {
    pub fitness: f64,
    pub permutation: Vec<usize>,
}

/// One (algorithm, seed) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub algorithm: Algorithm,
    pub seed: u64,
    pub best_fitness: f64,
    pub best_permutation: Vec<usize>,
    pub evaluations: u64,
    pub wall_time_ms: f64,
    /// Whether the oracle optimum was reached; absent when no oracle ran.
    pub success: Option<bool>,
    pub trace: Vec<TracePoint>,
    /// Best over all parallel machines, for gene-machine runs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub global_best: Option<GlobalBest>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlobalBest {
    pub fitness: f64,
    pub permutation: Vec<usize>,
    /// Zero-based index of the machine holding it.
    pub machine: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgorithmSummary {
    pub algorithm: Algorithm,
    pub runs: usize,
    pub mean: f64,
    /// Sample standard deviation (zero for a single run).
    pub std_dev: f64,
    pub min: f64,
    pub max: f64,
    pub success_rate: Option<f64>,
}

impl AlgorithmSummary {
    /// Statistics over `records` in the given order.
    pub fn from_records(algorithm: Algorithm, records: &[&RunRecord]) -> Self {
        let xs: Vec<f64> = records.iter().map(|r| r.best_fitness).collect();
        let (mean, std_dev, min, max) = describe(&xs);
        let success_rate = if records.is_empty() || records.iter().any(|r| r.success.is_none()) {
            None
        } else {
            let hits = records.iter().filter(|r| r.success == Some(true)).count();
            Some(hits as f64 / records.len() as f64)
        };
        AlgorithmSummary {
            algorithm,
            runs: records.len(),
            mean,
            std_dev,
            min,
            max,
            success_rate,
        }
    }
}

/// Mean, sample standard deviation, min and max, summing in input order.
pub fn describe(xs: &[f64]) -> (f64, f64, f64, f64) {
    if xs.is_empty() {
        return (f64::NAN, f64::NAN, f64::NAN, f64::NAN);
    }
    let count = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / count;
    let std_dev = if xs.len() > 1 {
        (xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (count - 1.0)).sqrt()
    } else {
        0.0
    };
    let min = xs.iter().copied().fold(f64::INFINITY, f64::min);
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (mean, std_dev, min, max)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub version: String,
    pub instance: String,
    pub n: usize,
    pub kind: ProblemKind,
    pub config: ExperimentConfig,
    pub oracle: Option<OracleSummary>,
    pub records: Vec<RunRecord>,
    pub summaries: Vec<AlgorithmSummary>,
}

impl RunReport {
    /// Copy with every wall-time field zeroed, for reproducibility checks.
    pub fn without_wall_times(mut self) -> Self {
        for r in &mut self.records {
            r.wall_time_ms = 0.0;
        }
        self
    }

    pub fn summary(&self, algorithm: Algorithm) -> Option<&AlgorithmSummary> {
        self.summaries.iter().find(|s| s.algorithm == algorithm)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Csv,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(ReportFormat::Json),
            "csv" => Ok(ReportFormat::Csv),
            other => Err(Error::UnsupportedFormat(other.to_string())),
        }
    }
}

/// Flat CSV row shared by per-seed (`run`) and per-algorithm (`summary`) rows.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CsvRow {
    pub row_type: String,
    pub algorithm: String,
    pub seed: Option<u64>,
    pub best_fitness: Option<f64>,
    pub evaluations: Option<u64>,
    pub wall_time_ms: Option<f64>,
    pub success: Option<bool>,
    pub best_permutation: Option<String>,
    pub runs: Option<usize>,
    pub mean: Option<f64>,
    pub std_dev: Option<f64>,
    pub min: Option<f64>,
    pub max: Option<f64>,
    pub success_rate: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub algorithm: String,
    pub seed: u64,
    pub evaluation: u64,
    pub best_fitness: f64,
}

pub fn emit_report(report: &RunReport, format: ReportFormat) -> Result<String> {
    match format {
        ReportFormat::Json => Ok(serde_json::to_string_pretty(report)? + "\n"),
        ReportFormat::Csv => {
            let mut w = headerless_writer();
            w.write_record(CSV_COLUMNS)?;
            for r in &report.records {
                w.serialize(CsvRow {
                    row_type: "run".into(),
                    algorithm: r.algorithm.name().into(),
                    seed: Some(r.seed),
                    best_fitness: Some(r.best_fitness),
                    evaluations: Some(r.evaluations),
                    wall_time_ms: Some(r.wall_time_ms),
                    success: r.success,
                    best_permutation: Some(
                        r.best_permutation.iter().map(usize::to_string).collect::<Vec<_>>().join(" "),
                    ),
                    ..CsvRow::default()
                })?;
            }
            for s in &report.summaries {
                w.serialize(CsvRow {
                    row_type: "summary".into(),
                    algorithm: s.algorithm.name().into(),
                    runs: Some(s.runs),
                    mean: Some(s.mean),
                    std_dev: Some(s.std_dev),
                    min: Some(s.min),
                    max: Some(s.max),
                    success_rate: s.success_rate,
                    ..CsvRow::default()
                })?;
            }
            finish_csv(w)
        }
    }
}

/// Best-so-far traces as `algorithm,seed,evaluation,best_fitness` rows.
pub fn emit_traces_csv(report: &RunReport) -> Result<String> {
    let mut w = headerless_writer();
    w.write_record(["algorithm", "seed", "evaluation", "best_fitness"])?;
    for r in &report.records {
        for p in &r.trace {
            w.serialize(TraceRow {
                algorithm: r.algorithm.name().into(),
                seed: r.seed,
                evaluation: p.evaluations,
                best_fitness: p.best_fitness,
            })?;
        }
    }
    finish_csv(w)
}

const CSV_COLUMNS: [&str; 14] = [
    "row_type",
    "algorithm",
    "seed",
    "best_fitness",
    "evaluations",
    "wall_time_ms",
    "success",
    "best_permutation",
    "runs",
    "mean",
    "std_dev",
    "min",
    "max",
    "success_rate",
];

// Headers are written explicitly so that empty reports still carry them.
fn headerless_writer() -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new())
}

fn finish_csv(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w
        .into_inner()
        .map_err(|e| Error::Serialization(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Serialization(e.to_string()))
}

/// Human-readable comparison table.
pub fn summary_table(report: &RunReport) -> String {
    let mut out = format!(
        "{:<14} {:>5} {:>14} {:>12} {:>12} {:>12} {:>9}\n",
        "algorithm", "runs", "mean", "std", "min", "max", "success"
    );
    for s in &report.summaries {
        let success = s
            .success_rate
            .map_or_else(|| "-".to_string(), |r| format!("{:.2}", r));
        out.push_str(&format!(
            "{:<14} {:>5} {:>14.4} {:>12.4} {:>12.4} {:>12.4} {:>9}\n",
            s.algorithm.name(),
            s.runs,
            s.mean,
            s.std_dev,
            s.min,
            s.max,
            success
        ));
    }
    out
}
