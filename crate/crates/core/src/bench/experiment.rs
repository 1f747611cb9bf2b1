use std::path::PathBuf;
use std::str::FromStr;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::engine::{run_parallel_with, Budget, MergeMode, ParallelConfig};
use crate::error::{Error, Result};
use crate::ga::{run_ga_traced, GaParams};
use crate::growing::PressureSchedule;
use crate::model::Chromosome;
use crate::problems::{
    brute_force_optimum, parse_assignment_matrix, parse_distance_matrix, parse_tsplib_euc2d, Problem,
    ProblemInstance, BRUTE_FORCE_MAX_N,
};
use crate::trace::Trace;

use super::random_search::random_search_traced;
use super::report::{AlgorithmSummary, GlobalBest, OracleSummary, RunRecord, RunReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    GeneMachine,
    Ga,
    Random,
}

impl Algorithm {
    pub const ALL: [Algorithm; 3] = [Algorithm::GeneMachine, Algorithm::Ga, Algorithm::Random];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::GeneMachine => "gene-machine",
            Algorithm::Ga => "ga",
            Algorithm::Random => "random",
        }
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown algorithm `{s}`")))
    }
}

/// On-disk instance formats.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InstanceFormat {
    TspOpen,
    Assignment,
    Tsplib,
}

impl InstanceFormat {
    pub fn name(self) -> &'static str {
        match self {
            InstanceFormat::TspOpen => "tsp-open",
            InstanceFormat::Assignment => "assignment",
            InstanceFormat::Tsplib => "tsplib",
        }
    }

    pub fn parse_instance(self, text: &str) -> Result<ProblemInstance> {
        match self {
            InstanceFormat::TspOpen => parse_distance_matrix(text),
            InstanceFormat::Assignment => parse_assignment_matrix(text),
            InstanceFormat::Tsplib => parse_tsplib_euc2d(text),
        }
    }
}

impl FromStr for InstanceFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [InstanceFormat::TspOpen, InstanceFormat::Assignment, InstanceFormat::Tsplib]
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown instance kind `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "source")]
pub enum ProblemSource {
    File { path: PathBuf, kind: InstanceFormat },
    /// The built-in four-city example.
    FourCityLine,
    Inline { label: String, instance: ProblemInstance },
}

impl ProblemSource {
    pub fn load(&self) -> Result<ProblemInstance> {
        match self {
            ProblemSource::File { path, kind } => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
                kind.parse_instance(&text)
            }
            ProblemSource::FourCityLine => Ok(ProblemInstance::four_city_line()),
            ProblemSource::Inline { instance, .. } => Ok(instance.clone()),
        }
    }

    pub fn label(&self) -> String {
        match self {
            ProblemSource::File { path, .. } => path.display().to_string(),
            ProblemSource::FourCityLine => "four-city-line".into(),
            ProblemSource::Inline { label, .. } => label.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EngineParams {
    pub machines: usize,
    pub cycles: usize,
    pub merge_mode: MergeMode,
}

impl Default for EngineParams {
    fn default() -> Self {
        EngineParams {
            machines: 1,
            cycles: 1,
            merge_mode: MergeMode::OneWay,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub problem: ProblemSource,
    pub algorithms: Vec<Algorithm>,
    pub seeds: Vec<u64>,
    pub budget: Budget,
    #[serde(default)]
    pub schedule: PressureSchedule,
    #[serde(default)]
    pub engine: EngineParams,
    #[serde(default)]
    pub ga: GaParams,
    /// Run cells on the rayon pool. Output is identical either way.
    #[serde(default, skip_serializing)]
    pub parallel_cells: bool,
}

impl ExperimentConfig {
    pub fn new(problem: ProblemSource, algorithms: Vec<Algorithm>, seeds: Vec<u64>, budget: Budget) -> Self {
        ExperimentConfig {
            problem,
            algorithms,
            seeds,
            budget,
            schedule: PressureSchedule::default(),
            engine: EngineParams::default(),
            ga: GaParams::default(),
            parallel_cells: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.algorithms.is_empty() {
            return Err(Error::Config("at least one algorithm is required".into()));
        }
        if self.seeds.is_empty() {
            return Err(Error::Config("at least one seed is required".into()));
        }
        self.budget.validated()?;
        if let Budget::WallClockMs(_) = self.budget {
            if let Some(a) = self.algorithms.iter().find(|a| **a != Algorithm::GeneMachine) {
                return Err(Error::Config(format!(
                    "{} only supports evaluation budgets",
                    a.name()
                )));
            }
        }
        Ok(())
    }
}

struct CellResult {
    best: Chromosome,
    evaluations: u64,
    trace: Trace,
    global_best: Option<GlobalBest>,
}

fn run_cell(problem: &ProblemInstance, cfg: &ExperimentConfig, algorithm: Algorithm, seed: u64) -> Result<CellResult> {
    let mut trace = Trace::for_budget(cfg.budget.limit());
    let mut global_best = None;
    let (best, evaluations) = match algorithm {
        Algorithm::GeneMachine => {
            let pcfg = ParallelConfig::new(cfg.engine.machines, cfg.engine.cycles, cfg.budget)
                .with_merge_mode(cfg.engine.merge_mode);
            let out = run_parallel_with(problem, &pcfg, &cfg.schedule, seed, Some(&mut trace), |_| {})?;
            trace.finish();
            global_best = Some(GlobalBest {
                fitness: out.global_best.fitness,
                permutation: out.global_best.genes.iter().map(|g| g.0).collect(),
                machine: out.global_best_machine,
            });
            (out.best, out.evaluations)
        }
        Algorithm::Ga => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let out = run_ga_traced(problem, &cfg.ga, cfg.budget.limit(), &mut rng, Some(&mut trace))?;
            (out.best, out.evaluations)
        }
        Algorithm::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let best = random_search_traced(problem, cfg.budget.limit(), &mut rng, Some(&mut trace))?;
            (best, cfg.budget.limit())
        }
    };
    Ok(CellResult {
        best,
        evaluations,
        trace,
        global_best,
    })
}

/// Runs every (algorithm, seed) cell under the same budget and summarizes.
///
/// Records are ordered by algorithm as configured, then by ascending seed.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunReport> {
    cfg.validate()?;
    let problem = cfg.problem.load()?;
    run_experiment_on(cfg, &problem)
}

/// As [`run_experiment`] with the instance already loaded.
pub fn run_experiment_on(cfg: &ExperimentConfig, problem: &ProblemInstance) -> Result<RunReport> {
    cfg.validate()?;
    let oracle = if problem.n() <= BRUTE_FORCE_MAX_N {
        let (fitness, perm) = brute_force_optimum(problem)?;
        Some(OracleSummary {
            fitness,
            permutation: perm.iter().map(|g| g.0).collect(),
        })
    } else {
        None
    };

    let mut seeds = cfg.seeds.clone();
    seeds.sort_unstable();
    seeds.dedup();
    let cells: Vec<(Algorithm, u64)> = cfg
        .algorithms
        .iter()
        .flat_map(|&a| seeds.iter().map(move |&s| (a, s)))
        .collect();

    let run = |&(algorithm, seed): &(Algorithm, u64)| -> Result<RunRecord> {
        let started = Instant::now();
        let cell = run_cell(problem, cfg, algorithm, seed).map_err(|e| Error::Cell {
            algorithm: algorithm.name().into(),
            seed,
            source: Box::new(e),
        })?;
        Ok(RunRecord {
            algorithm,
            seed,
            best_fitness: cell.best.fitness,
            best_permutation: cell.best.genes.iter().map(|g| g.0).collect(),
            evaluations: cell.evaluations,
            wall_time_ms: started.elapsed().as_secs_f64() * 1e3,
            success: oracle.as_ref().map(|o| cell.best.fitness <= o.fitness),
            trace: cell.trace.into_points(),
            global_best: cell.global_best,
        })
    };
    let records = if cfg.parallel_cells {
        cells.par_iter().map(run).collect::<Result<Vec<_>>>()?
    } else {
        cells.iter().map(run).collect::<Result<Vec<_>>>()?
    };

    let summaries = cfg
        .algorithms
        .iter()
        .map(|&a| {
            let rows: Vec<&RunRecord> = records.iter().filter(|r| r.algorithm == a).collect();
            AlgorithmSummary::from_records(a, &rows)
        })
        .collect();

    Ok(RunReport {
        version: env!("CARGO_PKG_VERSION").to_string(),
        instance: cfg.problem.label(),
        n: problem.n(),
        kind: problem.kind(),
        config: cfg.clone(),
        oracle,
        records,
        summaries,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line_cfg(algorithms: Vec<Algorithm>, seeds: Vec<u64>, budget: u64) -> ExperimentConfig {
        ExperimentConfig::new(ProblemSource::FourCityLine, algorithms, seeds, Budget::Evaluations(budget))
    }

    #[test]
    fn single_gene_machine_cell_hits_optimum() {
        let report = run_experiment(&line_cfg(vec![Algorithm::GeneMachine], vec![1], 200)).unwrap();
        assert_eq!(report.records.len(), 1);
        let r = &report.records[0];
        assert_eq!((r.best_fitness, r.success, r.evaluations), (3.0, Some(true), 200));
        assert_eq!(report.oracle.as_ref().unwrap().fitness, 3.0);
    }

    #[test]
    fn matrix_of_cells_and_means() {
        let report = run_experiment(&line_cfg(Algorithm::ALL.to_vec(), vec![5, 1, 4, 2, 3], 60)).unwrap();
        assert_eq!(report.records.len(), 15);
        for (i, r) in report.records.iter().enumerate() {
            assert_eq!(r.algorithm, Algorithm::ALL[i / 5]);
            assert_eq!(r.seed, (i % 5) as u64 + 1);
        }
        for s in &report.summaries {
            let xs: Vec<f64> = report.records.iter().filter(|r| r.algorithm == s.algorithm).map(|r| r.best_fitness).collect();
            assert_eq!(s.mean, xs.iter().sum::<f64>() / 5.0);
        }
    }

    #[test]
    fn config_validation() {
        assert!(run_experiment(&line_cfg(vec![], vec![1], 100)).is_err());
        assert!(run_experiment(&line_cfg(vec![Algorithm::Ga], vec![], 100)).is_err());
        let mut timed = line_cfg(vec![Algorithm::Ga], vec![1], 100);
        timed.budget = Budget::WallClockMs(10);
        assert!(matches!(run_experiment(&timed), Err(Error::Config(_))));
    }

    #[test]
    fn cell_errors_name_the_cell() {
        let err = run_experiment(&line_cfg(vec![Algorithm::Ga], vec![7], 10)).unwrap_err();
        match err {
            Error::Cell { algorithm, seed, .. } => assert_eq!((algorithm.as_str(), seed), ("ga", 7)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn parallel_cells_match_sequential() {
        let mut cfg = line_cfg(Algorithm::ALL.to_vec(), vec![1, 2, 3], 120);
        let a = run_experiment(&cfg).unwrap().without_wall_times();
        cfg.parallel_cells = true;
        let b = run_experiment(&cfg).unwrap().without_wall_times();
        assert_eq!(a.records, b.records);
    }

    #[test]
    fn parsing_names() {
        assert_eq!("gene-machine".parse::<Algorithm>().unwrap(), Algorithm::GeneMachine);
        assert!("sa".parse::<Algorithm>().is_err());
        assert_eq!("tsplib".parse::<InstanceFormat>().unwrap(), InstanceFormat::Tsplib);
        assert!("qap".parse::<InstanceFormat>().is_err());
    }
}
