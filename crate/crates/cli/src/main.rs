use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use genemachine::bench::{
    emit_report, emit_traces_csv, run_experiment_on, summary_table, Algorithm, EngineParams, ExperimentConfig,
    InstanceFormat, ProblemSource, ReportFormat, RunReport,
};
use genemachine::demo::{run_worked_example, SEED_BASE};
use genemachine::engine::{machine_rng, Budget, MergeMode};
use genemachine::ga::GaParams;
use genemachine::growing::PressureSchedule;
use genemachine::model::{genes, Chromosome, FitnessList, Gene};
use genemachine::notation::{bucket_table, permutation_label};
use genemachine::problems::{brute_force_optimum, Problem, ProblemInstance};
use genemachine::seeding::{latin_square_chromosomes, latin_square_from_base};
use genemachine::{Error, Result};

#[derive(Parser)]
#[command(name = "genemachine", version, about = "Building-block search for permutation problems")]
#[command(arg_required_else_help = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one algorithm on one instance with one seed.
    Solve(SolveArgs),
    /// Run several algorithms over several seeds under equal budgets.
    Compare(CompareArgs),
    /// Exhaustive optimum for instances with at most 10 genes.
    Oracle(ProblemArgs),
    /// Show the seeding chromosomes and the resulting bucket table.
    SeedDemo(SeedDemoArgs),
    /// Replay the four-city worked example and check both bucket tables.
    #[command(name = "demo-paper", alias = "demo")]
    DemoPaper,
    /// Merge two fitness lists given as canonical JSON.
    MergeDemo(MergeDemoArgs),
}

#[derive(Args)]
struct ProblemArgs {
    /// Instance file. Without it the built-in four-city line is used.
    #[arg(long)]
    instance: Option<PathBuf>,
    /// Instance format: tsp-open, assignment or tsplib.
    #[arg(long, default_value = "tsp-open", value_parser = parse_with::<InstanceFormat>)]
    kind: InstanceFormat,
}

#[derive(Args)]
struct RunArgs {
    /// Total fitness evaluations per run.
    #[arg(long, conflicts_with = "time_ms")]
    budget_evals: Option<u64>,
    /// Wall-clock budget per run in milliseconds (gene-machine only).
    #[arg(long)]
    time_ms: Option<u64>,
    #[arg(long, default_value_t = 1)]
    machines: usize,
    #[arg(long, default_value_t = 1)]
    cycles: usize,
    /// one-way or broadcast.
    #[arg(long, default_value = "one-way", value_parser = parse_with::<MergeMode>)]
    merge_mode: MergeMode,
    /// Selection pressure at the start of a run.
    #[arg(long, default_value_t = 1.0)]
    beta0: f64,
    /// Selection pressure at the end of a run.
    #[arg(long, default_value_t = 8.0)]
    beta1: f64,
    #[arg(long, default_value_t = 50)]
    ga_pop: usize,
    #[arg(long, default_value_t = 3)]
    ga_tournament: usize,
    #[arg(long, default_value_t = 0.9)]
    ga_cx: f64,
    #[arg(long, default_value_t = 0.2)]
    ga_mut: f64,
    #[arg(long, default_value_t = 1)]
    ga_elitism: usize,
    /// Run (algorithm, seed) cells on a thread pool.
    #[arg(long)]
    parallel_cells: bool,
}

#[derive(Args)]
struct OutputArgs {
    /// Write the full report to this file.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Report format: json or csv. Defaults to the extension of --out, else json.
    #[arg(long, value_parser = parse_with::<ReportFormat>)]
    format: Option<ReportFormat>,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    #[arg(long, default_value = "gene-machine", value_parser = parse_with::<Algorithm>)]
    algo: Algorithm,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    run: RunArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct CompareArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    /// Comma-separated algorithms; all three by default.
    #[arg(long, value_delimiter = ',', value_parser = parse_with::<Algorithm>)]
    algo: Vec<Algorithm>,
    /// Seeds as a comma-separated list with optional ranges, e.g. `1,5,10-19`.
    #[arg(long, default_value = "0-9", value_parser = parse_seeds)]
    seeds: SeedList,
    #[command(flatten)]
    run: RunArgs,
    #[command(flatten)]
    output: OutputArgs,
    /// Write best-so-far traces as CSV to this file.
    #[arg(long)]
    traces: Option<PathBuf>,
}

#[derive(Args)]
struct SeedDemoArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    /// Shuffle the base with this seed instead of using `A C D B`.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct MergeDemoArgs {
    /// Destination list (canonical JSON file).
    #[arg(long)]
    dst: PathBuf,
    /// Source list merged into the destination.
    #[arg(long)]
    src: PathBuf,
}

fn parse_with<T: std::str::FromStr<Err = Error>>(s: &str) -> std::result::Result<T, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

#[derive(Clone)]
struct SeedList(Vec<u64>);

fn parse_seeds(s: &str) -> std::result::Result<SeedList, String> {
    let mut seeds = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let number = |t: &str| t.trim().parse::<u64>().map_err(|_| format!("invalid seed `{t}`"));
        match part.split_once('-') {
            Some((lo, hi)) => {
                let (lo, hi) = (number(lo)?, number(hi)?);
                if lo > hi {
                    return Err(format!("empty seed range `{part}`"));
                }
                seeds.extend(lo..=hi);
            }
            None => seeds.push(number(part)?),
        }
    }
    if seeds.is_empty() {
        return Err("no seeds given".into());
    }
    Ok(SeedList(seeds))
}

impl ProblemArgs {
    fn source(&self) -> ProblemSource {
        match &self.instance {
            Some(path) => ProblemSource::File {
                path: path.clone(),
                kind: self.kind,
            },
            None => ProblemSource::FourCityLine,
        }
    }
}

impl RunArgs {
    fn config(&self, problem: ProblemSource, algorithms: Vec<Algorithm>, seeds: Vec<u64>) -> Result<ExperimentConfig> {
        let budget = match (self.budget_evals, self.time_ms) {
            (_, Some(ms)) => Budget::WallClockMs(ms),
            (Some(evals), None) => Budget::Evaluations(evals),
            (None, None) => Budget::Evaluations(1000),
        };
        let mut cfg = ExperimentConfig::new(problem, algorithms, seeds, budget);
        cfg.schedule = PressureSchedule::new(self.beta0, self.beta1)?;
        cfg.engine = EngineParams {
            machines: self.machines,
            cycles: self.cycles,
            merge_mode: self.merge_mode,
        };
        cfg.ga = GaParams {
            population_size: self.ga_pop,
            tournament_k: self.ga_tournament,
            crossover_rate: self.ga_cx,
            mutation_rate: self.ga_mut,
            elitism: self.ga_elitism,
        };
        cfg.parallel_cells = self.parallel_cells;
        cfg.validate()?;
        Ok(cfg)
    }
}

impl OutputArgs {
    fn write(&self, report: &RunReport) -> Result<()> {
        let Some(path) = &self.out else { return Ok(()) };
        let format = match self.format {
            Some(f) => f,
            None if path.extension().is_some_and(|e| e == "csv") => ReportFormat::Csv,
            None => ReportFormat::Json,
        };
        write_file(path, &emit_report(report, format)?)
    }
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn read_file(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn describe_instance(label: &str, problem: &ProblemInstance) -> String {
    let kind = match problem.kind() {
        genemachine::problems::ProblemKind::OpenPathTsp => "open-path tsp",
        genemachine::problems::ProblemKind::Assignment => "assignment",
    };
    format!("instance: {label} (n = {}, {kind})", problem.n())
}

fn solve(args: &SolveArgs) -> Result<()> {
    let source = args.problem.source();
    let cfg = args.run.config(source.clone(), vec![args.algo], vec![args.seed])?;
    let problem = source.load()?;
    let report = run_experiment_on(&cfg, &problem)?;
    let record = &report.records[0];
    let permutation: Vec<Gene> = record.best_permutation.iter().copied().map(Gene).collect();

    println!("{}", describe_instance(&report.instance, &problem));
    println!(
        "algorithm: {}  seed: {}  evaluations: {}",
        record.algorithm.name(),
        record.seed,
        record.evaluations
    );
    println!("best fitness: {}", record.best_fitness);
    println!("best permutation: {}", permutation_label(&permutation));
    if let Some(global) = &record.global_best {
        let genes: Vec<Gene> = global.permutation.iter().copied().map(Gene).collect();
        println!(
            "global best: {} from machine {}: {}",
            global.fitness,
            global.machine + 1,
            permutation_label(&genes)
        );
    }
    if let Some(oracle) = &report.oracle {
        println!("optimum: {}", oracle.fitness);
    }
    args.output.write(&report)
}

fn compare(args: &CompareArgs) -> Result<()> {
    let algorithms = if args.algo.is_empty() {
        Algorithm::ALL.to_vec()
    } else {
        args.algo.clone()
    };
    let source = args.problem.source();
    let cfg = args.run.config(source.clone(), algorithms, args.seeds.0.clone())?;
    let problem = source.load()?;
    let report = run_experiment_on(&cfg, &problem)?;

    println!("{}", describe_instance(&report.instance, &problem));
    if let Some(oracle) = &report.oracle {
        println!("optimum: {}", oracle.fitness);
    }
    print!("{}", summary_table(&report));
    args.output.write(&report)?;
    if let Some(path) = &args.traces {
        write_file(path, &emit_traces_csv(&report)?)?;
    }
    Ok(())
}

fn oracle(args: &ProblemArgs) -> Result<()> {
    let problem = args.source().load()?;
    let (fitness, permutation) = brute_force_optimum(&problem)?;
    println!("{} {}", fitness, permutation_label(&permutation));
    Ok(())
}

fn seed_demo(args: &SeedDemoArgs) -> Result<()> {
    let source = args.problem.source();
    let problem = source.load()?;
    let rows = match (args.seed, &args.problem.instance) {
        (Some(seed), _) => latin_square_chromosomes(problem.n(), &mut machine_rng(seed, 0))?,
        (None, None) => latin_square_from_base(&genes(&SEED_BASE))?,
        (None, Some(_)) => latin_square_from_base(&(0..problem.n()).map(Gene).collect::<Vec<_>>())?,
    };
    let mut list = FitnessList::new(problem.n())?;
    println!("{}", describe_instance(&source.label(), &problem));
    for (i, row) in rows.into_iter().enumerate() {
        let fitness = problem.evaluate(&row)?;
        println!("Chromosome {} = {}  fitness value = {}", i + 1, permutation_label(&row), fitness);
        list.record_observation(&Chromosome::new(row, fitness))?;
    }
    println!();
    print!("{}", bucket_table(&list.ordered_buckets()));
    Ok(())
}

fn demo_paper() -> Result<bool> {
    let demo = run_worked_example()?;
    print!("{}", demo.render());
    Ok(demo.all_match())
}

fn merge_demo(args: &MergeDemoArgs) -> Result<()> {
    let mut dst = FitnessList::from_json(&read_file(&args.dst)?)?;
    let src = FitnessList::from_json(&read_file(&args.src)?)?;
    dst.merge_from(&src)?;
    println!("{}", dst.to_json()?);
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Solve(a) => solve(a),
        Command::Compare(a) => compare(a),
        Command::Oracle(a) => oracle(a),
        Command::SeedDemo(a) => seed_demo(a),
        Command::DemoPaper => match demo_paper() {
            Ok(true) => Ok(()),
            Ok(false) => {
                eprintln!("error: worked example does not match the reference tables");
                return ExitCode::FAILURE;
            }
            Err(e) => Err(e),
        },
        Command::MergeDemo(a) => merge_demo(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
