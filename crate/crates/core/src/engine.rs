//! The machine facade and the cyclic parallel runner.

use std::thread;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::growing::{grow_step_traced, PressureSchedule};
use crate::model::{Chromosome, FitnessList};
use crate::problems::Problem;
use crate::seeding::seed_traced;
use crate::trace::Trace;

/// A single search machine: its Fitness-List, the best chromosome seen so
/// far and the number of evaluations it has spent.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneMachine {
    list: FitnessList,
    best: Option<Chromosome>,
    evals_used: u64,
}

impl GeneMachine {
    pub fn new(n: usize) -> Result<Self> {
        Ok(GeneMachine {
            list: FitnessList::new(n)?,
            best: None,
            evals_used: 0,
        })
    }

    pub fn n(&self) -> usize {
        self.list.n()
    }

    pub fn list(&self) -> &FitnessList {
        &self.list
    }

    pub fn is_seeded(&self) -> bool {
        self.list.is_seeded()
    }

    pub fn evals_used(&self) -> u64 {
        self.evals_used
    }

    pub fn best(&self) -> Result<&Chromosome> {
        self.best
            .as_ref()
            .ok_or_else(|| Error::InvalidState("machine has not been seeded".into()))
    }

    /// Folds an evaluated chromosome into the machine and charges one
    /// evaluation.
    pub(crate) fn absorb(&mut self, chrom: Chromosome) -> Result<()> {
        self.list.record_observation(&chrom)?;
        self.evals_used += 1;
        if self.best.as_ref().is_none_or(|b| chrom.fitness < b.fitness) {
            self.best = Some(chrom);
        }
        Ok(())
    }

    /// Lowers every block to the minimum of its own and `src`'s fitness.
    pub fn merge_from(&mut self, src: &FitnessList) -> Result<()> {
        self.list.merge_from(src)
    }

    /// Overwrites the list with a copy of `src`; used for broadcast merging.
    pub fn replace_list(&mut self, src: &FitnessList) -> Result<()> {
        if src.n() != self.n() {
            return Err(Error::IncompatibleMachines(self.n(), src.n()));
        }
        if !self.is_seeded() || !src.is_seeded() {
            return Err(Error::InvalidState("both Fitness-Lists must be seeded".into()));
        }
        self.list.clone_from(src);
        Ok(())
    }
}

/// Stopping rule for [`evolve`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Budget {
    Evaluations(u64),
    WallClockMs(u64),
}

impl Budget {
    pub fn evaluations(limit: u64) -> Result<Self> {
        Budget::Evaluations(limit).validated()
    }

    pub fn wall_clock_ms(limit: u64) -> Result<Self> {
        Budget::WallClockMs(limit).validated()
    }

    pub fn validated(self) -> Result<Self> {
        match self {
            Budget::Evaluations(0) | Budget::WallClockMs(0) => {
                Err(Error::InvalidArgument("budget limit must be positive".into()))
            }
            other => Ok(other),
        }
    }

    pub fn limit(&self) -> u64 {
        match *self {
            Budget::Evaluations(l) | Budget::WallClockMs(l) => l,
        }
    }

    /// Splits into `cycles` parts with floor division; the remainder goes to
    /// the final part.
    pub fn split(&self, cycles: usize) -> Vec<Budget> {
        let c = cycles.max(1) as u64;
        let total = self.limit();
        let per = total / c;
        (0..c)
            .map(|i| {
                let part = if i + 1 == c { per + total % c } else { per };
                match self {
                    Budget::Evaluations(_) => Budget::Evaluations(part),
                    Budget::WallClockMs(_) => Budget::WallClockMs(part),
                }
            })
            .collect()
    }
}

/// Seeds the machine if needed, then grows it until the budget runs out.
///
/// Pressure follows `sched` over the fraction of *this call's* budget
/// consumed, so a machine driven in cycles ramps once per cycle.
pub fn evolve<P, R>(
    machine: &mut GeneMachine,
    problem: &P,
    budget: Budget,
    sched: &PressureSchedule,
    rng: &mut R,
) -> Result<()>
where
    P: Problem + ?Sized,
    R: Rng + ?Sized,
{
    evolve_traced(machine, problem, budget, sched, rng, None)
}

pub fn evolve_traced<P, R>(
    machine: &mut GeneMachine,
    problem: &P,
    budget: Budget,
    sched: &PressureSchedule,
    rng: &mut R,
    mut trace: Option<&mut Trace>,
) -> Result<()>
where
    P: Problem + ?Sized,
    R: Rng + ?Sized,
{
    let budget = budget.validated()?;
    if problem.n() != machine.n() {
        return Err(Error::InvalidArgument(format!(
            "problem has {} genes but machine has {}",
            problem.n(),
            machine.n()
        )));
    }
    match budget {
        Budget::Evaluations(limit) => {
            let n = machine.n() as u64;
            let start = machine.evals_used;
            if !machine.is_seeded() {
                if limit < n {
                    return Err(Error::BudgetTooSmall(format!(
                        "seeding needs {n} evaluations but the budget is {limit}"
                    )));
                }
                seed_traced(machine, problem, rng, trace.as_deref_mut())?;
            }
            loop {
                let used = machine.evals_used - start;
                if used >= limit {
                    break;
                }
                let beta = sched.at(used as f64 / limit as f64)?;
                grow_step_traced(machine, problem, beta, rng, trace.as_deref_mut())?;
            }
        }
        Budget::WallClockMs(ms) => {
            let limit = Duration::from_millis(ms);
            let started = Instant::now();
            if !machine.is_seeded() {
                seed_traced(machine, problem, rng, trace.as_deref_mut())?;
            }
            loop {
                let elapsed = started.elapsed();
                if elapsed >= limit {
                    break;
                }
                let fraction = (elapsed.as_secs_f64() / limit.as_secs_f64()).min(1.0);
                grow_step_traced(machine, problem, sched.at(fraction)?, rng, trace.as_deref_mut())?;
            }
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MergeMode {
    /// Lists of machines 2..k are merged into machine 1 only.
    #[default]
    OneWay,
    /// As one-way, then machine 1's merged list is copied to every machine.
    Broadcast,
}

impl std::str::FromStr for MergeMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "one-way" => Ok(MergeMode::OneWay),
            "broadcast" => Ok(MergeMode::Broadcast),
            other => Err(Error::Config(format!("unknown merge mode `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParallelConfig {
    pub machines: usize,
    pub cycles: usize,
    /// Total budget across all machines and cycles.
    pub budget: Budget,
    pub merge_mode: MergeMode,
    /// Run each cycle's machines on separate threads. Results are identical
    /// to sequential execution; only tracing is unavailable.
    #[serde(default)]
    pub threaded: bool,
}

impl ParallelConfig {
    pub fn new(machines: usize, cycles: usize, budget: Budget) -> Self {
        ParallelConfig {
            machines,
            cycles,
            budget,
            merge_mode: MergeMode::OneWay,
            threaded: false,
        }
    }

    pub fn with_merge_mode(mut self, mode: MergeMode) -> Self {
        self.merge_mode = mode;
        self
    }

    pub fn threaded(mut self, threaded: bool) -> Self {
        self.threaded = threaded;
        self
    }

    /// Budget given to every machine in each cycle.
    ///
    /// In evaluation mode the total is split across cycles (floor, remainder
    /// to the last cycle) and each cycle's share is split across machines the
    /// same way, so the sum of all parts equals the total exactly.
    pub fn cycle_budgets(&self) -> Vec<Vec<Budget>> {
        self.budget
            .split(self.cycles)
            .into_iter()
            .map(|cycle| match cycle {
                Budget::Evaluations(_) => cycle.split(self.machines),
                Budget::WallClockMs(_) => vec![cycle; self.machines],
            })
            .collect()
    }

    fn validate(&self, n: usize) -> Result<()> {
        if self.machines == 0 || self.cycles == 0 {
            return Err(Error::Config("machines and cycles must both be at least 1".into()));
        }
        self.budget.validated()?;
        if let Budget::Evaluations(_) = self.budget {
            let first = &self.cycle_budgets()[0];
            if let Some(short) = first.iter().find(|b| b.limit() < n as u64) {
                return Err(Error::BudgetTooSmall(format!(
                    "first-cycle budget {} per machine cannot cover seeding ({n} evaluations)",
                    short.limit()
                )));
            }
        }
        Ok(())
    }
}

/// The rng stream of machine `index` under `master_seed`.
pub fn machine_rng(master_seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(index as u64);
    rng
}

/// Snapshot handed to the merge observer after each cycle.
pub struct MergeEvent<'a> {
    pub cycle: usize,
    /// Every machine's list just before merging, machine 1 first.
    pub pre_merge: &'a [FitnessList],
    /// Machine 1's list after merging.
    pub merged: &'a FitnessList,
}

#[derive(Debug, Clone)]
pub struct ParallelOutcome {
    /// Machine 1's best chromosome.
    pub best: Chromosome,
    pub global_best: Chromosome,
    pub global_best_machine: usize,
    pub machines: Vec<GeneMachine>,
    /// Evaluations spent across all machines.
    pub evaluations: u64,
    /// Machine 1's best fitness at the end of every cycle.
    pub cycle_best: Vec<f64>,
}

pub fn run_parallel<P: Problem + ?Sized>(
    problem: &P,
    cfg: &ParallelConfig,
    sched: &PressureSchedule,
    master_seed: u64,
) -> Result<ParallelOutcome> {
    run_parallel_with(problem, cfg, sched, master_seed, None, |_| {})
}

/// [`run_parallel`] with an optional trace and a callback invoked after
/// every merge.
pub fn run_parallel_with<P, F>(
    problem: &P,
    cfg: &ParallelConfig,
    sched: &PressureSchedule,
    master_seed: u64,
    mut trace: Option<&mut Trace>,
    mut on_merge: F,
) -> Result<ParallelOutcome>
where
    P: Problem + ?Sized,
    F: FnMut(MergeEvent<'_>),
{
    let n = problem.n();
    cfg.validate(n)?;
    if cfg.threaded && trace.is_some() {
        return Err(Error::Config("tracing requires sequential execution".into()));
    }
    let mut machines = (0..cfg.machines)
        .map(|_| GeneMachine::new(n))
        .collect::<Result<Vec<_>>>()?;
    let mut rngs: Vec<ChaCha8Rng> = (0..cfg.machines).map(|i| machine_rng(master_seed, i)).collect();
    let mut cycle_best = Vec::with_capacity(cfg.cycles);

    for (cycle, budgets) in cfg.cycle_budgets().into_iter().enumerate() {
        if cfg.threaded {
            thread::scope(|scope| {
                let handles: Vec<_> = machines
                    .iter_mut()
                    .zip(rngs.iter_mut())
                    .zip(&budgets)
                    .map(|((m, rng), &b)| scope.spawn(move || evolve(m, problem, b, sched, rng)))
                    .collect();
                handles
                    .into_iter()
                    .map(|h| h.join().expect("machine thread panicked"))
                    .collect::<Result<Vec<()>>>()
            })?;
        } else {
            for ((m, rng), &b) in machines.iter_mut().zip(rngs.iter_mut()).zip(&budgets) {
                evolve_traced(m, problem, b, sched, rng, trace.as_deref_mut())?;
            }
        }

        if machines.len() > 1 {
            let pre_merge: Vec<FitnessList> = machines.iter().map(|m| m.list().clone()).collect();
            let (head, rest) = machines.split_at_mut(1);
            for other in rest.iter() {
                head[0].merge_from(other.list())?;
            }
            if cfg.merge_mode == MergeMode::Broadcast {
                for other in rest.iter_mut() {
                    other.replace_list(head[0].list())?;
                }
            }
            on_merge(MergeEvent {
                cycle,
                pre_merge: &pre_merge,
                merged: machines[0].list(),
            });
        }
        cycle_best.push(machines[0].best()?.fitness);
    }

    let best = machines[0].best()?.clone();
    let (global_best_machine, global_best) = machines
        .iter()
        .enumerate()
        .map(|(i, m)| (i, m.best().expect("seeded")))
        .fold(None::<(usize, &Chromosome)>, |acc, (i, b)| match acc {
            Some((_, cur)) if cur.fitness <= b.fitness => acc,
            _ => Some((i, b)),
        })
        .map(|(i, b)| (i, b.clone()))
        .expect("at least one machine");
    let evaluations = machines.iter().map(GeneMachine::evals_used).sum();
    Ok(ParallelOutcome {
        best,
        global_best,
        global_best_machine,
        machines,
        evaluations,
        cycle_best,
    })
}
