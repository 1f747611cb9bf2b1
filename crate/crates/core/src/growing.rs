//! Growing phase: rank-biased block selection and chromosome construction.
//!
//! At each position the candidate genes are ranked densely by the stored
//! fitness of their (gene, position) block, ties sharing a rank. A candidate
//! of rank `r` out of a maximum rank `R` is drawn with weight
//! `exp(-beta * r / R)`, so `beta = 0` is uniform and large `beta` is greedy.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::engine::GeneMachine;
use crate::error::{Error, Result};
use crate::model::{Chromosome, FitnessList, Gene, Position};
use crate::problems::Problem;
use crate::trace::{self, Trace};

/// Linear ramp of the selection pressure from `beta0` to `beta1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PressureSchedule {
    beta0: f64,
    beta1: f64,
}

impl PressureSchedule {
    pub fn new(beta0: f64, beta1: f64) -> Result<Self> {
        if !beta0.is_finite() || !beta1.is_finite() || beta0 < 0.0 || beta1 < beta0 {
            return Err(Error::InvalidArgument(format!(
                "pressure schedule needs 0 <= beta0 <= beta1, both finite (got {beta0}, {beta1})"
            )));
        }
        Ok(PressureSchedule { beta0, beta1 })
    }

    pub fn beta0(&self) -> f64 {
        self.beta0
    }

    pub fn beta1(&self) -> f64 {
        self.beta1
    }

    pub fn at(&self, elapsed_fraction: f64) -> Result<f64> {
        pressure(elapsed_fraction, self)
    }
}

impl Default for PressureSchedule {
    fn default() -> Self {
        PressureSchedule { beta0: 1.0, beta1: 8.0 }
    }
}

pub fn pressure(elapsed_fraction: f64, sched: &PressureSchedule) -> Result<f64> {
    if !(0.0..=1.0).contains(&elapsed_fraction) {
        return Err(Error::Domain(format!(
            "elapsed fraction {elapsed_fraction} outside [0, 1]"
        )));
    }
    Ok(sched.beta0 + (sched.beta1 - sched.beta0) * elapsed_fraction)
}

fn check_beta(beta: f64) -> Result<()> {
    if beta.is_finite() && beta >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("beta {beta} must be finite and non-negative")))
    }
}

/// Unnormalized selection weights for `available` at `position`, in the
/// same order as `available`.
pub(crate) fn selection_weights(
    list: &FitnessList,
    position: Position,
    available: &[Gene],
    beta: f64,
) -> Result<Vec<f64>> {
    let fitness = available
        .iter()
        .map(|&g| list.fitness(g, position))
        .collect::<Result<Vec<f64>>>()?;
    let mut levels = fitness.clone();
    levels.sort_by(f64::total_cmp);
    levels.dedup();
    let max_rank = (levels.len() - 1) as f64;
    Ok(fitness
        .iter()
        .map(|f| {
            if max_rank == 0.0 {
                return 1.0;
            }
            let rank = levels.partition_point(|l| l < f) as f64;
            (-beta * rank / max_rank).exp()
        })
        .collect())
}

/// Draws one gene for `position` from the `available` genes.
pub fn select_gene<R: Rng + ?Sized>(
    list: &FitnessList,
    position: Position,
    available: &[Gene],
    beta: f64,
    rng: &mut R,
) -> Result<Gene> {
    check_beta(beta)?;
    match available {
        [] => Err(Error::InvalidArgument("no candidate genes available".into())),
        [only] => {
            list.fitness(*only, position)?;
            Ok(*only)
        }
        _ => {
            let weights = selection_weights(list, position, available, beta)?;
            let total: f64 = weights.iter().sum();
            let mut target = rng.gen::<f64>() * total;
            for (gene, w) in available.iter().zip(&weights) {
                if target < *w {
                    return Ok(*gene);
                }
                target -= w;
            }
            // Rounding can leave `target` marginally above the last weight.
            Ok(*available.last().expect("non-empty"))
        }
    }
}

/// Builds a permutation by visiting positions in random order and drawing a
/// still-unused gene at each one.
pub fn construct_chromosome<R: Rng + ?Sized>(
    list: &FitnessList,
    beta: f64,
    rng: &mut R,
) -> Result<Vec<Gene>> {
    if !list.is_seeded() {
        return Err(Error::InvalidState("Fitness-List is not seeded".into()));
    }
    check_beta(beta)?;
    let n = list.n();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut available: Vec<Gene> = (0..n).map(Gene).collect();
    let mut genes = vec![Gene(0); n];
    for p in order {
        let gene = select_gene(list, Position(p), &available, beta, rng)?;
        available.retain(|&g| g != gene);
        genes[p] = gene;
    }
    Ok(genes)
}

/// One growing iteration: construct, evaluate, record, keep the best.
pub fn grow_step<P, R>(machine: &mut GeneMachine, problem: &P, beta: f64, rng: &mut R) -> Result<()>
where
    P: Problem + ?Sized,
    R: Rng + ?Sized,
{
    grow_step_traced(machine, problem, beta, rng, None)
}

pub(crate) fn grow_step_traced<P, R>(
    machine: &mut GeneMachine,
    problem: &P,
    beta: f64,
    rng: &mut R,
    mut trace: Option<&mut Trace>,
) -> Result<()>
where
    P: Problem + ?Sized,
    R: Rng + ?Sized,
{
    if !machine.list().is_seeded() {
        return Err(Error::InvalidState("machine is not seeded".into()));
    }
    let genes = construct_chromosome(machine.list(), beta, rng)?;
    let fitness = problem.evaluate(&genes)?;
    trace::record(&mut trace, fitness);
    machine.absorb(Chromosome::new(genes, fitness))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::genes;
    use crate::problems::ProblemInstance;
    use crate::seeding::seed_with_base;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn list_from(n: usize, cells: &[(usize, usize, f64)]) -> FitnessList {
        let blocks = cells
            .iter()
            .map(|&(g, p, f)| crate::model::BuildingBlock {
                gene: Gene(g),
                position: Position(p),
                fitness: f,
            })
            .collect();
        FitnessList::from_canonical(&crate::model::CanonicalList { n, blocks }).unwrap()
    }

    #[test]
    fn pressure_ramp_endpoints() {
        let s = PressureSchedule::new(1.0, 8.0).unwrap();
        assert_eq!(pressure(0.0, &s).unwrap(), 1.0);
        assert_eq!(pressure(1.0, &s).unwrap(), 8.0);
        assert_eq!(pressure(0.5, &s).unwrap(), 4.5);
        assert!(matches!(pressure(1.5, &s), Err(Error::Domain(_))));
        assert!(matches!(pressure(-0.1, &s), Err(Error::Domain(_))));
        assert!(PressureSchedule::new(2.0, 1.0).is_err());
        assert!(PressureSchedule::new(-1.0, 1.0).is_err());
        assert_eq!(PressureSchedule::default(), s);
    }

    #[test]
    fn dense_rank_weights() {
        let list = list_from(3, &[(0, 0, 3.0), (1, 0, 5.0), (2, 0, 3.0)]);
        let w = selection_weights(&list, Position(0), &genes(&[0, 1, 2]), 2.0).unwrap();
        assert_eq!(w, vec![1.0, (-2.0f64).exp(), 1.0]);
        let flat = list_from(2, &[(0, 0, 7.0), (1, 0, 7.0)]);
        assert_eq!(selection_weights(&flat, Position(0), &genes(&[0, 1]), 9.0).unwrap(), vec![1.0, 1.0]);
    }

    #[test]
    fn select_gene_edge_cases() {
        let list = list_from(2, &[(0, 0, 3.0), (1, 0, 5.0)]);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert_eq!(select_gene(&list, Position(0), &genes(&[1]), 4.0, &mut rng).unwrap(), Gene(1));
        assert!(matches!(
            select_gene(&list, Position(0), &[], 1.0, &mut rng),
            Err(Error::InvalidArgument(_))
        ));
        assert!(matches!(
            select_gene(&list, Position(1), &genes(&[0, 1]), 1.0, &mut rng),
            Err(Error::NotFound { .. })
        ));
        assert!(select_gene(&list, Position(0), &genes(&[0, 1]), f64::NAN, &mut rng).is_err());
    }

    #[test]
    fn two_candidates_at_ln4_split_eighty_twenty() {
        let list = list_from(2, &[(0, 0, 3.0), (1, 0, 5.0)]);
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let draws = 100_000;
        let hits = (0..draws)
            .filter(|_| {
                select_gene(&list, Position(0), &genes(&[0, 1]), 4f64.ln(), &mut rng).unwrap() == Gene(0)
            })
            .count();
        let freq = hits as f64 / draws as f64;
        assert!((freq - 0.8).abs() <= 0.01, "frequency {freq}");
    }

    #[test]
    fn construction_requires_seeded_list() {
        let list = FitnessList::new(3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(matches!(construct_chromosome(&list, 1.0, &mut rng), Err(Error::InvalidState(_))));
    }

    #[test]
    fn construction_single_gene() {
        let list = list_from(1, &[(0, 0, 0.0)]);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(construct_chromosome(&list, 3.0, &mut rng).unwrap(), genes(&[0]));
    }

    #[test]
    fn grow_step_from_seeded_state_can_reach_grown_state() {
        let example = ProblemInstance::four_city_line();
        let mut machine = GeneMachine::new(4).unwrap();
        seed_with_base(&mut machine, &example, &genes(&[0, 2, 3, 1])).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut previous = machine.best().unwrap().fitness;
        for _ in 0..200 {
            grow_step(&mut machine, &example, 4.0, &mut rng).unwrap();
            let now = machine.best().unwrap().fitness;
            assert!(now <= previous);
            previous = now;
        }
        assert_eq!(previous, 3.0);
        assert_eq!(machine.evals_used(), 204);
    }
}
