//! Generational permutation GA used as the comparison baseline:
//! tournament selection, order crossover (OX1), swap mutation and elitism.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{validate_permutation, Chromosome, Gene};
use crate::problems::Problem;
use crate::trace::{self, Trace};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaParams {
    pub population_size: usize,
    pub tournament_k: usize,
    pub crossover_rate: f64,
    /// Probability that an offspring receives one swap mutation.
    pub mutation_rate: f64,
    pub elitism: usize,
}

impl Default for GaParams {
    fn default() -> Self {
        GaParams {
            population_size: 50,
            tournament_k: 3,
            crossover_rate: 0.9,
            mutation_rate: 0.2,
            elitism: 1,
        }
    }
}

impl GaParams {
    pub fn validate(&self) -> Result<()> {
        if self.population_size < 2 {
            return Err(Error::Config("population size must be at least 2".into()));
        }
        if self.tournament_k == 0 {
            return Err(Error::Config("tournament size must be at least 1".into()));
        }
        for (name, rate) in [("crossover", self.crossover_rate), ("mutation", self.mutation_rate)] {
            if !(0.0..=1.0).contains(&rate) {
                return Err(Error::Config(format!("{name} rate {rate} outside [0, 1]")));
            }
        }
        if self.elitism >= self.population_size {
            return Err(Error::Config("elitism must be smaller than the population".into()));
        }
        Ok(())
    }
}

/// OX1: keep `p1[cut1..cut2)` in place, then fill the remaining slots from
/// `cut2` onwards (wrapping) with `p2`'s genes read from `cut2` onwards
/// (wrapping), skipping genes already placed.
pub fn order_crossover(p1: &[Gene], p2: &[Gene], cut1: usize, cut2: usize) -> Result<Vec<Gene>> {
    let n = p1.len();
    if p2.len() != n {
        return Err(Error::InvalidArgument(format!(
            "parent lengths differ ({n} vs {})",
            p2.len()
        )));
    }
    if cut1 >= cut2 || cut2 > n {
        return Err(Error::InvalidArgument(format!(
            "cuts must satisfy 0 <= cut1 < cut2 <= n (got {cut1}, {cut2}, n = {n})"
        )));
    }
    validate_permutation(p1, n)?;
    validate_permutation(p2, n)?;

    let mut child = vec![Gene(0); n];
    let mut placed = vec![false; n];
    for i in cut1..cut2 {
        child[i] = p1[i];
        placed[p1[i].0] = true;
    }
    let mut slot = cut2 % n;
    for k in 0..n {
        let gene = p2[(cut2 + k) % n];
        if placed[gene.0] {
            continue;
        }
        child[slot] = gene;
        placed[gene.0] = true;
        slot = (slot + 1) % n;
        if slot == cut1 {
            slot = cut2 % n;
        }
    }
    Ok(child)
}

pub fn swap_mutation(perm: &[Gene], i: usize, j: usize) -> Result<Vec<Gene>> {
    if i >= perm.len() || j >= perm.len() {
        return Err(Error::InvalidArgument(format!(
            "swap indices ({i}, {j}) out of range for length {}",
            perm.len()
        )));
    }
    let mut out = perm.to_vec();
    out.swap(i, j);
    Ok(out)
}

/// Draws `k` members with replacement and returns the fittest; ties go to
/// the earliest draw.
pub fn tournament_select<'a, R: Rng + ?Sized>(
    population: &'a [Chromosome],
    k: usize,
    rng: &mut R,
) -> Result<&'a Chromosome> {
    if population.is_empty() {
        return Err(Error::InvalidArgument("empty population".into()));
    }
    if k == 0 {
        return Err(Error::InvalidArgument("tournament size must be at least 1".into()));
    }
    let mut winner = &population[rng.gen_range(0..population.len())];
    for _ in 1..k {
        let challenger = &population[rng.gen_range(0..population.len())];
        if challenger.fitness < winner.fitness {
            winner = challenger;
        }
    }
    Ok(winner)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaOutcome {
    pub best: Chromosome,
    pub evaluations: u64,
    /// Best fitness inside each population, the initial one first. The last
    /// entry may describe a partial generation cut short by the budget.
    pub generation_best: Vec<f64>,
    /// Distinct (gene, position) pairs present in each population.
    pub block_coverage: Vec<usize>,
}

pub fn run_ga<P, R>(problem: &P, params: &GaParams, budget: u64, rng: &mut R) -> Result<GaOutcome>
where
    P: Problem + ?Sized,
    R: Rng + ?Sized,
{
    run_ga_traced(problem, params, budget, rng, None)
}

pub fn run_ga_traced<P, R>(
    problem: &P,
    params: &GaParams,
    budget: u64,
    rng: &mut R,
    mut trace: Option<&mut Trace>,
) -> Result<GaOutcome>
where
    P: Problem + ?Sized,
    R: Rng + ?Sized,
{
    params.validate()?;
    if budget < params.population_size as u64 {
        return Err(Error::BudgetTooSmall(format!(
            "budget {budget} is below the population size {}",
            params.population_size
        )));
    }
    let n = problem.n();
    let mut evaluations = 0u64;
    let mut evaluate = |genes: Vec<Gene>, evaluations: &mut u64| -> Result<Chromosome> {
        let fitness = problem.evaluate(&genes)?;
        *evaluations += 1;
        trace::record(&mut trace, fitness);
        Ok(Chromosome::new(genes, fitness))
    };

    let mut population = Vec::with_capacity(params.population_size);
    for _ in 0..params.population_size {
        let mut genes: Vec<Gene> = (0..n).map(Gene).collect();
        genes.shuffle(rng);
        population.push(evaluate(genes, &mut evaluations)?);
    }
    let mut best = fittest(&population).clone();
    let mut generation_best = vec![best.fitness];
    let mut block_coverage = vec![coverage(&population, n)];

    while evaluations < budget {
        let mut ranked: Vec<&Chromosome> = population.iter().collect();
        ranked.sort_by(|a, b| a.fitness.total_cmp(&b.fitness));
        let mut next: Vec<Chromosome> = ranked[..params.elitism].iter().map(|c| (*c).clone()).collect();

        while next.len() < params.population_size && evaluations < budget {
            let first = tournament_select(&population, params.tournament_k, rng)?;
            let mut genes = if rng.gen::<f64>() < params.crossover_rate {
                let second = tournament_select(&population, params.tournament_k, rng)?;
                let cut1 = rng.gen_range(0..n);
                let cut2 = rng.gen_range(cut1 + 1..=n);
                order_crossover(&first.genes, &second.genes, cut1, cut2)?
            } else {
                first.genes.clone()
            };
            if rng.gen::<f64>() < params.mutation_rate {
                let (i, j) = (rng.gen_range(0..n), rng.gen_range(0..n));
                genes = swap_mutation(&genes, i, j)?;
            }
            let child = evaluate(genes, &mut evaluations)?;
            if child.fitness < best.fitness {
                best = child.clone();
            }
            next.push(child);
        }

        population = next;
        generation_best.push(fittest(&population).fitness);
        block_coverage.push(coverage(&population, n));
    }
    if let Some(t) = trace {
        t.finish();
    }

    Ok(GaOutcome {
        best,
        evaluations,
        generation_best,
        block_coverage,
    })
}

fn fittest(population: &[Chromosome]) -> &Chromosome {
    population
        .iter()
        .reduce(|a, b| if b.fitness < a.fitness { b } else { a })
        .expect("non-empty population")
}

fn coverage(population: &[Chromosome], n: usize) -> usize {
    let mut seen = vec![false; n * n];
    for c in population {
        for (p, g) in c.genes.iter().enumerate() {
            seen[g.0 * n + p] = true;
        }
    }
    seen.iter().filter(|&&s| s).count()
}
