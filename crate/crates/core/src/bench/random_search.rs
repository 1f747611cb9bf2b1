use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::model::{Chromosome, Gene};
use crate::problems::Problem;
use crate::trace::{self, Trace};

/// Best of `budget` uniformly random permutations.
pub fn random_search_baseline<P, R>(problem: &P, budget: u64, rng: &mut R) -> Result<Chromosome>
where
    P: Problem + ?Sized,
    R: Rng + ?Sized,
{
    random_search_traced(problem, budget, rng, None)
}

pub fn random_search_traced<P, R>(
    problem: &P,
    budget: u64,
    rng: &mut R,
    mut trace: Option<&mut Trace>,
) -> Result<Chromosome>
where
    P: Problem + ?Sized,
    R: Rng + ?Sized,
{
    if budget == 0 {
        return Err(Error::BudgetTooSmall("random search needs at least one evaluation".into()));
    }
    let mut genes: Vec<Gene> = (0..problem.n()).map(Gene).collect();
    let mut best: Option<Chromosome> = None;
    for _ in 0..budget {
        genes.shuffle(rng);
        let fitness = problem.evaluate(&genes)?;
        trace::record(&mut trace, fitness);
        if best.as_ref().is_none_or(|b| fitness < b.fitness) {
            best = Some(Chromosome::new(genes.clone(), fitness));
        }
    }
    if let Some(t) = trace {
        t.finish();
    }
    Ok(best.expect("budget is positive"))
}
