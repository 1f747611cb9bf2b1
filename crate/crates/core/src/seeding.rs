//! Seeding phase: `n` chromosomes that together contain every
//! (gene, position) pair exactly once.
//!
//! The chromosomes form a cyclic Latin square. Row 0 is a uniformly random
//! permutation and row `k` is row 0 rotated right by `k`, so each gene visits
//! each position once across the `n` rows.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::engine::GeneMachine;
use crate::error::{Error, Result};
use crate::model::{validate_permutation, Chromosome, Gene};
use crate::problems::Problem;
use crate::trace::{self, Trace};

/// Cyclic rotations of `base`: row `k` is `base` rotated right by `k`.
pub fn latin_square_from_base(base: &[Gene]) -> Result<Vec<Vec<Gene>>> {
    let n = base.len();
    if n == 0 {
        return Err(Error::InvalidSize("gene count must be at least 1".into()));
    }
    validate_permutation(base, n)?;
    Ok((0..n)
        .map(|k| {
            let mut row = base.to_vec();
            row.rotate_right(k);
            row
        })
        .collect())
}

pub fn latin_square_chromosomes<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Vec<Vec<Gene>>> {
    if n == 0 {
        return Err(Error::InvalidSize("gene count must be at least 1".into()));
    }
    let mut base: Vec<Gene> = (0..n).map(Gene).collect();
    base.shuffle(rng);
    latin_square_from_base(&base)
}

/// Seeds an empty machine from a random Latin square. Costs `n` evaluations.
pub fn seed<P, R>(machine: &mut GeneMachine, problem: &P, rng: &mut R) -> Result<()>
where
    P: Problem + ?Sized,
    R: Rng + ?Sized,
{
    seed_traced(machine, problem, rng, None)
}

/// Seeds an empty machine from the rotations of a fixed base permutation.
pub fn seed_with_base<P>(machine: &mut GeneMachine, problem: &P, base: &[Gene]) -> Result<()>
where
    P: Problem + ?Sized,
{
    check_seedable(machine, problem)?;
    let rows = latin_square_from_base(base)?;
    seed_rows(machine, problem, rows, None)
}

pub(crate) fn seed_traced<P, R>(
    machine: &mut GeneMachine,
    problem: &P,
    rng: &mut R,
    trace: Option<&mut Trace>,
) -> Result<()>
where
    P: Problem + ?Sized,
    R: Rng + ?Sized,
{
    check_seedable(machine, problem)?;
    let rows = latin_square_chromosomes(machine.n(), rng)?;
    seed_rows(machine, problem, rows, trace)
}

fn check_seedable<P: Problem + ?Sized>(machine: &GeneMachine, problem: &P) -> Result<()> {
    if !machine.list().is_empty() {
        return Err(Error::InvalidState("machine is already seeded".into()));
    }
    if problem.n() != machine.n() {
        return Err(Error::InvalidArgument(format!(
            "problem has {} genes but machine has {}",
            problem.n(),
            machine.n()
        )));
    }
    Ok(())
}

fn seed_rows<P: Problem + ?Sized>(
    machine: &mut GeneMachine,
    problem: &P,
    rows: Vec<Vec<Gene>>,
    mut trace: Option<&mut Trace>,
) -> Result<()> {
    for genes in rows {
        let fitness = problem.evaluate(&genes)?;
        trace::record(&mut trace, fitness);
        machine.absorb(Chromosome::new(genes, fitness))?;
    }
    debug_assert!(machine.list().is_seeded());
    Ok(())
}
