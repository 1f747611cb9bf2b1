//! The four-city worked example, replayed step by step.
//!
//! Seeding from base `A C D B` yields the chromosomes `ACDB`, `BACD`, `DBAC`,
//! `CDBA` with open-path lengths 5, 4, 5, 4. Their blocks form a two-bucket
//! list; observing `A B C D` (length 3) then opens a new top bucket.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use crate::engine::GeneMachine;
use crate::error::Result;
use crate::model::{genes, Bucket, Chromosome, FitnessList, Gene, Position};
use crate::notation::{bucket_table, parse_block_label, permutation_label};
use crate::problems::{Problem, ProblemInstance};
use crate::seeding::{latin_square_from_base, seed_with_base};

/// Reference bucket tables, written in block notation.
pub const SEEDED_BUCKETS: &[(f64, &str)] = &[
    (4.0, "B1 A2 C3 D4 C1 D2 B3 A4"),
    (5.0, "A1 C2 D3 B4 D1 B2 A3 C4"),
];

pub const GROWN_BUCKETS: &[(f64, &str)] = &[
    (3.0, "C3 A1 B2 D4"),
    (4.0, "B1 A2 C1 D2 B3 A4"),
    (5.0, "C2 D3 B4 D1 A3 C4"),
];

pub const SEED_BASE: [usize; 4] = [0, 2, 3, 1];
pub const SEED_FITNESS: [f64; 4] = [5.0, 4.0, 5.0, 4.0];
pub const OPTIMUM: [usize; 4] = [0, 1, 2, 3];

type BucketSets = Vec<(f64, BTreeSet<(Gene, Position)>)>;

fn expected(table: &[(f64, &str)]) -> BucketSets {
    table
        .iter()
        .map(|(f, labels)| {
            let set = labels
                .split_whitespace()
                .map(|l| parse_block_label(l).expect("reference labels are well formed"))
                .collect();
            (*f, set)
        })
        .collect()
}

fn as_sets(buckets: &[Bucket]) -> BucketSets {
    buckets
        .iter()
        .map(|b| (b.fitness, b.blocks.iter().map(|x| (x.gene, x.position)).collect()))
        .collect()
}

#[derive(Debug, Clone)]
pub struct WorkedExample {
    pub seed_chromosomes: Vec<Chromosome>,
    pub seeded_list: FitnessList,
    pub grown_chromosome: Chromosome,
    pub grown_list: FitnessList,
    pub seed_fitness_matches: bool,
    pub seeded_matches: bool,
    pub grown_matches: bool,
}

impl WorkedExample {
    pub fn all_match(&self) -> bool {
        self.seed_fitness_matches && self.seeded_matches && self.grown_matches
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let verdict = |ok: bool| if ok { "match" } else { "MISMATCH" };
        out.push_str("Seeding chromosomes:\n");
        for (i, c) in self.seed_chromosomes.iter().enumerate() {
            let _ = writeln!(out, "  Chromosome {} = {}  fitness value = {}", i + 1, permutation_label(&c.genes), c.fitness);
        }
        let _ = writeln!(out, "Seed fitness values: {}", verdict(self.seed_fitness_matches));
        let _ = writeln!(out, "\nFitness-List after seeding (reference: {}):", verdict(self.seeded_matches));
        out.push_str(&bucket_table(&self.seeded_list.ordered_buckets()));
        let _ = writeln!(
            out,
            "\nObserve {} with fitness value {}.\nFitness-List after growing (reference: {}):",
            permutation_label(&self.grown_chromosome.genes),
            self.grown_chromosome.fitness,
            verdict(self.grown_matches)
        );
        out.push_str(&bucket_table(&self.grown_list.ordered_buckets()));
        out
    }
}

/// Seeds from the fixed base, observes the optimum, and checks both bucket
/// tables against the reference tables.
pub fn run_worked_example() -> Result<WorkedExample> {
    let problem = ProblemInstance::four_city_line();
    let base = genes(&SEED_BASE);
    let seed_chromosomes = latin_square_from_base(&base)?
        .into_iter()
        .map(|g| Ok(Chromosome::new(g.clone(), problem.evaluate(&g)?)))
        .collect::<Result<Vec<_>>>()?;
    let seed_fitness_matches = seed_chromosomes.iter().map(|c| c.fitness).eq(SEED_FITNESS);

    let mut machine = GeneMachine::new(problem.n())?;
    seed_with_base(&mut machine, &problem, &base)?;
    let seeded_list = machine.list().clone();
    let seeded_matches = as_sets(&seeded_list.ordered_buckets()) == expected(SEEDED_BUCKETS);

    let optimum = genes(&OPTIMUM);
    let grown_chromosome = Chromosome::new(optimum.clone(), problem.evaluate(&optimum)?);
    let mut grown_list = seeded_list.clone();
    grown_list.record_observation(&grown_chromosome)?;
    let grown_matches = as_sets(&grown_list.ordered_buckets()) == expected(GROWN_BUCKETS);

    Ok(WorkedExample {
        seed_chromosomes,
        seeded_list,
        grown_chromosome,
        grown_list,
        seed_fitness_matches,
        seeded_matches,
        grown_matches,
    })
}
