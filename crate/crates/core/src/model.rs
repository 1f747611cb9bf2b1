//! Building blocks, chromosomes and the Fitness-List.
//!
//! A building block is a gene sitting at a given position. Its fitness is the
//! smallest (best) fitness of any chromosome it has been observed in. The
//! Fitness-List holds one entry per (gene, position) pair, `n²` in total, and
//! is the only state a machine carries between steps; chromosomes themselves
//! are never stored.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Index of a gene in `[0, n)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Gene(pub usize);

/// Zero-based position in a chromosome.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Position(pub usize);

impl fmt::Display for Gene {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Converts plain indices into a gene sequence.
pub fn genes(indices: &[usize]) -> Vec<Gene> {
    indices.iter().copied().map(Gene).collect()
}

/// Checks that `genes` is a permutation of `0..n`.
pub fn validate_permutation(genes: &[Gene], n: usize) -> Result<()> {
    if genes.len() != n {
        return Err(Error::InvalidChromosome(format!(
            "expected {n} genes, found {}",
            genes.len()
        )));
    }
    let mut seen = vec![false; n];
    for (pos, gene) in genes.iter().enumerate() {
        if gene.0 >= n {
            return Err(Error::InvalidChromosome(format!(
                "gene {} at position {pos} is out of range for n = {n}",
                gene.0
            )));
        }
        if std::mem::replace(&mut seen[gene.0], true) {
            return Err(Error::InvalidChromosome(format!(
                "gene {} appears more than once",
                gene.0
            )));
        }
    }
    Ok(())
}

/// A gene permutation together with its evaluated (inverse) fitness.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Chromosome {
    pub genes: Vec<Gene>,
    pub fitness: f64,
}

impl Chromosome {
    pub fn new(genes: Vec<Gene>, fitness: f64) -> Self {
        Chromosome { genes, fitness }
    }

    pub fn len(&self) -> usize {
        self.genes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.genes.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BuildingBlock {
    pub gene: Gene,
    pub position: Position,
    pub fitness: f64,
}

/// All blocks sharing one fitness value.
#[derive(Debug, Clone, PartialEq)]
pub struct Bucket {
    pub fitness: f64,
    /// Members in (gene, position) ascending order.
    pub blocks: Vec<BuildingBlock>,
}

impl Bucket {
    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn contains(&self, gene: Gene, position: Position) -> bool {
        self.blocks
            .iter()
            .any(|b| b.gene == gene && b.position == position)
    }
}

/// The ordered collection of all `n²` building blocks.
///
/// Entries are stored densely by (gene, position); the bucket ordering is
/// derived on demand by [`FitnessList::ordered_buckets`].
#[derive(Debug, Clone, PartialEq)]
pub struct FitnessList {
    n: usize,
    entries: Vec<Option<f64>>,
    len: usize,
}

impl FitnessList {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidSize("gene count must be at least 1".into()));
        }
        let capacity = n
            .checked_mul(n)
            .ok_or_else(|| Error::InvalidSize(format!("gene count {n} is too large")))?;
        Ok(FitnessList {
            n,
            entries: vec![None; capacity],
            len: 0,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of blocks present.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn capacity(&self) -> usize {
        self.entries.len()
    }

    /// True once every (gene, position) pair has an entry.
    pub fn is_seeded(&self) -> bool {
        self.len == self.entries.len()
    }

    #[inline]
    fn index(&self, gene: Gene, position: Position) -> usize {
        gene.0 * self.n + position.0
    }

    /// Stored fitness of a block, or `None` if it has not been observed.
    #[inline]
    pub fn get(&self, gene: Gene, position: Position) -> Option<f64> {
        if gene.0 >= self.n || position.0 >= self.n {
            return None;
        }
        self.entries[self.index(gene, position)]
    }

    pub fn fitness(&self, gene: Gene, position: Position) -> Result<f64> {
        self.get(gene, position).ok_or(Error::NotFound {
            gene: gene.0,
            position: position.0,
        })
    }

    /// Folds a chromosome into the list: every block it contains takes the
    /// minimum of its stored fitness and the chromosome's fitness. Blocks seen
    /// for the first time are inserted.
    pub fn record_observation(&mut self, chrom: &Chromosome) -> Result<()> {
        validate_permutation(&chrom.genes, self.n)?;
        if !chrom.fitness.is_finite() {
            return Err(Error::InvalidChromosome(format!(
                "fitness {} is not finite",
                chrom.fitness
            )));
        }
        for (pos, &gene) in chrom.genes.iter().enumerate() {
            let idx = self.index(gene, Position(pos));
            match &mut self.entries[idx] {
                Some(f) => {
                    if chrom.fitness < *f {
                        *f = chrom.fitness;
                    }
                }
                slot @ None => {
                    debug_assert!(self.len < self.n * self.n);
                    *slot = Some(chrom.fitness);
                    self.len += 1;
                }
            }
        }
        Ok(())
    }

    /// Present blocks in (gene, position) ascending order.
    pub fn blocks(&self) -> impl Iterator<Item = BuildingBlock> + '_ {
        self.entries.iter().enumerate().filter_map(move |(i, f)| {
            f.map(|fitness| BuildingBlock {
                gene: Gene(i / self.n),
                position: Position(i % self.n),
                fitness,
            })
        })
    }

    /// Blocks grouped by exactly equal fitness, best (smallest) first.
    pub fn ordered_buckets(&self) -> Vec<Bucket> {
        let mut blocks: Vec<BuildingBlock> = self.blocks().collect();
        // Stable sort keeps (gene, position) order inside each bucket.
        blocks.sort_by(|a, b| a.fitness.partial_cmp(&b.fitness).unwrap_or(Ordering::Equal));
        let mut buckets: Vec<Bucket> = Vec::new();
        for block in blocks {
            match buckets.last_mut() {
                Some(last) if last.fitness == block.fitness => last.blocks.push(block),
                _ => buckets.push(Bucket {
                    fitness: block.fitness,
                    blocks: vec![block],
                }),
            }
        }
        buckets
    }

    /// Elementwise minimum of `self` and `src`, written into `self`.
    pub fn merge_from(&mut self, src: &FitnessList) -> Result<()> {
        if self.n != src.n {
            return Err(Error::IncompatibleMachines(self.n, src.n));
        }
        if !self.is_seeded() || !src.is_seeded() {
            return Err(Error::InvalidState(
                "both Fitness-Lists must be seeded before merging".into(),
            ));
        }
        for (dst, &s) in self.entries.iter_mut().zip(&src.entries) {
            if let (Some(d), Some(s)) = (dst.as_mut(), s) {
                if s < *d {
                    *d = s;
                }
            }
        }
        Ok(())
    }

    pub fn to_canonical(&self) -> CanonicalList {
        CanonicalList {
            n: self.n,
            blocks: self.blocks().collect(),
        }
    }

    pub fn from_canonical(canonical: &CanonicalList) -> Result<Self> {
        let mut list = FitnessList::new(canonical.n)?;
        for block in &canonical.blocks {
            let (g, p) = (block.gene, block.position);
            if g.0 >= list.n || p.0 >= list.n {
                return Err(Error::InvalidArgument(format!(
                    "block ({g}, {p}) out of range for n = {}",
                    list.n
                )));
            }
            if !block.fitness.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "block ({g}, {p}) has non-finite fitness"
                )));
            }
            let idx = list.index(g, p);
            if list.entries[idx].replace(block.fitness).is_some() {
                return Err(Error::InvalidArgument(format!("duplicate block ({g}, {p})")));
            }
            list.len += 1;
        }
        Ok(list)
    }

    /// Canonical JSON: `n` followed by the blocks sorted by (gene, position).
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_canonical())?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let canonical: CanonicalList = serde_json::from_str(text)?;
        Self::from_canonical(&canonical)
    }
}

/// Serialized form of a [`FitnessList`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CanonicalList {
    pub n: usize,
    pub blocks: Vec<BuildingBlock>,
}
