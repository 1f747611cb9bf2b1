//! Permutation problems: the open-path travelling salesman, the linear
//! assignment problem, instance parsers and an exhaustive oracle.

mod generate;
mod parse;

use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{validate_permutation, Gene};

pub use generate::{random_assignment, random_euclidean_tsp};
pub use parse::{parse_assignment_matrix, parse_distance_matrix, parse_tsplib_euc2d};

/// Anything that maps a permutation of `n` genes to an inverse fitness.
pub trait Problem: Sync {
    fn n(&self) -> usize;

    fn evaluate(&self, genes: &[Gene]) -> Result<f64>;
}

impl<P: Problem + ?Sized> Problem for &P {
    fn n(&self) -> usize {
        (**self).n()
    }

    fn evaluate(&self, genes: &[Gene]) -> Result<f64> {
        (**self).evaluate(genes)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProblemKind {
    /// Travelling salesman without the closing edge.
    OpenPathTsp,
    /// Gene `g` at position `p` costs `c[g][p]`.
    Assignment,
}

impl ProblemKind {
    pub fn name(self) -> &'static str {
        match self {
            ProblemKind::OpenPathTsp => "open-path-tsp",
            ProblemKind::Assignment => "assignment",
        }
    }
}

/// An `n × n` matrix problem. Immutable once built.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemInstance {
    kind: ProblemKind,
    n: usize,
    data: Vec<f64>,
}

impl ProblemInstance {
    /// Builds an open-path TSP instance. The matrix must be square,
    /// symmetric, non-negative and finite with a zero diagonal.
    pub fn open_path_tsp(rows: Vec<Vec<f64>>) -> Result<Self> {
        let (n, data) = flatten(rows)?;
        for i in 0..n {
            for j in 0..n {
                let v = data[i * n + j];
                check_cell(v, i, j)?;
                if i == j && v != 0.0 {
                    return Err(Error::InvalidArgument(format!(
                        "diagonal entry ({i}, {i}) is {v}, expected 0"
                    )));
                }
                if v != data[j * n + i] {
                    return Err(Error::InvalidArgument(format!(
                        "matrix is not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        Ok(ProblemInstance {
            kind: ProblemKind::OpenPathTsp,
            n,
            data,
        })
    }

    /// Builds an assignment instance with `rows[g][p]` the cost of gene `g`
    /// at position `p`.
    pub fn assignment(rows: Vec<Vec<f64>>) -> Result<Self> {
        let (n, data) = flatten(rows)?;
        for (idx, &v) in data.iter().enumerate() {
            check_cell(v, idx / n, idx % n)?;
        }
        Ok(ProblemInstance {
            kind: ProblemKind::Assignment,
            n,
            data,
        })
    }

    /// The four-city open path used as the running example: A-B-C-D on a
    /// line with unit spacing.
    pub fn four_city_line() -> Self {
        ProblemInstance::open_path_tsp(vec![
            vec![0.0, 1.0, 2.0, 3.0],
            vec![1.0, 0.0, 1.0, 2.0],
            vec![2.0, 1.0, 0.0, 1.0],
            vec![3.0, 2.0, 1.0, 0.0],
        ])
        .expect("built-in instance is valid")
    }

    pub fn kind(&self) -> ProblemKind {
        self.kind
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.n).map(<[f64]>::to_vec).collect()
    }

    pub fn evaluate_open_path_tsp(&self, perm: &[Gene]) -> Result<f64> {
        self.expect_kind(ProblemKind::OpenPathTsp)?;
        validate_permutation(perm, self.n)?;
        Ok(perm
            .windows(2)
            .map(|w| self.at(w[0].0, w[1].0))
            .sum())
    }

    pub fn evaluate_assignment(&self, perm: &[Gene]) -> Result<f64> {
        self.expect_kind(ProblemKind::Assignment)?;
        validate_permutation(perm, self.n)?;
        Ok(perm
            .iter()
            .enumerate()
            .map(|(p, g)| self.at(g.0, p))
            .sum())
    }

    fn expect_kind(&self, expected: ProblemKind) -> Result<()> {
        if self.kind == expected {
            Ok(())
        } else {
            Err(Error::WrongKind {
                expected: expected.name(),
                found: self.kind.name(),
            })
        }
    }

    /// Plain-text grid form accepted by [`parse_distance_matrix`] and
    /// [`parse_assignment_matrix`].
    pub fn to_matrix_text(&self) -> String {
        let mut out = format!("{}\n", self.n);
        for row in self.data.chunks(self.n) {
            let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            out.push_str(&cells.join(" "));
            out.push('\n');
        }
        out
    }
}

impl Problem for ProblemInstance {
    fn n(&self) -> usize {
        self.n
    }

    fn evaluate(&self, genes: &[Gene]) -> Result<f64> {
        match self.kind {
            ProblemKind::OpenPathTsp => self.evaluate_open_path_tsp(genes),
            ProblemKind::Assignment => self.evaluate_assignment(genes),
        }
    }
}

fn flatten(rows: Vec<Vec<f64>>) -> Result<(usize, Vec<f64>)> {
    let n = rows.len();
    if n == 0 {
        return Err(Error::InvalidSize("matrix must have at least one row".into()));
    }
    let mut data = Vec::with_capacity(n * n);
    for (i, row) in rows.into_iter().enumerate() {
        if row.len() != n {
            return Err(Error::InvalidArgument(format!(
                "row {i} has {} entries, expected {n}",
                row.len()
            )));
        }
        data.extend(row);
    }
    Ok((n, data))
}

fn check_cell(v: f64, i: usize, j: usize) -> Result<()> {
    if !v.is_finite() || v < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "entry ({i}, {j}) = {v} must be finite and non-negative"
        )));
    }
    Ok(())
}

/// Wraps a problem and counts every evaluation made through it.
#[derive(Debug)]
pub struct CountingProblem<P> {
    inner: P,
    count: AtomicU64,
}

impl<P: Problem> CountingProblem<P> {
    pub fn new(inner: P) -> Self {
        CountingProblem {
            inner,
            count: AtomicU64::new(0),
        }
    }

    pub fn count(&self) -> u64 {
        self.count.load(Ordering::Relaxed)
    }

    pub fn into_inner(self) -> P {
        self.inner
    }
}

impl<P: Problem> Problem for CountingProblem<P> {
    fn n(&self) -> usize {
        self.inner.n()
    }

    fn evaluate(&self, genes: &[Gene]) -> Result<f64> {
        self.count.fetch_add(1, Ordering::Relaxed);
        self.inner.evaluate(genes)
    }
}

/// Largest `n` accepted by [`brute_force_optimum`].
pub const BRUTE_FORCE_MAX_N: usize = 10;

/// Exhaustive minimum over all `n!` permutations. Ties resolve to the
/// lexicographically smallest permutation.
pub fn brute_force_optimum<P: Problem + ?Sized>(problem: &P) -> Result<(f64, Vec<Gene>)> {
    let n = problem.n();
    if n > BRUTE_FORCE_MAX_N {
        return Err(Error::TooLarge {
            n,
            max: BRUTE_FORCE_MAX_N,
        });
    }
    let mut perm: Vec<Gene> = (0..n).map(Gene).collect();
    let mut best = (problem.evaluate(&perm)?, perm.clone());
    while next_permutation(&mut perm) {
        let f = problem.evaluate(&perm)?;
        if f < best.0 {
            best = (f, perm.clone());
        }
    }
    Ok(best)
}

/// Advances to the next permutation in lexicographic order; false after the last.
fn next_permutation<T: Ord>(v: &mut [T]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let mut i = v.len() - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = v.len() - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}
