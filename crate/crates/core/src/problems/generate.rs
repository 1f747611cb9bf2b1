use rand::Rng;

use crate::error::Result;

use super::ProblemInstance;

/// Assignment instance with integer costs drawn uniformly from `0..=max_cost`.
pub fn random_assignment<R: Rng + ?Sized>(n: usize, max_cost: u32, rng: &mut R) -> Result<ProblemInstance> {
    let rows = (0..n)
        .map(|_| (0..n).map(|_| f64::from(rng.gen_range(0..=max_cost))).collect())
        .collect();
    ProblemInstance::assignment(rows)
}

/// Open-path TSP over `n` points with integer coordinates in `0..=side`,
/// using TSPLIB-style rounded Euclidean distances.
pub fn random_euclidean_tsp<R: Rng + ?Sized>(n: usize, side: u32, rng: &mut R) -> Result<ProblemInstance> {
    let points: Vec<(f64, f64)> = (0..n)
        .map(|_| {
            (
                f64::from(rng.gen_range(0..=side)),
                f64::from(rng.gen_range(0..=side)),
            )
        })
        .collect();
    let rows = points
        .iter()
        .map(|&(xi, yi)| {
            points
                .iter()
                .map(|&(xj, yj)| ((xi - xj).hypot(yi - yj) + 0.5).floor())
                .collect()
        })
        .collect();
    ProblemInstance::open_path_tsp(rows)
}
