//! One-way clustering of the rows of a matrix: an exhaustive solver that is
//! optimal for the row cost, and a Lloyd-style local search for inputs too
//! large to enumerate.

use rayon::prelude::*;
use serde::Serialize;

use crate::cost::{dissimilarity_in_place, lower_median, oneway_row_cost, Norm};
use crate::error::{Error, Result};
use crate::matrix::DataMatrix;
use crate::partition::{enumerate_partitions, Partition, MAX_ENUMERATION_ITEMS};
use crate::rng::Xorshift64Star;

/// Costs closer than this are ties; the earlier candidate wins.
pub(crate) const TIE_TOL: f64 = 1e-12;

pub const LLOYD_MAX_ITERATIONS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum SolverMode {
    Exact,
    Heuristic { restarts: usize, seed: u64 },
}

impl SolverMode {
    pub fn is_exact(&self) -> bool {
        matches!(self, SolverMode::Exact)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OnewaySolution {
    pub partition: Partition,
    /// Row cost of `partition`.
    pub cost: f64,
    pub mode: SolverMode,
    /// Lloyd iterations of the winning restart; 0 in exact mode.
    pub iterations: usize,
}

/// Row cost of a canonical label vector with `n_clusters` labels, reusing
/// `buf` between calls.
fn labelled_row_cost(
    x: &DataMatrix,
    labels: &[usize],
    n_clusters: usize,
    norm: Norm,
    buf: &mut Vec<f64>,
) -> f64 {
    let mut total = 0.0;
    for label in 0..n_clusters {
        for j in 0..x.n_cols() {
            buf.clear();
            buf.extend(
                labels
                    .iter()
                    .enumerate()
                    .filter(|&(_, &l)| l == label)
                    .map(|(i, _)| x.get(i, j)),
            );
            total += dissimilarity_in_place(buf, norm);
        }
    }
    total
}

fn check_k(k: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::InvalidArgument("cluster count must be >= 1".into()));
    }
    Ok(())
}

/// Optimal clustering of the rows of `x` into at most `k` clusters, by
/// exhausting every partition. Ties go to the first partition in canonical
/// order. A `k` above the row count means "at most one cluster per row".
pub fn exact_kcluster(x: &DataMatrix, k: usize, norm: Norm) -> Result<OnewaySolution> {
    check_k(k)?;
    let n = x.n_rows();
    let k = k.min(n);
    let solution = |partition: Partition| -> Result<OnewaySolution> {
        Ok(OnewaySolution {
            cost: oneway_row_cost(x, &partition, norm)?,
            partition,
            mode: SolverMode::Exact,
            iterations: 0,
        })
    };
    // Both of these are optimal without search; only they are allowed
    // past the enumeration cap.
    if k == 1 {
        return solution(Partition::single_cluster(n));
    }
    if n > MAX_ENUMERATION_ITEMS && k == n {
        return solution(Partition::singletons(n));
    }

    let mut buf = Vec::with_capacity(n);
    let mut best: Option<(f64, Partition)> = None;
    for p in enumerate_partitions(n, k)? {
        let cost = labelled_row_cost(x, p.assignment(), p.num_clusters(), norm, &mut buf);
        if best.as_ref().is_none_or(|(b, _)| cost < b - TIE_TOL) {
            best = Some((cost, p));
        }
    }
    let (_, partition) = best.expect("at least one partition");
    solution(partition)
}

fn distance(a: &[f64], b: &[f64], norm: Norm) -> f64 {
    match norm {
        Norm::L1 => a.iter().zip(b).map(|(p, q)| (p - q).abs()).sum(),
        Norm::L2 => a.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum(),
    }
}

/// Index of the nearest center; ties go to the lowest index.
fn nearest(point: &[f64], centers: &[Vec<f64>], norm: Norm) -> (usize, f64) {
    let mut best = (0, distance(point, &centers[0], norm));
    for (c, center) in centers.iter().enumerate().skip(1) {
        let d = distance(point, center, norm);
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

/// One restart of the local search.
#[derive(Debug, Clone)]
pub struct LloydRun {
    pub partition: Partition,
    /// Sum of point-to-center distances after every assignment, repair and
    /// center-update step. Non-increasing.
    pub objective_trace: Vec<f64>,
    pub iterations: usize,
}

fn seed_centers(x: &DataMatrix, k: usize, norm: Norm, rng: &mut Xorshift64Star) -> Vec<Vec<f64>> {
    let n = x.n_rows();
    let mut centers = vec![x.row(rng.next_below(n)).to_vec()];
    let mut weights: Vec<f64> = (0..n)
        .map(|i| distance(x.row(i), &centers[0], norm))
        .collect();
    while centers.len() < k {
        let total: f64 = weights.iter().sum();
        let pick = if total > 0.0 {
            let target = rng.next_f64() * total;
            let mut acc = 0.0;
            let mut chosen = None;
            for (i, &w) in weights.iter().enumerate() {
                acc += w;
                if w > 0.0 && acc > target {
                    chosen = Some(i);
                    break;
                }
            }
            // Rounding can leave target just above the final sum.
            chosen.unwrap_or_else(|| weights.iter().rposition(|&w| w > 0.0).unwrap())
        } else {
            rng.next_below(n)
        };
        let center = x.row(pick).to_vec();
        for (i, w) in weights.iter_mut().enumerate() {
            *w = w.min(distance(x.row(i), &center, norm));
        }
        centers.push(center);
    }
    centers
}

fn update_centers(
    x: &DataMatrix,
    labels: &[usize],
    centers: &mut [Vec<f64>],
    norm: Norm,
    buf: &mut Vec<f64>,
) {
    for (c, center) in centers.iter_mut().enumerate() {
        let members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == c).collect();
        if members.is_empty() {
            continue;
        }
        for (j, coord) in center.iter_mut().enumerate() {
            buf.clear();
            buf.extend(members.iter().map(|&i| x.get(i, j)));
            *coord = match norm {
                Norm::L1 => lower_median(buf),
                Norm::L2 => buf.iter().sum::<f64>() / buf.len() as f64,
            };
        }
    }
}

/// Moves the point farthest from its own center into each empty cluster.
/// Only points from clusters with at least two members are moved.
fn repair_empty(
    x: &DataMatrix,
    labels: &mut [usize],
    dists: &mut [f64],
    centers: &mut [Vec<f64>],
) -> bool {
    let k = centers.len();
    let mut changed = false;
    for c in 0..k {
        let mut sizes = vec![0usize; k];
        for &l in labels.iter() {
            sizes[l] += 1;
        }
        if sizes[c] > 0 {
            continue;
        }
        let far = (0..labels.len())
            .filter(|&i| sizes[labels[i]] > 1 && dists[i] > 0.0)
            .fold(None::<usize>, |best, i| match best {
                Some(b) if dists[b] >= dists[i] => Some(b),
                _ => Some(i),
            });
        let Some(p) = far else { break };
        labels[p] = c;
        dists[p] = 0.0;
        centers[c] = x.row(p).to_vec();
        changed = true;
    }
    changed
}

/// A single seeded Lloyd run with `k` centers.
pub fn lloyd_restart(x: &DataMatrix, k: usize, norm: Norm, seed: u64) -> Result<LloydRun> {
    check_k(k)?;
    let n = x.n_rows();
    let k = k.min(n);
    let mut rng = Xorshift64Star::new(seed);
    let mut centers = seed_centers(x, k, norm, &mut rng);
    let mut labels: Vec<usize> = Vec::new();
    let mut trace = Vec::new();
    let mut buf = Vec::with_capacity(n);
    let mut iterations = 0;

    while iterations < LLOYD_MAX_ITERATIONS {
        iterations += 1;
        let (mut next, mut dists): (Vec<usize>, Vec<f64>) =
            (0..n).map(|i| nearest(x.row(i), &centers, norm)).unzip();
        trace.push(dists.iter().sum());
        if repair_empty(x, &mut next, &mut dists, &mut centers) {
            trace.push(dists.iter().sum());
        }
        if next == labels {
            break;
        }
        labels = next;
        update_centers(x, &labels, &mut centers, norm, &mut buf);
        trace.push(
            (0..n)
                .map(|i| distance(x.row(i), &centers[labels[i]], norm))
                .sum(),
        );
    }
    Ok(LloydRun {
        partition: Partition::new(&labels, k)?,
        objective_trace: trace,
        iterations,
    })
}

/// Best of `restarts` seeded Lloyd runs; restart `r` uses seed `seed + r`.
/// Selection is by row cost, then lowest restart index.
pub fn lloyd_kcluster(
    x: &DataMatrix,
    k: usize,
    norm: Norm,
    restarts: usize,
    seed: u64,
) -> Result<OnewaySolution> {
    check_k(k)?;
    if restarts == 0 {
        return Err(Error::InvalidArgument("restarts must be >= 1".into()));
    }
    let runs: Vec<(f64, LloydRun)> = (0..restarts as u64)
        .into_par_iter()
        .map(|r| {
            let run = lloyd_restart(x, k, norm, seed.wrapping_add(r))?;
            let cost = oneway_row_cost(x, &run.partition, norm)?;
            Ok((cost, run))
        })
        .collect::<Result<_>>()?;
    let mut best = 0;
    for (i, (cost, _)) in runs.iter().enumerate().skip(1) {
        if *cost < runs[best].0 - TIE_TOL {
            best = i;
        }
    }
    let (cost, run) = runs.into_iter().nth(best).unwrap();
    Ok(OnewaySolution {
        partition: run.partition,
        cost,
        mode: SolverMode::Heuristic { restarts, seed },
        iterations: run.iterations,
    })
}

/// Clusters the rows of `x` with the solver selected by `mode`.
pub fn kcluster_rows(
    x: &DataMatrix,
    k: usize,
    norm: Norm,
    mode: SolverMode,
) -> Result<OnewaySolution> {
    match mode {
        SolverMode::Exact => exact_kcluster(x, k, norm),
        SolverMode::Heuristic { restarts, seed } => lloyd_kcluster(x, k, norm, restarts, seed),
    }
}

/// Clusters the columns of `x`: the row solver on the transpose.
pub fn kcluster_cols(
    x: &DataMatrix,
    k: usize,
    norm: Norm,
    mode: SolverMode,
) -> Result<OnewaySolution> {
    kcluster_rows(&x.transpose(), k, norm, mode)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cost::oneway_col_cost;
    use crate::worstcase::{random_binary_matrix, random_real_matrix, worst_case_matrix};

    fn two_groups() -> DataMatrix {
        DataMatrix::from_rows(&[
            [0.2, 0.7, 0.1],
            [5.0, 5.5, 6.0],
            [0.2, 0.7, 0.1],
            [5.0, 5.5, 6.0],
            [0.2, 0.7, 0.1],
        ])
        .unwrap()
    }

    #[test]
    fn k_equals_rows_is_free() {
        let x = random_real_matrix(5, 3, 1);
        let s = exact_kcluster(&x, 5, Norm::L2).unwrap();
        assert_eq!(s.cost, 0.0);
        assert_eq!(s.partition, Partition::singletons(5));
    }

    #[test]
    fn worst_case_rows() {
        let x = worst_case_matrix(2).unwrap();
        let s = exact_kcluster(&x, 2, Norm::L1).unwrap();
        assert_eq!(s.partition.clusters(), vec![vec![0, 1], vec![2, 3]]);
        assert_eq!(s.cost, 6.0);
        // Exhaustive check over all 8 candidates.
        let costs: Vec<f64> = enumerate_partitions(4, 2)
            .unwrap()
            .map(|p| oneway_row_cost(&x, &p, Norm::L1).unwrap())
            .collect();
        assert_eq!(costs.len(), 8);
        assert_eq!(costs.iter().cloned().fold(f64::INFINITY, f64::min), 6.0);
    }

    #[test]
    fn identical_groups_are_recovered() {
        for norm in [Norm::L1, Norm::L2] {
            let s = exact_kcluster(&two_groups(), 2, norm).unwrap();
            assert_eq!(s.cost, 0.0);
            assert_eq!(s.partition.assignment(), &[0, 1, 0, 1, 0]);
        }
    }

    #[test]
    fn exact_beats_every_partition() {
        for seed in 0..10 {
            let x = random_binary_matrix(7, 4, 0.4, seed).unwrap();
            for k in 1..=4 {
                let s = exact_kcluster(&x, k, Norm::L1).unwrap();
                for p in enumerate_partitions(7, k).unwrap() {
                    assert!(s.cost <= oneway_row_cost(&x, &p, Norm::L1).unwrap());
                }
            }
        }
    }

    #[test]
    fn more_clusters_never_hurt() {
        let x = random_real_matrix(6, 4, 3);
        for norm in [Norm::L1, Norm::L2] {
            let costs: Vec<f64> = (1..=6)
                .map(|k| exact_kcluster(&x, k, norm).unwrap().cost)
                .collect();
            assert!(costs.windows(2).all(|w| w[1] <= w[0]), "{costs:?}");
        }
    }

    #[test]
    fn cap_and_shortcuts() {
        let wide = random_binary_matrix(15, 2, 0.5, 0).unwrap();
        assert!(matches!(
            exact_kcluster(&wide, 2, Norm::L1),
            Err(Error::CapExceeded { .. })
        ));
        assert_eq!(
            exact_kcluster(&wide, 1, Norm::L1)
                .unwrap()
                .partition
                .num_clusters(),
            1
        );
        assert_eq!(exact_kcluster(&wide, 15, Norm::L1).unwrap().cost, 0.0);
        assert!(exact_kcluster(&wide, 0, Norm::L1).is_err());
    }

    #[test]
    fn lloyd_single_cluster_matches_exact() {
        let x = random_real_matrix(6, 3, 9);
        for norm in [Norm::L1, Norm::L2] {
            let h = lloyd_kcluster(&x, 1, norm, 3, 5).unwrap();
            assert_eq!(h.cost, exact_kcluster(&x, 1, norm).unwrap().cost);
        }
    }

    #[test]
    fn lloyd_never_beats_exact() {
        for seed in 0..20 {
            let x = random_real_matrix(7, 3, seed);
            for norm in [Norm::L1, Norm::L2] {
                for k in 1..=3 {
                    let e = exact_kcluster(&x, k, norm).unwrap().cost;
                    let h = lloyd_kcluster(&x, k, norm, 4, seed).unwrap().cost;
                    assert!(h >= e - 1e-12, "seed {seed} k {k}: {h} < {e}");
                }
            }
        }
    }

    #[test]
    fn lloyd_finds_identical_groups() {
        for seed in 0..25 {
            for norm in [Norm::L1, Norm::L2] {
                let s = lloyd_kcluster(&two_groups(), 2, norm, 8, seed).unwrap();
                assert_eq!(s.cost, 0.0, "seed {seed} {norm}");
            }
        }
    }

    #[test]
    fn lloyd_trace_is_monotone() {
        for seed in 0..30 {
            let x = random_real_matrix(12, 4, seed);
            for norm in [Norm::L1, Norm::L2] {
                let run = lloyd_restart(&x, 3, norm, seed).unwrap();
                let t = &run.objective_trace;
                assert!(
                    t.windows(2).all(|w| w[1] <= w[0] + 1e-12),
                    "seed {seed} {norm}: {t:?}"
                );
                let final_cost = oneway_row_cost(&x, &run.partition, norm).unwrap();
                assert!(final_cost <= t.last().unwrap() + 1e-12);
                assert!(run.iterations <= LLOYD_MAX_ITERATIONS);
            }
        }
    }

    #[test]
    fn lloyd_is_reproducible() {
        let x = random_real_matrix(10, 4, 77);
        let a = lloyd_kcluster(&x, 3, Norm::L2, 5, 123).unwrap();
        let b = lloyd_kcluster(&x, 3, Norm::L2, 5, 123).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.cost.to_bits(), b.cost.to_bits());
        assert!(lloyd_kcluster(&x, 3, Norm::L2, 0, 1).is_err());
    }

    #[test]
    fn lloyd_cost_is_row_cost() {
        let x = random_real_matrix(9, 3, 4);
        let s = lloyd_kcluster(&x, 3, Norm::L1, 2, 0).unwrap();
        assert!((s.cost - oneway_row_cost(&x, &s.partition, Norm::L1).unwrap()).abs() <= 1e-9);
    }

    #[test]
    fn columns_use_the_transpose() {
        let x = random_binary_matrix(3, 6, 0.5, 8).unwrap();
        let cols = kcluster_cols(&x, 2, Norm::L1, SolverMode::Exact).unwrap();
        let manual = exact_kcluster(&x.transpose(), 2, Norm::L1).unwrap();
        assert_eq!(cols, manual);
        assert_eq!(
            cols.cost,
            oneway_col_cost(&x, &cols.partition, Norm::L1).unwrap()
        );
        let all = kcluster_cols(&x, 6, Norm::L1, SolverMode::Exact).unwrap();
        assert_eq!(all.cost, 0.0);
    }

    #[test]
    fn column_single_cluster_on_worst_case() {
        let x = worst_case_matrix(1).unwrap();
        let s = kcluster_cols(&x, 1, Norm::L1, SolverMode::Exact).unwrap();
        assert_eq!(s.partition.num_clusters(), 1);
        assert_eq!(
            s.cost,
            oneway_col_cost(&x, &Partition::single_cluster(3), Norm::L1).unwrap()
        );
    }
}
