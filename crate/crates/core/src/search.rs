//! The independent row/column scheme and the exhaustive optimal
//! biclustering it is measured against.

use serde::Serialize;

use crate::cost::{biclustering_cost, dissimilarity_in_place, CostBreakdown, Norm};
use crate::error::{Error, Result};
use crate::matrix::DataMatrix;
use crate::oneway::{kcluster_cols, kcluster_rows, SolverMode, TIE_TOL};
use crate::partition::{enumerate_partitions, Partition};

/// Guaranteed ratio for L1 on 0/1 matrices.
pub const ALPHA_L1_BINARY: f64 = 1.0 + std::f64::consts::SQRT_2;
/// Guaranteed ratio for L2 on real matrices.
pub const ALPHA_L2: f64 = 2.0;
/// Slack allowed when comparing a ratio with its bound.
pub const BOUND_TOL: f64 = 1e-9;
/// An optimal cost at or below this is treated as zero.
pub const ZERO_COST_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Biclustering {
    pub rows: Partition,
    pub cols: Partition,
    /// Cost of each bicluster, indexed by (row cluster, column cluster).
    pub per_bicluster_costs: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SchemeResult {
    pub biclustering: Biclustering,
    pub breakdown: CostBreakdown,
    pub mode: SolverMode,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimalBiclustering {
    pub rows: Partition,
    pub cols: Partition,
    pub cost: f64,
}

/// Size limits for the joint row x column enumeration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleCaps {
    pub max_rows: usize,
    pub max_cols: usize,
}

impl Default for OracleCaps {
    fn default() -> Self {
        Self {
            max_rows: 8,
            max_cols: 8,
        }
    }
}

/// Clusters rows and columns independently and crosses the two partitions.
pub fn run_scheme(
    x: &DataMatrix,
    k_r: usize,
    k_c: usize,
    norm: Norm,
    mode: SolverMode,
) -> Result<SchemeResult> {
    let rows = kcluster_rows(x, k_r, norm, mode)?;
    let cols = kcluster_cols(x, k_c, norm, mode)?;
    let cost = biclustering_cost(x, &rows.partition, &cols.partition, norm)?;
    Ok(SchemeResult {
        biclustering: Biclustering {
            rows: rows.partition,
            cols: cols.partition,
            per_bicluster_costs: cost.grid,
        },
        breakdown: cost.breakdown,
        mode,
    })
}

fn search_space(t: usize, k: usize, cap: usize, what: &'static str) -> Result<Vec<Partition>> {
    if k == 0 {
        return Err(Error::InvalidArgument("cluster count must be >= 1".into()));
    }
    let k = k.min(t);
    if k == 1 {
        return Ok(vec![Partition::single_cluster(t)]);
    }
    if t > cap {
        return Err(Error::CapExceeded { what, size: t, cap });
    }
    Ok(enumerate_partitions(t, k)?.collect())
}

/// Per-(row cluster, column) sufficient statistics for a fixed row
/// partition, used to score column partitions without touching `x`.
enum SliceStats {
    /// Centered sums and sums of squares.
    Moments {
        count: Vec<f64>,
        s1: Vec<f64>,
        s2: Vec<f64>,
    },
    /// Number of ones in each slice.
    Ones { count: Vec<usize>, ones: Vec<usize> },
    /// Raw slice values.
    Values { slices: Vec<Vec<f64>> },
}

struct Scorer<'a> {
    x: &'a DataMatrix,
    norm: Norm,
    shift: f64,
    buf: Vec<f64>,
}

impl<'a> Scorer<'a> {
    fn new(x: &'a DataMatrix, norm: Norm) -> Self {
        let shift = x.values().iter().sum::<f64>() / x.values().len() as f64;
        Self {
            x,
            norm,
            shift,
            buf: Vec::new(),
        }
    }

    fn stats(&self, rows: &Partition) -> SliceStats {
        let m = self.x.n_cols();
        let kr = rows.num_clusters();
        let labels = rows.assignment();
        match (self.norm, self.x.is_binary()) {
            (Norm::L2, _) => {
                let mut count = vec![0.0; kr];
                let mut s1 = vec![0.0; kr * m];
                let mut s2 = vec![0.0; kr * m];
                for (i, &r) in labels.iter().enumerate() {
                    count[r] += 1.0;
                    for (j, &v) in self.x.row(i).iter().enumerate() {
                        let v = v - self.shift;
                        s1[r * m + j] += v;
                        s2[r * m + j] += v * v;
                    }
                }
                SliceStats::Moments { count, s1, s2 }
            }
            (Norm::L1, true) => {
                let mut count = vec![0; kr];
                let mut ones = vec![0; kr * m];
                for (i, &r) in labels.iter().enumerate() {
                    count[r] += 1;
                    for (j, &v) in self.x.row(i).iter().enumerate() {
                        ones[r * m + j] += (v == 1.0) as usize;
                    }
                }
                SliceStats::Ones { count, ones }
            }
            (Norm::L1, false) => {
                let mut slices = vec![Vec::new(); kr * m];
                for (i, &r) in labels.iter().enumerate() {
                    for (j, &v) in self.x.row(i).iter().enumerate() {
                        slices[r * m + j].push(v);
                    }
                }
                SliceStats::Values { slices }
            }
        }
    }

    /// Cost of the bicluster (row cluster `r`, columns `cols`).
    fn block(&mut self, stats: &SliceStats, r: usize, cols: &[usize]) -> f64 {
        let m = self.x.n_cols();
        match stats {
            SliceStats::Moments { count, s1, s2 } => {
                let (a, b) = cols.iter().fold((0.0, 0.0), |(a, b), &j| {
                    (a + s1[r * m + j], b + s2[r * m + j])
                });
                let n = count[r] * cols.len() as f64;
                (b - a * a / n).max(0.0)
            }
            SliceStats::Ones { count, ones } => {
                let o: usize = cols.iter().map(|&j| ones[r * m + j]).sum();
                o.min(count[r] * cols.len() - o) as f64
            }
            SliceStats::Values { slices } => {
                self.buf.clear();
                for &j in cols {
                    self.buf.extend_from_slice(&slices[r * m + j]);
                }
                dissimilarity_in_place(&mut self.buf, self.norm)
            }
        }
    }

    fn total(
        &mut self,
        stats: &SliceStats,
        n_row_clusters: usize,
        col_clusters: &[Vec<usize>],
    ) -> f64 {
        let mut total = 0.0;
        for r in 0..n_row_clusters {
            for c in col_clusters {
                total += self.block(stats, r, c);
            }
        }
        total
    }
}

/// Minimum biclustering cost over all pairs (row partition into at most
/// `k_r` clusters, column partition into at most `k_c` clusters), with the
/// default size caps.
pub fn exact_biclustering(
    x: &DataMatrix,
    k_r: usize,
    k_c: usize,
    norm: Norm,
) -> Result<OptimalBiclustering> {
    exact_biclustering_with_caps(x, k_r, k_c, norm, OracleCaps::default())
}

/// [`exact_biclustering`] with explicit caps. A side clustered into a
/// single cluster has a one-element search space and is never capped.
pub fn exact_biclustering_with_caps(
    x: &DataMatrix,
    k_r: usize,
    k_c: usize,
    norm: Norm,
    caps: OracleCaps,
) -> Result<OptimalBiclustering> {
    let row_space = search_space(x.n_rows(), k_r, caps.max_rows, "exact biclustering rows")?;
    let col_space = search_space(x.n_cols(), k_c, caps.max_cols, "exact biclustering columns")?;
    let col_clusters: Vec<Vec<Vec<usize>>> = col_space.iter().map(Partition::clusters).collect();
    let singleton_cols: Vec<Vec<usize>> = (0..x.n_cols()).map(|j| vec![j]).collect();

    let mut scorer = Scorer::new(x, norm);
    let mut best: Option<(f64, usize, usize)> = None;
    for (ri, rows) in row_space.iter().enumerate() {
        let stats = scorer.stats(rows);
        let kr = rows.num_clusters();
        if let Some((incumbent, _, _)) = best {
            // Splitting columns into singletons never costs more, so the
            // row-only cost bounds every column partition from below.
            let floor = scorer.total(&stats, kr, &singleton_cols);
            if floor - 1e-9 >= incumbent {
                continue;
            }
        }
        for (ci, cols) in col_clusters.iter().enumerate() {
            let cost = scorer.total(&stats, kr, cols);
            if best.is_none_or(|(b, _, _)| cost < b - TIE_TOL) {
                best = Some((cost, ri, ci));
            }
        }
    }
    let (_, ri, ci) = best.expect("non-empty search space");
    let rows = row_space[ri].clone();
    let cols = col_space[ci].clone();
    let cost = biclustering_cost(x, &rows, &cols, norm)?.breakdown.l;
    Ok(OptimalBiclustering { rows, cols, cost })
}

/// The ratio guaranteed for this norm and input type, if any. L1 on real
/// data has none.
pub fn alpha_bound(norm: Norm, binary: bool) -> Option<f64> {
    match (norm, binary) {
        (Norm::L1, true) => Some(ALPHA_L1_BINARY),
        (Norm::L1, false) => None,
        (Norm::L2, _) => Some(ALPHA_L2),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatioReport {
    pub l_r: f64,
    pub l_c: f64,
    pub l: f64,
    pub l_star: f64,
    /// `l / l_star`, or 1 when both are zero.
    pub ratio: f64,
    pub alpha_bound: Option<f64>,
    pub certified: Option<bool>,
    pub norm: Norm,
    pub binary: bool,
    pub n_rows: usize,
    pub n_cols: usize,
    pub k_r: usize,
    pub k_c: usize,
    pub seed: Option<u64>,
    pub scheme: Biclustering,
    pub optimal: OptimalBiclustering,
}

/// Runs the exact scheme and the exhaustive oracle on `x` and compares them.
pub fn ratio(x: &DataMatrix, k_r: usize, k_c: usize, norm: Norm) -> Result<RatioReport> {
    ratio_with_caps(x, k_r, k_c, norm, OracleCaps::default())
}

pub fn ratio_with_caps(
    x: &DataMatrix,
    k_r: usize,
    k_c: usize,
    norm: Norm,
    caps: OracleCaps,
) -> Result<RatioReport> {
    let optimal = exact_biclustering_with_caps(x, k_r, k_c, norm, caps)?;
    let scheme = run_scheme(x, k_r, k_c, norm, SolverMode::Exact)?;
    let l = scheme.breakdown.l;
    let ratio = if optimal.cost > ZERO_COST_TOL {
        l / optimal.cost
    } else if l <= BOUND_TOL {
        1.0
    } else {
        f64::INFINITY
    };
    let alpha = alpha_bound(norm, x.is_binary());
    Ok(RatioReport {
        l_r: scheme.breakdown.l_r,
        l_c: scheme.breakdown.l_c,
        l,
        l_star: optimal.cost,
        ratio,
        alpha_bound: alpha,
        certified: alpha.map(|a| ratio <= a + BOUND_TOL),
        norm,
        binary: x.is_binary(),
        n_rows: x.n_rows(),
        n_cols: x.n_cols(),
        k_r,
        k_c,
        seed: None,
        scheme: scheme.biclustering,
        optimal,
    })
}
