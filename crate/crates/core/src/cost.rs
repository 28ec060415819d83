//! Cost functionals: the dissimilarity of a multiset, its per-column and
//! per-row sums over a bicluster, and the one-way and biclustering costs
//! built from them.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{Bicluster, DataMatrix};
use crate::partition::Partition;

/// Tolerance for treating a floating-point cost as an integer.
pub const INTEGRALITY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Norm {
    /// Absolute deviations from the median.
    L1,
    /// Squared deviations from the mean.
    L2,
}

impl fmt::Display for Norm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Norm::L1 => "l1",
            Norm::L2 => "l2",
        })
    }
}

impl FromStr for Norm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "l1" => Ok(Norm::L1),
            "l2" => Ok(Norm::L2),
            other => Err(Error::InvalidArgument(format!("unknown norm {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CostBreakdown {
    /// One-way row cost of the row partition.
    pub l_r: f64,
    /// One-way column cost of the column partition.
    pub l_c: f64,
    /// Biclustering cost of the pair.
    pub l: f64,
    pub norm: Norm,
}

/// Biclustering cost together with the cost of every bicluster, indexed by
/// (row cluster, column cluster) in canonical label order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BiclusteringCost {
    pub breakdown: CostBreakdown,
    pub grid: Vec<Vec<f64>>,
}

/// Lower median: for an even count, the smaller of the two middle values.
/// Reorders `values`.
pub(crate) fn lower_median(values: &mut [f64]) -> f64 {
    let mid = (values.len() - 1) / 2;
    let (_, m, _) = values.select_nth_unstable_by(mid, f64::total_cmp);
    *m
}

pub(crate) fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Dissimilarity of a nonempty buffer, which may be reordered.
pub(crate) fn dissimilarity_in_place(values: &mut [f64], norm: Norm) -> f64 {
    let first = values[0];
    if values.iter().all(|&v| v == first) {
        return 0.0;
    }
    match norm {
        Norm::L1 => {
            let med = lower_median(values);
            values.iter().map(|v| (v - med).abs()).sum()
        }
        Norm::L2 => {
            let mu = mean(values);
            values.iter().map(|v| (v - mu) * (v - mu)).sum()
        }
    }
}

/// Sum of absolute deviations from the lower median (L1) or of squared
/// deviations from the mean (L2).
pub fn dissimilarity(values: &[f64], norm: Norm) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::InvalidArgument(
            "dissimilarity of an empty multiset".into(),
        ));
    }
    let mut buf = values.to_vec();
    Ok(dissimilarity_in_place(&mut buf, norm))
}

/// Dissimilarity of all entries of `y` pooled together.
pub fn v_of(y: &Bicluster<'_>, norm: Norm) -> f64 {
    let mut buf: Vec<f64> = y.values().collect();
    dissimilarity_in_place(&mut buf, norm)
}

/// Sum over the columns of `y` of each column's dissimilarity.
pub fn v_row(y: &Bicluster<'_>, norm: Norm) -> f64 {
    let mut buf = Vec::with_capacity(y.n());
    (0..y.m())
        .map(|j| {
            buf.clear();
            buf.extend(y.col_values(j));
            dissimilarity_in_place(&mut buf, norm)
        })
        .sum()
}

/// Sum over the rows of `y` of each row's dissimilarity.
pub fn v_col(y: &Bicluster<'_>, norm: Norm) -> f64 {
    let mut buf = Vec::with_capacity(y.m());
    (0..y.n())
        .map(|i| {
            buf.clear();
            buf.extend(y.row_values(i));
            dissimilarity_in_place(&mut buf, norm)
        })
        .sum()
}

fn check_len(p: &Partition, expected: usize) -> Result<()> {
    if p.len() != expected {
        return Err(Error::DimensionMismatch {
            expected,
            actual: p.len(),
        });
    }
    Ok(())
}

/// One-way row cost: for every row cluster and every column, the
/// dissimilarity of that column slice.
pub fn oneway_row_cost(x: &DataMatrix, rows: &Partition, norm: Norm) -> Result<f64> {
    check_len(rows, x.n_rows())?;
    let mut buf = Vec::with_capacity(x.n_rows());
    let mut total = 0.0;
    for cluster in rows.clusters() {
        for j in 0..x.n_cols() {
            buf.clear();
            buf.extend(cluster.iter().map(|&i| x.get(i, j)));
            total += dissimilarity_in_place(&mut buf, norm);
        }
    }
    Ok(total)
}

/// One-way column cost: for every row and every column cluster, the
/// dissimilarity of that row slice.
pub fn oneway_col_cost(x: &DataMatrix, cols: &Partition, norm: Norm) -> Result<f64> {
    check_len(cols, x.n_cols())?;
    let mut buf = Vec::with_capacity(x.n_cols());
    let mut total = 0.0;
    for cluster in cols.clusters() {
        for i in 0..x.n_rows() {
            buf.clear();
            buf.extend(cluster.iter().map(|&j| x.get(i, j)));
            total += dissimilarity_in_place(&mut buf, norm);
        }
    }
    Ok(total)
}

/// Cost of the biclustering induced by `rows` x `cols`, plus the one-way
/// costs of the same two partitions.
pub fn biclustering_cost(
    x: &DataMatrix,
    rows: &Partition,
    cols: &Partition,
    norm: Norm,
) -> Result<BiclusteringCost> {
    check_len(rows, x.n_rows())?;
    check_len(cols, x.n_cols())?;
    let row_clusters = rows.clusters();
    let col_clusters = cols.clusters();
    let mut buf = Vec::new();
    let grid: Vec<Vec<f64>> = row_clusters
        .iter()
        .map(|r| {
            col_clusters
                .iter()
                .map(|c| {
                    buf.clear();
                    for &i in r {
                        buf.extend(c.iter().map(|&j| x.get(i, j)));
                    }
                    dissimilarity_in_place(&mut buf, norm)
                })
                .collect()
        })
        .collect();
    let l = grid.iter().flatten().sum();
    Ok(BiclusteringCost {
        breakdown: CostBreakdown {
            l_r: oneway_row_cost(x, rows, norm)?,
            l_c: oneway_col_cost(x, cols, norm)?,
            l,
            norm,
        },
        grid,
    })
}

/// Rounds `v` to an integer if it is within [`INTEGRALITY_TOL`] of one.
pub fn as_integral(v: f64) -> Option<i64> {
    let r = v.round();
    ((v - r).abs() <= INTEGRALITY_TOL).then_some(r as i64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::worstcase::worst_case_matrix;
    use approx::assert_abs_diff_eq;

    fn m(rows: &[&[f64]]) -> DataMatrix {
        DataMatrix::from_rows(rows).unwrap()
    }

    #[test]
    fn constant_multiset_has_zero_cost() {
        for norm in [Norm::L1, Norm::L2] {
            assert_eq!(dissimilarity(&[0.3; 7], norm).unwrap(), 0.0);
        }
    }

    #[test]
    fn dissimilarity_examples() {
        assert_eq!(dissimilarity(&[0., 0., 1., 1., 1.], Norm::L1).unwrap(), 2.0);
        assert_eq!(dissimilarity(&[1., 2., 3.], Norm::L2).unwrap(), 2.0);
        assert!(dissimilarity(&[], Norm::L1).is_err());
    }

    #[test]
    fn binary_l1_is_minority_count() {
        // Oracle: minimise the deviation sum over both candidate centres.
        for z in 0..=12usize {
            for o in 0..=(12 - z) {
                if z + o == 0 {
                    continue;
                }
                let mut v = vec![0.0; z];
                v.extend(std::iter::repeat_n(1.0, o));
                let brute = [0.0f64, 1.0]
                    .iter()
                    .map(|c| v.iter().map(|x: &f64| (x - c).abs()).sum::<f64>())
                    .fold(f64::INFINITY, f64::min);
                let got = dissimilarity(&v, Norm::L1).unwrap();
                assert_eq!(got, brute, "z={z} o={o}");
                assert_eq!(got, z.min(o) as f64);
            }
        }
    }

    #[test]
    fn median_interval_gives_same_sum() {
        let v = [4.0, 1.0, 9.0, 2.0, 7.0, 3.0];
        let mut s = v.to_vec();
        s.sort_by(f64::total_cmp);
        let dev = |c: f64| v.iter().map(|x| (x - c).abs()).sum::<f64>();
        let lo = s[2];
        let hi = s[3];
        assert_eq!(dev(lo), dev(hi));
        assert_eq!(dev(lo), dev((lo + hi) / 2.0));
        assert_eq!(dissimilarity(&v, Norm::L1).unwrap(), dev(lo));
    }

    #[test]
    fn bicluster_functionals() {
        let zeros = m(&[&[0., 0.], &[0., 0.]]);
        assert_eq!(v_of(&zeros.full_view(), Norm::L1), 0.0);

        let corner = m(&[&[1., 0.], &[0., 0.]]);
        assert_eq!(v_of(&corner.full_view(), Norm::L1), 1.0);

        let anti = m(&[&[0., 1.], &[1., 0.]]);
        let y = anti.full_view();
        assert_abs_diff_eq!(v_of(&y, Norm::L2), 1.0, epsilon = 1e-12);
        assert_eq!(v_row(&y, Norm::L1), 2.0);
        assert_eq!(v_col(&y, Norm::L1), 2.0);

        let single_row = m(&[&[0.1, 5.0, 2.0]]);
        for norm in [Norm::L1, Norm::L2] {
            assert_eq!(v_row(&single_row.full_view(), norm), 0.0);
            assert_eq!(v_col(&single_row.transpose().full_view(), norm), 0.0);
        }
    }

    #[test]
    fn v_row_and_v_col_mirror_under_transpose() {
        let x = m(&[&[0.1, 0.9, 0.4], &[0.5, 0.2, 0.8]]);
        let t = x.transpose();
        for norm in [Norm::L1, Norm::L2] {
            assert_eq!(v_row(&x.full_view(), norm), v_col(&t.full_view(), norm));
            assert_eq!(v_col(&x.full_view(), norm), v_row(&t.full_view(), norm));
        }
    }

    /// Oracle for the one-way row cost written straight from its definition.
    fn row_cost_oracle(x: &DataMatrix, clusters: &[Vec<usize>]) -> f64 {
        let mut total = 0.0;
        for r in clusters {
            for j in 0..x.n_cols() {
                let col: Vec<f64> = r.iter().map(|&i| x.get(i, j)).collect();
                let ones = col.iter().filter(|&&v| v == 1.0).count();
                total += ones.min(col.len() - ones) as f64;
            }
        }
        total
    }

    #[test]
    fn worst_case_row_costs() {
        let x = worst_case_matrix(2).unwrap();
        let adjacent = vec![vec![0, 1], vec![2, 3]];
        let interleaved = vec![vec![0, 2], vec![1, 3]];
        let p = Partition::from_clusters(&adjacent, 4).unwrap();
        let q = Partition::from_clusters(&interleaved, 4).unwrap();
        assert_eq!(row_cost_oracle(&x, &adjacent), 6.0);
        assert_eq!(row_cost_oracle(&x, &interleaved), 8.0);
        assert_eq!(oneway_row_cost(&x, &p, Norm::L1).unwrap(), 6.0);
        assert_eq!(oneway_row_cost(&x, &q, Norm::L1).unwrap(), 8.0);
        assert_eq!(
            oneway_row_cost(&x, &Partition::singletons(4), Norm::L1).unwrap(),
            0.0
        );
    }

    #[test]
    fn worst_case_biclustering_costs() {
        let x = worst_case_matrix(2).unwrap();
        let all_cols = Partition::single_cluster(x.n_cols());
        let p = Partition::from_clusters(&[vec![0, 1], vec![2, 3]], 4).unwrap();
        let q = Partition::from_clusters(&[vec![0, 2], vec![1, 3]], 4).unwrap();
        let c = biclustering_cost(&x, &p, &all_cols, Norm::L1).unwrap();
        assert_eq!(c.breakdown.l, 14.0);
        assert_eq!(c.grid, vec![vec![7.0], vec![7.0]]);
        assert_eq!(
            biclustering_cost(&x, &q, &all_cols, Norm::L1)
                .unwrap()
                .breakdown
                .l,
            8.0
        );
    }

    #[test]
    fn col_cost_single_cluster_q1() {
        let x = worst_case_matrix(1).unwrap();
        // Row-wise minority counts of [[0,1,0],[0,1,1],[1,0,0],[1,0,1]].
        let expected: f64 = (0..4)
            .map(|i| {
                let ones = x.row(i).iter().filter(|&&v| v == 1.0).count();
                ones.min(3 - ones) as f64
            })
            .sum();
        assert_eq!(expected, 4.0);
        let cost = oneway_col_cost(&x, &Partition::single_cluster(3), Norm::L1).unwrap();
        assert_eq!(cost, expected);
    }

    #[test]
    fn col_cost_is_row_cost_of_transpose() {
        let x = m(&[&[0.1, 0.9, 0.4, 0.3], &[0.5, 0.2, 0.8, 0.0]]);
        let p = Partition::new(&[0, 1, 0, 1], 2).unwrap();
        for norm in [Norm::L1, Norm::L2] {
            assert_eq!(
                oneway_col_cost(&x, &p, norm).unwrap(),
                oneway_row_cost(&x.transpose(), &p, norm).unwrap()
            );
            assert_eq!(
                oneway_col_cost(&x, &Partition::singletons(4), norm).unwrap(),
                0.0
            );
        }
    }

    #[test]
    fn trivial_partitions_reduce_to_v_of() {
        let x = m(&[&[0.1, 0.9, 0.4], &[0.5, 0.2, 0.8]]);
        for norm in [Norm::L1, Norm::L2] {
            let c = biclustering_cost(
                &x,
                &Partition::single_cluster(2),
                &Partition::single_cluster(3),
                norm,
            )
            .unwrap();
            assert_eq!(c.breakdown.l, v_of(&x.full_view(), norm));
        }
    }

    #[test]
    fn mismatched_partitions() {
        let x = m(&[&[0., 1.], &[1., 0.]]);
        let p = Partition::single_cluster(3);
        assert!(matches!(
            oneway_row_cost(&x, &p, Norm::L1),
            Err(Error::DimensionMismatch {
                expected: 2,
                actual: 3
            })
        ));
        assert!(biclustering_cost(&x, &Partition::single_cluster(2), &p, Norm::L1).is_err());
    }

    #[test]
    fn integrality() {
        assert_eq!(as_integral(14.0 + 1e-12), Some(14));
        assert_eq!(as_integral(0.5), None);
    }

    #[test]
    fn norm_parsing() {
        assert_eq!("L1".parse::<Norm>().unwrap(), Norm::L1);
        assert_eq!("l2".parse::<Norm>().unwrap(), Norm::L2);
        assert!("l3".parse::<Norm>().is_err());
    }
}
