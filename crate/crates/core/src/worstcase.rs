//! Instance generators: the 4 x (4q - 1) family on which the scheme's
//! ratio approaches 2, and seeded random matrices for sweeps.

use serde::Serialize;

use crate::cost::{as_integral, Norm};
use crate::error::{Error, Result};
use crate::matrix::DataMatrix;
use crate::oneway::SolverMode;
use crate::partition::Partition;
use crate::rng::Xorshift64Star;
use crate::search::{exact_biclustering_with_caps, run_scheme, OracleCaps};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct WorstCaseSpec {
    pub q: usize,
}

impl WorstCaseSpec {
    pub fn new(q: usize) -> Result<Self> {
        if q == 0 {
            return Err(Error::InvalidArgument("q must be >= 1".into()));
        }
        Ok(Self { q })
    }

    pub fn n_cols(&self) -> usize {
        4 * self.q - 1
    }

    /// Scheme cost 8q - 2.
    pub fn scheme_cost(&self) -> usize {
        8 * self.q - 2
    }

    /// Optimal cost 4q.
    pub fn optimal_cost(&self) -> usize {
        4 * self.q
    }

    pub fn matrix(&self) -> DataMatrix {
        let q = self.q;
        // Column groups of widths q, q and 2q - 1.
        let pattern: [[f64; 3]; 4] = [
            [0.0, 1.0, 0.0],
            [0.0, 1.0, 1.0],
            [1.0, 0.0, 0.0],
            [1.0, 0.0, 1.0],
        ];
        let widths = [q, q, 2 * q - 1];
        let mut values = Vec::with_capacity(4 * self.n_cols());
        for row in &pattern {
            for (g, &w) in widths.iter().enumerate() {
                values.extend(std::iter::repeat_n(row[g], w));
            }
        }
        DataMatrix::new(4, self.n_cols(), values)
            .and_then(|x| x.with_binary(true))
            .expect("worst-case matrix is valid")
    }
}

/// The 4 x (4q - 1) binary matrix with row patterns (0,1,0), (0,1,1),
/// (1,0,0), (1,0,1) over column groups of widths q, q, 2q - 1.
pub fn worst_case_matrix(q: usize) -> Result<DataMatrix> {
    Ok(WorstCaseSpec::new(q)?.matrix())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WorstCaseCheck {
    pub name: &'static str,
    pub expected: String,
    pub actual: String,
    pub ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WorstCaseReport {
    pub q: usize,
    pub l: f64,
    pub l_star: f64,
    pub ratio: f64,
    pub scheme_rows: Partition,
    pub optimal_rows: Partition,
    pub checks: Vec<WorstCaseCheck>,
    pub passed: bool,
}

fn check(name: &'static str, expected: impl ToString, actual: impl ToString) -> WorstCaseCheck {
    let (expected, actual) = (expected.to_string(), actual.to_string());
    WorstCaseCheck {
        name,
        ok: expected == actual,
        expected,
        actual,
    }
}

fn integral_string(v: f64) -> String {
    as_integral(v).map_or_else(|| v.to_string(), |i| i.to_string())
}

/// Runs the exact scheme (two row clusters, one column cluster, L1) and the
/// oracle on the q-th worst-case matrix and checks the closed-form costs
/// and partitions. Deviations are reported in `checks`, not as errors.
pub fn worst_case_report(q: usize) -> Result<WorstCaseReport> {
    let spec = WorstCaseSpec::new(q)?;
    let x = spec.matrix();
    let scheme = run_scheme(&x, 2, 1, Norm::L1, SolverMode::Exact)?;
    // One column cluster leaves only the 8 row partitions to enumerate.
    let optimal = exact_biclustering_with_caps(&x, 2, 1, Norm::L1, OracleCaps::default())?;

    let l = scheme.breakdown.l;
    let l_star = optimal.cost;
    let adjacent = Partition::from_clusters(&[vec![0, 1], vec![2, 3]], 4)?;
    let interleaved = Partition::from_clusters(&[vec![0, 2], vec![1, 3]], 4)?;
    let checks = vec![
        check("L = 8q - 2", spec.scheme_cost(), integral_string(l)),
        check("L* = 4q", spec.optimal_cost(), integral_string(l_star)),
        check(
            "scheme rows = {{1,2},{3,4}}",
            format!("{:?}", adjacent.clusters_one_based()),
            format!("{:?}", scheme.biclustering.rows.clusters_one_based()),
        ),
        check(
            "optimal rows = {{1,3},{2,4}}",
            format!("{:?}", interleaved.clusters_one_based()),
            format!("{:?}", optimal.rows.clusters_one_based()),
        ),
    ];
    Ok(WorstCaseReport {
        q,
        l,
        l_star,
        ratio: l / l_star,
        passed: checks.iter().all(|c| c.ok),
        scheme_rows: scheme.biclustering.rows,
        optimal_rows: optimal.rows,
        checks,
    })
}

/// I.i.d. Bernoulli(`ones_probability`) entries.
pub fn random_binary_matrix(
    n: usize,
    m: usize,
    ones_probability: f64,
    seed: u64,
) -> Result<DataMatrix> {
    if !(0.0..=1.0).contains(&ones_probability) {
        return Err(Error::InvalidArgument(format!(
            "ones probability {ones_probability} outside [0, 1]"
        )));
    }
    let mut rng = Xorshift64Star::new(seed);
    let values = (0..n * m)
        .map(|_| {
            if rng.bernoulli(ones_probability) {
                1.0
            } else {
                0.0
            }
        })
        .collect();
    DataMatrix::new(n, m, values)?.with_binary(true)
}

/// I.i.d. uniform [0, 1) entries. Panics if `n` or `m` is zero.
pub fn random_real_matrix(n: usize, m: usize, seed: u64) -> DataMatrix {
    let mut rng = Xorshift64Star::new(seed);
    let values = (0..n * m).map(|_| rng.next_f64()).collect();
    DataMatrix::new(n, m, values)
        .and_then(|x| x.with_binary(false))
        .expect("n and m must be positive")
}

/// Two row groups x two column groups, each block at a uniform random
/// level, plus uniform noise in [-noise, noise]. Group membership is drawn
/// per row and per column. Panics if `n` or `m` is zero.
pub fn planted_real_matrix(n: usize, m: usize, noise: f64, seed: u64) -> DataMatrix {
    let mut rng = Xorshift64Star::new(seed);
    let levels: Vec<f64> = (0..4).map(|_| rng.next_f64()).collect();
    let row_group: Vec<usize> = (0..n).map(|_| rng.bernoulli(0.5) as usize).collect();
    let col_group: Vec<usize> = (0..m).map(|_| rng.bernoulli(0.5) as usize).collect();
    let mut values = Vec::with_capacity(n * m);
    for &rg in &row_group {
        for &cg in &col_group {
            values.push(levels[2 * rg + cg] + noise * (2.0 * rng.next_f64() - 1.0));
        }
    }
    DataMatrix::new(n, m, values)
        .and_then(|x| x.with_binary(false))
        .expect("n and m must be positive")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn q1_matrix() {
        let x = worst_case_matrix(1).unwrap();
        let expected = DataMatrix::from_rows(&[
            [0.0, 1.0, 0.0],
            [0.0, 1.0, 1.0],
            [1.0, 0.0, 0.0],
            [1.0, 0.0, 1.0],
        ])
        .unwrap();
        assert_eq!(x, expected);
        assert!(x.is_binary());
    }

    #[test]
    fn shape_and_ones() {
        for q in 1..=100 {
            let x = worst_case_matrix(q).unwrap();
            assert_eq!((x.n_rows(), x.n_cols()), (4, 4 * q - 1));
            let row_sums: Vec<usize> = (0..4)
                .map(|i| x.row(i).iter().filter(|&&v| v == 1.0).count())
                .collect();
            assert_eq!(row_sums, vec![q, 3 * q - 1, q, 3 * q - 1]);
            assert_eq!(row_sums.iter().sum::<usize>(), 8 * q - 2);
        }
        assert!(worst_case_matrix(0).is_err());
    }

    #[test]
    fn small_reports() {
        let r = worst_case_report(1).unwrap();
        assert!(r.passed, "{:?}", r.checks);
        assert_eq!((r.l, r.l_star, r.ratio), (6.0, 4.0, 1.5));
        let r = worst_case_report(2).unwrap();
        assert_eq!((r.l, r.l_star, r.ratio), (14.0, 8.0, 1.75));
        let r = worst_case_report(100).unwrap();
        assert!(r.passed);
        assert_eq!(r.ratio, 798.0 / 400.0);
        assert!(r.ratio < 2.0);
    }

    #[test]
    fn ratio_sequence_increases_towards_two() {
        let ratios: Vec<f64> = (1..=100)
            .map(|q| (8 * q - 2) as f64 / (4 * q) as f64)
            .collect();
        assert!(ratios.windows(2).all(|w| w[0] < w[1]));
        assert!(ratios.iter().all(|&r| r < 2.0));
    }

    #[test]
    fn binary_generator() {
        let zeros = random_binary_matrix(3, 4, 0.0, 1).unwrap();
        assert!(zeros.values().iter().all(|&v| v == 0.0));
        assert!(zeros.is_binary());
        let ones = random_binary_matrix(3, 4, 1.0, 1).unwrap();
        assert!(ones.values().iter().all(|&v| v == 1.0));
        assert_eq!(
            random_binary_matrix(5, 5, 0.5, 99).unwrap(),
            random_binary_matrix(5, 5, 0.5, 99).unwrap()
        );
        assert!(random_binary_matrix(2, 2, 1.5, 0).is_err());
        assert!(random_binary_matrix(2, 2, -0.1, 0).is_err());
    }

    #[test]
    fn real_generators() {
        let x = random_real_matrix(6, 7, 3);
        assert!(x.values().iter().all(|v| (0.0..=1.0).contains(v)));
        assert!(!x.is_binary());
        assert_eq!(x, random_real_matrix(6, 7, 3));
        assert_ne!(x, random_real_matrix(6, 7, 4));
        assert_eq!(
            planted_real_matrix(4, 5, 0.1, 8),
            planted_real_matrix(4, 5, 0.1, 8)
        );

        let one = random_real_matrix(1, 1, 0);
        let r = crate::search::ratio(&one, 1, 1, Norm::L2).unwrap();
        assert_eq!(r.l, 0.0);
        assert_eq!(r.l_star, 0.0);
    }
}
