//! Property tests for the cost, solver and bound invariants.

use bicluster_core::bounds::{
    block_decomposition, l2_decomposition, per_bicluster_bound, swap_normalize,
};
use bicluster_core::cost::{biclustering_cost, oneway_col_cost, oneway_row_cost, v_of, Norm};
use bicluster_core::oneway::{exact_kcluster, lloyd_kcluster};
use bicluster_core::search::{ratio, run_scheme, ALPHA_L1_BINARY};
use bicluster_core::{DataMatrix, Partition, SolverMode};
use proptest::prelude::*;

fn binary_matrix(max: usize) -> impl Strategy<Value = DataMatrix> {
    (1..=max, 1..=max).prop_flat_map(|(n, m)| {
        prop::collection::vec(prop::bool::ANY, n * m).prop_map(move |bits| {
            DataMatrix::new(n, m, bits.into_iter().map(|b| b as u8 as f64).collect()).unwrap()
        })
    })
}

fn real_matrix(max: usize) -> impl Strategy<Value = DataMatrix> {
    (1..=max, 1..=max).prop_flat_map(|(n, m)| {
        prop::collection::vec(-5.0f64..5.0, n * m).prop_map(move |v| {
            DataMatrix::new(n, m, v)
                .unwrap()
                .with_binary(false)
                .unwrap()
        })
    })
}

/// Arbitrary labels in [0, 4) for `t` items.
fn labels(t: usize) -> impl Strategy<Value = Partition> {
    prop::collection::vec(0usize..4, t).prop_map(|l| Partition::new(&l, 4).unwrap())
}

fn matrix_with_partitions(
    m: impl Strategy<Value = DataMatrix>,
) -> impl Strategy<Value = (DataMatrix, Partition, Partition)> {
    m.prop_flat_map(|x| {
        let (n, c) = (x.n_rows(), x.n_cols());
        (Just(x), labels(n), labels(c))
    })
}

/// Moves item `item` into a fresh cluster, refining `p`.
fn split_off(p: &Partition, item: usize) -> Partition {
    let mut l = p.assignment().to_vec();
    l[item] = p.num_clusters();
    Partition::new(&l, p.num_clusters() + 1).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn refinement_never_increases_cost(
        (x, rows, cols) in matrix_with_partitions(real_matrix(6)),
        pick in any::<prop::sample::Index>(),
        norm in prop_oneof![Just(Norm::L1), Just(Norm::L2)],
    ) {
        let base = biclustering_cost(&x, &rows, &cols, norm).unwrap().breakdown;
        let r = pick.index(x.n_rows());
        let finer_rows = split_off(&rows, r);
        let finer = biclustering_cost(&x, &finer_rows, &cols, norm).unwrap().breakdown;
        prop_assert!(finer.l <= base.l + 1e-9);
        prop_assert!(finer.l_r <= base.l_r + 1e-9);
        let c = pick.index(x.n_cols());
        let finer_cols = split_off(&cols, c);
        let finer = biclustering_cost(&x, &rows, &finer_cols, norm).unwrap().breakdown;
        prop_assert!(finer.l <= base.l + 1e-9);
        prop_assert!(finer.l_c <= base.l_c + 1e-9);
    }

    #[test]
    fn breakdown_components_agree(
        (x, rows, cols) in matrix_with_partitions(real_matrix(6)),
        norm in prop_oneof![Just(Norm::L1), Just(Norm::L2)],
    ) {
        let c = biclustering_cost(&x, &rows, &cols, norm).unwrap();
        prop_assert_eq!(c.breakdown.l_r, oneway_row_cost(&x, &rows, norm).unwrap());
        prop_assert_eq!(c.breakdown.l_c, oneway_col_cost(&x, &cols, norm).unwrap());
        prop_assert_eq!(c.grid.len(), rows.num_clusters());
        prop_assert!(c.grid.iter().all(|r| r.len() == cols.num_clusters()));
        prop_assert!(c.grid.iter().flatten().all(|&v| v >= 0.0));
        let whole = biclustering_cost(
            &x,
            &Partition::single_cluster(x.n_rows()),
            &Partition::single_cluster(x.n_cols()),
            norm,
        ).unwrap();
        prop_assert_eq!(whole.breakdown.l, v_of(&x.full_view(), norm));
    }

    #[test]
    fn binary_l1_is_minority_count(x in binary_matrix(6)) {
        let ones = x.values().iter().filter(|&&v| v == 1.0).count();
        let zeros = x.values().len() - ones;
        prop_assert_eq!(v_of(&x.full_view(), Norm::L1), ones.min(zeros) as f64);
    }

    #[test]
    fn summed_per_bicluster_bound_binary((x, rows, cols) in matrix_with_partitions(binary_matrix(6))) {
        let c = biclustering_cost(&x, &rows, &cols, Norm::L1).unwrap();
        let b = c.breakdown;
        prop_assert!(b.l <= ALPHA_L1_BINARY / 2.0 * (b.l_r + b.l_c) + 1e-9);
    }

    #[test]
    fn summed_per_bicluster_bound_real((x, rows, cols) in matrix_with_partitions(real_matrix(6))) {
        let b = biclustering_cost(&x, &rows, &cols, Norm::L2).unwrap().breakdown;
        prop_assert!(b.l <= b.l_r + b.l_c + 1e-9);
    }

    #[test]
    fn l2_slack_is_the_residual(x in real_matrix(8)) {
        let y = x.full_view();
        let d = l2_decomposition(&y);
        let b = per_bicluster_bound(&y, Norm::L2, 2.0);
        let scale = 1.0 + d.v_r + d.v_c;
        prop_assert!(d.residual >= 0.0);
        prop_assert!(d.identity_error().abs() <= 1e-9 * scale);
        prop_assert!((b.slack - d.residual).abs() <= 1e-9 * scale);
    }

    #[test]
    fn block_invariants(x in binary_matrix(7)) {
        let b = block_decomposition(&x.full_view()).unwrap();
        prop_assert!(2 * b.total_ones() <= b.n * b.m);
        prop_assert_eq!(b.x_frac, b.o_r.len() as f64 / b.n as f64);
        prop_assert_eq!(b.y_frac, b.o_c.len() as f64 / b.m as f64);
        let t = 1e-12;
        prop_assert!(b.a_frac <= b.x_frac * b.y_frac + t);
        prop_assert!(b.b_frac <= b.x_frac * (1.0 - b.y_frac) + t);
        prop_assert!(b.c_frac <= (1.0 - b.x_frac) * b.y_frac + t);
        prop_assert!(b.d_frac <= (1.0 - b.x_frac) * (1.0 - b.y_frac) + t);
    }

    #[test]
    fn swap_trace_descends(x in binary_matrix(6)) {
        let ones = x.values().iter().filter(|&&v| v == 1.0).count();
        let x = if 2 * ones > x.values().len() {
            let flipped = x.values().iter().map(|v| 1.0 - v).collect();
            DataMatrix::new(x.n_rows(), x.n_cols(), flipped).unwrap()
        } else {
            x
        };
        let s = swap_normalize(&x.full_view()).unwrap();
        prop_assert!(s.trace.len() <= s.initial_spread);
        prop_assert!(s.trace.windows(2).all(|w| w[1].spread_before == w[0].spread_after));
        prop_assert!(s.trace.iter().all(|st| st.spread_after < st.spread_before));
        prop_assert_eq!(v_of(&s.matrix.full_view(), Norm::L1), v_of(&x.full_view(), Norm::L1));
    }

    #[test]
    fn exact_is_monotone_in_k(x in real_matrix(6), norm in prop_oneof![Just(Norm::L1), Just(Norm::L2)]) {
        let mut prev = f64::INFINITY;
        for k in 1..=x.n_rows() {
            let c = exact_kcluster(&x, k, norm).unwrap().cost;
            prop_assert!(c <= prev + 1e-12);
            prev = c;
        }
    }

    #[test]
    fn heuristic_is_reproducible(x in real_matrix(8), seed in any::<u64>()) {
        let a = lloyd_kcluster(&x, 3, Norm::L2, 3, seed).unwrap();
        let b = lloyd_kcluster(&x, 3, Norm::L2, 3, seed).unwrap();
        prop_assert_eq!(a.cost.to_bits(), b.cost.to_bits());
        prop_assert_eq!(a.partition, b.partition);
    }

    #[test]
    fn scheme_row_cost_is_exact_row_cost((x, _, _) in matrix_with_partitions(binary_matrix(6))) {
        let s = run_scheme(&x, 2, 2, Norm::L1, SolverMode::Exact).unwrap();
        prop_assert_eq!(s.breakdown.l_r, exact_kcluster(&x, 2, Norm::L1).unwrap().cost);
    }
}

/// Constant blocks on a planted grid of row and column types: the optimum
/// is zero, and the scheme must find zero too.
#[test]
fn zero_optimum_forces_zero_scheme_cost() {
    let row_types = [[0usize, 1, 0, 1, 1], [1, 1, 0, 0, 1]];
    let col_types = [[0usize, 1, 1, 0], [1, 0, 0, 1]];
    let levels = [[0.0, 1.0], [1.0, 0.0]];
    let real_levels = [[0.3, -2.0], [1.5, 0.25]];
    for rt in row_types {
        for ct in col_types {
            let build = |lv: [[f64; 2]; 2]| {
                let values = rt
                    .iter()
                    .flat_map(|&r| ct.iter().map(move |&c| lv[r][c]))
                    .collect();
                DataMatrix::new(rt.len(), ct.len(), values).unwrap()
            };
            for (x, norm) in [
                (build(levels), Norm::L1),
                (build(levels), Norm::L2),
                (build(real_levels), Norm::L2),
                (build(real_levels), Norm::L1),
            ] {
                let r = ratio(&x, 2, 2, norm).unwrap();
                assert_eq!(r.l_star, 0.0);
                assert_eq!(r.l, 0.0);
                assert_eq!(r.ratio, 1.0);
            }
        }
    }
}
