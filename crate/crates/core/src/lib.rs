//! Biclustering by clustering rows and columns independently.
//!
//! The crate provides the cost functionals, exact and heuristic one-way
//! solvers, the row/column scheme, an exhaustive optimal-biclustering
//! oracle, and the machinery used to check the scheme's approximation
//! ratio: `1 + sqrt(2)` for L1 on 0/1 matrices and 2 for L2 on real ones.

pub mod bounds;
pub mod cost;
pub mod error;
pub mod matrix;
pub mod oneway;
pub mod partition;
pub mod rng;
pub mod search;
pub mod worstcase;

pub use cost::{biclustering_cost, oneway_col_cost, oneway_row_cost, CostBreakdown, Norm};
pub use error::{Error, Result};
pub use matrix::{Bicluster, DataMatrix};
pub use oneway::{
    exact_kcluster, kcluster_cols, kcluster_rows, lloyd_kcluster, OnewaySolution, SolverMode,
};
pub use partition::{enumerate_partitions, Partition};
pub use search::{
    exact_biclustering, ratio, run_scheme, OptimalBiclustering, RatioReport, SchemeResult,
};
