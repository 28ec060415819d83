//! Checkable pieces of the approximation argument.
//!
//! The ratio follows from a per-bicluster inequality
//! `V(Y) <= (alpha / 2) (V_R(Y) + V_C(Y))` combined with the lower bound
//! `L* >= max(L_R, L_C)`. For L2 the inequality holds with alpha = 2 because
//! `V = V_R + V_C - residual` for a nonnegative residual. For L1 on 0/1 data
//! it is reduced to a small constrained maximisation over the shape of the
//! majority blocks of a bicluster after swap normalisation.

use rayon::prelude::*;
use serde::Serialize;

use crate::cost::{v_col, v_of, v_row, Norm};
use crate::error::{Error, Result};
use crate::matrix::{Bicluster, DataMatrix};
use crate::oneway::{exact_kcluster, kcluster_cols, SolverMode};
use crate::search::{exact_biclustering_with_caps, OracleCaps, ALPHA_L1_BINARY, BOUND_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundMargin {
    pub v: f64,
    pub v_r: f64,
    pub v_c: f64,
    pub alpha: f64,
    /// `(alpha / 2)(v_r + v_c) - v`.
    pub slack: f64,
    pub pass: bool,
}

/// Evaluates the per-bicluster inequality for `y` at ratio `alpha`.
pub fn per_bicluster_bound(y: &Bicluster<'_>, norm: Norm, alpha: f64) -> BoundMargin {
    let v = v_of(y, norm);
    let v_r = v_row(y, norm);
    let v_c = v_col(y, norm);
    let slack = alpha / 2.0 * (v_r + v_c) - v;
    BoundMargin {
        v,
        v_r,
        v_c,
        alpha,
        slack,
        pass: slack >= -BOUND_TOL,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LowerBoundReport {
    pub l_star: f64,
    /// Optimal one-way row cost.
    pub l_r: f64,
    /// Optimal one-way column cost.
    pub l_c: f64,
    pub max_one_way: f64,
    pub half_sum: f64,
    pub holds: bool,
}

/// Checks `L* >= max(L_R, L_C) >= (L_R + L_C) / 2` with the exact one-way
/// optima.
pub fn lower_bound_check(
    x: &DataMatrix,
    k_r: usize,
    k_c: usize,
    norm: Norm,
) -> Result<LowerBoundReport> {
    let l_star = exact_biclustering_with_caps(x, k_r, k_c, norm, OracleCaps::default())?.cost;
    let l_r = exact_kcluster(x, k_r, norm)?.cost;
    let l_c = kcluster_cols(x, k_c, norm, SolverMode::Exact)?.cost;
    let max_one_way = l_r.max(l_c);
    let half_sum = (l_r + l_c) / 2.0;
    Ok(LowerBoundReport {
        l_star,
        l_r,
        l_c,
        max_one_way,
        half_sum,
        holds: l_star >= max_one_way - BOUND_TOL && max_one_way >= half_sum,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct L2Decomposition {
    pub v: f64,
    pub v_r: f64,
    pub v_c: f64,
    /// Squared distance from `y` to its additive row + column fit.
    pub residual: f64,
}

impl L2Decomposition {
    /// `v_r + v_c - residual - v`, zero up to rounding.
    pub fn identity_error(&self) -> f64 {
        self.v_r + self.v_c - self.residual - self.v
    }
}

/// Splits the L2 spread of `y` into per-column and per-row spreads minus the
/// residual of the fit `col_mean(j) + row_mean(i) - mean`.
pub fn l2_decomposition(y: &Bicluster<'_>) -> L2Decomposition {
    let (n, m) = (y.n(), y.m());
    let mu = y.values().sum::<f64>() / (n * m) as f64;
    let row_means: Vec<f64> = (0..n)
        .map(|i| y.row_values(i).sum::<f64>() / m as f64)
        .collect();
    let col_means: Vec<f64> = (0..m)
        .map(|j| y.col_values(j).sum::<f64>() / n as f64)
        .collect();
    let mut residual = 0.0;
    for (i, rm) in row_means.iter().enumerate() {
        for (j, cm) in col_means.iter().enumerate() {
            let e = y.get(i, j) - (cm + rm - mu);
            residual += e * e;
        }
    }
    L2Decomposition {
        v: v_of(y, Norm::L2),
        v_r: v_row(y, Norm::L2),
        v_c: v_col(y, Norm::L2),
        residual,
    }
}

/// 0/1 grid copied out of a binary bicluster.
#[derive(Debug, Clone, PartialEq, Eq)]
struct BitGrid {
    n: usize,
    m: usize,
    bits: Vec<bool>,
}

impl BitGrid {
    fn from_bicluster(y: &Bicluster<'_>) -> Result<Self> {
        let mut bits = Vec::with_capacity(y.n() * y.m());
        for i in 0..y.n() {
            for (j, v) in y.row_values(i).enumerate() {
                if v != 0.0 && v != 1.0 {
                    return Err(Error::NonBinary {
                        row: i,
                        col: j,
                        value: v,
                    });
                }
                bits.push(v == 1.0);
            }
        }
        Ok(Self {
            n: y.n(),
            m: y.m(),
            bits,
        })
    }

    fn get(&self, i: usize, j: usize) -> bool {
        self.bits[i * self.m + j]
    }

    fn set(&mut self, i: usize, j: usize, v: bool) {
        self.bits[i * self.m + j] = v;
    }

    fn ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    fn row_ones(&self, i: usize) -> usize {
        (0..self.m).filter(|&j| self.get(i, j)).count()
    }

    fn col_ones(&self, j: usize) -> usize {
        (0..self.n).filter(|&i| self.get(i, j)).count()
    }

    fn complement(&mut self) {
        self.bits.iter_mut().for_each(|b| *b = !*b);
    }

    /// `V(Y)` under L1.
    fn v(&self) -> usize {
        let o = self.ones();
        o.min(self.bits.len() - o)
    }

    /// `V_R(Y) + V_C(Y)` under L1.
    fn spread(&self) -> usize {
        let cols: usize = (0..self.m)
            .map(|j| {
                let o = self.col_ones(j);
                o.min(self.n - o)
            })
            .sum();
        let rows: usize = (0..self.n)
            .map(|i| {
                let o = self.row_ones(i);
                o.min(self.m - o)
            })
            .sum();
        cols + rows
    }

    fn to_matrix(&self) -> DataMatrix {
        let values = self
            .bits
            .iter()
            .map(|&b| if b { 1.0 } else { 0.0 })
            .collect();
        DataMatrix::new(self.n, self.m, values)
            .and_then(|x| x.with_binary(true))
            .expect("bit grid is a valid binary matrix")
    }
}

/// The four blocks induced by the strict-majority rows and columns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Block {
    /// Majority rows x majority columns.
    A,
    /// Majority rows x other columns.
    B,
    /// Other rows x majority columns.
    C,
    /// Other rows x other columns.
    D,
}

#[derive(Debug, Clone)]
struct Majorities {
    row: Vec<bool>,
    col: Vec<bool>,
}

impl Majorities {
    fn of(g: &BitGrid) -> Self {
        Self {
            row: (0..g.n).map(|i| 2 * g.row_ones(i) > g.m).collect(),
            col: (0..g.m).map(|j| 2 * g.col_ones(j) > g.n).collect(),
        }
    }

    fn block(&self, i: usize, j: usize) -> Block {
        match (self.row[i], self.col[j]) {
            (true, true) => Block::A,
            (true, false) => Block::B,
            (false, true) => Block::C,
            (false, false) => Block::D,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlockDecomposition {
    pub n: usize,
    pub m: usize,
    /// Rows with strictly more ones than zeros.
    pub o_r: Vec<usize>,
    /// Columns with strictly more ones than zeros.
    pub o_c: Vec<usize>,
    pub ones_a: usize,
    pub ones_b: usize,
    pub ones_c: usize,
    pub ones_d: usize,
    pub x_frac: f64,
    pub y_frac: f64,
    pub a_frac: f64,
    pub b_frac: f64,
    pub c_frac: f64,
    pub d_frac: f64,
    /// Whether the bicluster had more ones than zeros and was complemented
    /// before decomposing.
    pub complemented: bool,
}

impl BlockDecomposition {
    fn of(g: &BitGrid, complemented: bool) -> Self {
        let maj = Majorities::of(g);
        let mut ones = [0usize; 4];
        for i in 0..g.n {
            for j in 0..g.m {
                if g.get(i, j) {
                    ones[maj.block(i, j) as usize] += 1;
                }
            }
        }
        let o_r: Vec<usize> = (0..g.n).filter(|&i| maj.row[i]).collect();
        let o_c: Vec<usize> = (0..g.m).filter(|&j| maj.col[j]).collect();
        let nm = (g.n * g.m) as f64;
        Self {
            n: g.n,
            m: g.m,
            x_frac: o_r.len() as f64 / g.n as f64,
            y_frac: o_c.len() as f64 / g.m as f64,
            a_frac: ones[0] as f64 / nm,
            b_frac: ones[1] as f64 / nm,
            c_frac: ones[2] as f64 / nm,
            d_frac: ones[3] as f64 / nm,
            o_r,
            o_c,
            ones_a: ones[0],
            ones_b: ones[1],
            ones_c: ones[2],
            ones_d: ones[3],
            complemented,
        }
    }

    pub fn total_ones(&self) -> usize {
        self.ones_a + self.ones_b + self.ones_c + self.ones_d
    }

    /// `V(Y)`: the number of ones, which are the minority.
    pub fn v(&self) -> usize {
        self.total_ones()
    }

    /// `V_R(Y) = n m' - o(A) - o(C) + o(B) + o(D)`.
    pub fn v_r(&self) -> usize {
        self.n * self.o_c.len() + self.ones_b + self.ones_d - self.ones_a - self.ones_c
    }

    /// `V_C(Y) = n' m - o(A) - o(B) + o(C) + o(D)`.
    pub fn v_c(&self) -> usize {
        self.o_r.len() * self.m + self.ones_c + self.ones_d - self.ones_a - self.ones_b
    }
}

/// Majority blocks of a binary bicluster. A bicluster with more ones than
/// zeros is complemented first; an exact tie keeps its orientation.
pub fn block_decomposition(y: &Bicluster<'_>) -> Result<BlockDecomposition> {
    let mut g = BitGrid::from_bicluster(y)?;
    let complemented = 2 * g.ones() > g.bits.len();
    if complemented {
        g.complement();
    }
    Ok(BlockDecomposition::of(&g, complemented))
}

/// Which 1 moves into which 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SwapKind {
    DToA,
    DToB,
    DToC,
    BToA,
    CToA,
}

impl SwapKind {
    /// Scan order.
    pub const ORDER: [SwapKind; 5] = [
        SwapKind::DToA,
        SwapKind::DToB,
        SwapKind::DToC,
        SwapKind::BToA,
        SwapKind::CToA,
    ];

    fn blocks(self) -> (Block, Block) {
        match self {
            SwapKind::DToA => (Block::D, Block::A),
            SwapKind::DToB => (Block::D, Block::B),
            SwapKind::DToC => (Block::D, Block::C),
            SwapKind::BToA => (Block::B, Block::A),
            SwapKind::CToA => (Block::C, Block::A),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SwapStep {
    pub kind: SwapKind,
    /// Position of the 1 that moves, bicluster coordinates.
    pub from: (usize, usize),
    /// Position of the 0 it replaces.
    pub to: (usize, usize),
    /// `V_R + V_C` before and after.
    pub spread_before: usize,
    pub spread_after: usize,
}

/// The three shapes a bicluster can take once no swap applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TerminalStructure {
    /// A, B and C are all ones.
    AbcOnes,
    /// A is all ones and D is all zeros.
    AOnesDZeros,
    /// B, C and D are all zeros.
    BcdZeros,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SwapNormalization {
    pub matrix: DataMatrix,
    pub trace: Vec<SwapStep>,
    pub terminal: TerminalStructure,
    pub initial_spread: usize,
    pub final_spread: usize,
    /// `V(Y)`, unchanged by every swap.
    pub v: usize,
}

type Cell = (usize, usize);

fn find_swap(g: &BitGrid, maj: &Majorities) -> Option<(SwapKind, Cell, Cell)> {
    let positions = |block: Block, bit: bool| {
        (0..g.n)
            .flat_map(move |i| (0..g.m).map(move |j| (i, j)))
            .find(|&(i, j)| maj.block(i, j) == block && g.get(i, j) == bit)
    };
    SwapKind::ORDER.iter().find_map(|&kind| {
        let (src, dst) = kind.blocks();
        Some((kind, positions(src, true)?, positions(dst, false)?))
    })
}

/// Classifies a grid with no applicable swap. Empty blocks count as both
/// all ones and all zeros.
fn classify(g: &BitGrid, maj: &Majorities) -> Option<TerminalStructure> {
    let all = |block: Block, bit: bool| {
        (0..g.n).all(|i| (0..g.m).all(|j| maj.block(i, j) != block || g.get(i, j) == bit))
    };
    if all(Block::A, true) && all(Block::B, true) && all(Block::C, true) {
        Some(TerminalStructure::AbcOnes)
    } else if all(Block::A, true) && all(Block::D, false) {
        Some(TerminalStructure::AOnesDZeros)
    } else if all(Block::B, false) && all(Block::C, false) && all(Block::D, false) {
        Some(TerminalStructure::BcdZeros)
    } else {
        None
    }
}

/// Applies majority-block swaps until none applies. Each swap moves a 1
/// without changing the number of ones, so `V` is fixed; each must strictly
/// lower `V_R + V_C`. A swap that does not is returned as a violation.
pub fn swap_normalize(y: &Bicluster<'_>) -> Result<SwapNormalization> {
    let mut g = BitGrid::from_bicluster(y)?;
    if 2 * g.ones() > g.bits.len() {
        return Err(Error::InvalidArgument(
            "swap normalisation needs at least as many zeros as ones".into(),
        ));
    }
    let v = g.v();
    let initial_spread = g.spread();
    let mut spread = initial_spread;
    let mut trace = Vec::new();
    loop {
        let maj = Majorities::of(&g);
        let Some((kind, from, to)) = find_swap(&g, &maj) else {
            let terminal = classify(&g, &maj).ok_or_else(|| {
                Error::Violation("no swap applies but no terminal structure matches".into())
            })?;
            return Ok(SwapNormalization {
                matrix: g.to_matrix(),
                trace,
                terminal,
                initial_spread,
                final_spread: spread,
                v,
            });
        };
        g.set(from.0, from.1, false);
        g.set(to.0, to.1, true);
        let after = g.spread();
        if after >= spread || g.v() != v {
            return Err(Error::Violation(format!(
                "{kind:?} swap {from:?} -> {to:?} took V_R + V_C from {spread} to {after}"
            )));
        }
        trace.push(SwapStep {
            kind,
            from,
            to,
            spread_before: spread,
            spread_after: after,
        });
        spread = after;
    }
}

/// The three block shapes, each a parameterisation of the block
/// densities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum AlphaCase {
    /// a = xy, b = x(1-y), c = (1-x)y, d free in [0, (1-x)(1-y)].
    #[serde(rename = "i")]
    I,
    /// a = xy, b in [0, x(1-y)], c in [0, (1-x)y], d = 0.
    #[serde(rename = "ii")]
    II,
    /// a in [0, xy], b = c = d = 0.
    #[serde(rename = "iii")]
    III,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AlphaPoint {
    pub x: f64,
    pub y: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub case: AlphaCase,
}

const CONSTRAINT_TOL: f64 = 1e-12;
const DENOMINATOR_GUARD: f64 = 1e-12;

impl AlphaPoint {
    fn key(&self) -> [f64; 6] {
        [self.x, self.y, self.a, self.b, self.c, self.d]
    }

    fn lex_lt(&self, other: &Self) -> bool {
        for (p, q) in self.key().iter().zip(other.key()) {
            match p.total_cmp(&q) {
                std::cmp::Ordering::Less => return true,
                std::cmp::Ordering::Greater => return false,
                std::cmp::Ordering::Equal => {}
            }
        }
        false
    }

    fn raw_objective(&self) -> Option<f64> {
        let den = self.x + self.y - 2.0 * self.a + 2.0 * self.d;
        (den > DENOMINATOR_GUARD).then(|| 2.0 * (self.a + self.b + self.c + self.d) / den)
    }
}

fn require(ok: bool, name: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::Constraint(name.into()))
    }
}

/// `2(a+b+c+d) / (x+y-2a+2d)` after validating the point against its case.
/// `None` when the denominator vanishes.
pub fn alpha_objective(p: &AlphaPoint) -> Result<Option<f64>> {
    let t = CONSTRAINT_TOL;
    let within = |v: f64, lo: f64, hi: f64| v >= lo - t && v <= hi + t;
    let close = |v: f64, target: f64| (v - target).abs() <= t;
    require(within(p.x, 0.0, 1.0), "x in [0, 1]")?;
    require(within(p.y, 0.0, 1.0), "y in [0, 1]")?;
    require(
        within(p.a + p.b + p.c + p.d, 0.0, 0.5),
        "a + b + c + d in [0, 1/2]",
    )?;
    let (x, y) = (p.x, p.y);
    match p.case {
        AlphaCase::I => {
            require(close(p.a, x * y), "a = xy")?;
            require(close(p.b, x * (1.0 - y)), "b = x(1 - y)")?;
            require(close(p.c, (1.0 - x) * y), "c = (1 - x)y")?;
            require(
                within(p.d, 0.0, (1.0 - x) * (1.0 - y)),
                "d in [0, (1 - x)(1 - y)]",
            )?;
        }
        AlphaCase::II => {
            require(close(p.a, x * y), "a = xy")?;
            require(within(p.b, 0.0, x * (1.0 - y)), "b in [0, x(1 - y)]")?;
            require(within(p.c, 0.0, (1.0 - x) * y), "c in [0, (1 - x)y]")?;
            require(close(p.d, 0.0), "d = 0")?;
        }
        AlphaCase::III => {
            require(within(p.a, 0.0, x * y), "a in [0, xy]")?;
            require(close(p.b, 0.0), "b = 0")?;
            require(close(p.c, 0.0), "c = 0")?;
            require(close(p.d, 0.0), "d = 0")?;
        }
    }
    Ok(p.raw_objective())
}

/// The two closed-form maximisers, both worth `1 + sqrt(2)`.
pub fn analytic_optima() -> [AlphaPoint; 2] {
    let t = 1.0 - std::f64::consts::FRAC_1_SQRT_2;
    let s = std::f64::consts::FRAC_1_SQRT_2;
    [
        AlphaPoint {
            x: t,
            y: t,
            a: t * t,
            b: t * (1.0 - t),
            c: (1.0 - t) * t,
            d: 0.0,
            case: AlphaCase::I,
        },
        AlphaPoint {
            x: s,
            y: s,
            a: s * s,
            b: 0.0,
            c: 0.0,
            d: 0.0,
            case: AlphaCase::II,
        },
    ]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AlphaSearch {
    pub resolution: usize,
    /// Maximiser over lattice points and the analytic optima.
    pub best: AlphaPoint,
    pub value: f64,
    /// Maximiser over lattice points only.
    pub lattice_best: AlphaPoint,
    pub lattice_value: f64,
    pub evaluated: u64,
}

#[derive(Clone, Copy)]
struct Candidate {
    value: f64,
    point: AlphaPoint,
}

impl Candidate {
    /// Larger value wins; equal values go to the lexicographically smaller
    /// point.
    fn better(self, other: Self) -> Self {
        if other.value > self.value
            || (other.value == self.value && other.point.lex_lt(&self.point))
        {
            other
        } else {
            self
        }
    }
}

fn reduce(
    acc: (Option<Candidate>, u64),
    item: (Option<Candidate>, u64),
) -> (Option<Candidate>, u64) {
    let best = match (acc.0, item.0) {
        (Some(a), Some(b)) => Some(a.better(b)),
        (a, b) => a.or(b),
    };
    (best, acc.1 + item.1)
}

/// Best lattice point of one case with `x = i / r`, all `y`.
fn scan_column(case: AlphaCase, i: u64, r: u64) -> (Option<Candidate>, u64) {
    let rf = r as f64;
    let x = i as f64 / rf;
    let rr = r * r;
    let mut acc: (Option<Candidate>, u64) = (None, 0);
    let offer = |p: AlphaPoint, acc: &mut (Option<Candidate>, u64)| {
        acc.1 += 1;
        if let Some(value) = p.raw_objective() {
            *acc = reduce(*acc, (Some(Candidate { value, point: p }), 0));
        }
    };
    for j in 0..=r {
        let y = j as f64 / rf;
        match case {
            AlphaCase::I => {
                // d = k / r; feasibility in integers scaled by r^2.
                for k in 0..=r {
                    if k * r > (r - i) * (r - j) || 2 * (r * i + r * j - i * j + r * k) > rr {
                        break;
                    }
                    let p = AlphaPoint {
                        x,
                        y,
                        a: x * y,
                        b: x * (1.0 - y),
                        c: (1.0 - x) * y,
                        d: k as f64 / rf,
                        case,
                    };
                    offer(p, &mut acc);
                }
            }
            AlphaCase::II => {
                // d = 0 and the denominator does not involve b or c, so at
                // fixed (x, y) the objective grows with b + c: only the
                // largest feasible lattice sum needs evaluating.
                if 2 * i * j > rr {
                    continue;
                }
                let b_max = i * (r - j) / r;
                let c_max = (r - i) * j / r;
                let cap = (rr - 2 * i * j) / (2 * r);
                let sum = (b_max + c_max).min(cap);
                let kb = b_max.min(sum);
                let p = AlphaPoint {
                    x,
                    y,
                    a: x * y,
                    b: kb as f64 / rf,
                    c: (sum - kb) as f64 / rf,
                    d: 0.0,
                    case,
                };
                offer(p, &mut acc);
            }
            AlphaCase::III => {
                for k in 0..=r {
                    if k * r > i * j || 2 * k > r {
                        break;
                    }
                    let p = AlphaPoint {
                        x,
                        y,
                        a: k as f64 / rf,
                        b: 0.0,
                        c: 0.0,
                        d: 0.0,
                        case,
                    };
                    offer(p, &mut acc);
                }
            }
        }
    }
    acc
}

/// Maximises the block-density objective over the lattice of step
/// `1 / resolution` in each case's free variables, then adds the two
/// analytic optima as extra candidates.
pub fn grid_search_alpha(resolution: usize) -> Result<AlphaSearch> {
    if resolution < 2 {
        return Err(Error::InvalidArgument("resolution must be >= 2".into()));
    }
    let r = resolution as u64;
    let (lattice, evaluated) = [AlphaCase::I, AlphaCase::II, AlphaCase::III]
        .into_par_iter()
        .flat_map(|case| (0..=r).into_par_iter().map(move |i| (case, i)))
        .map(|(case, i)| scan_column(case, i, r))
        .reduce(|| (None, 0), reduce);
    let lattice = lattice.expect("the lattice has feasible points");
    let best = analytic_optima()
        .into_iter()
        .map(|point| Candidate {
            value: point
                .raw_objective()
                .expect("analytic optima are well defined"),
            point,
        })
        .fold(lattice, Candidate::better);
    Ok(AlphaSearch {
        resolution,
        best: best.point,
        value: best.value,
        lattice_best: lattice.point,
        lattice_value: lattice.value,
        evaluated: evaluated + 2,
    })
}

/// Upper limit the search may never exceed.
pub fn alpha_supremum() -> f64 {
    ALPHA_L1_BINARY
}
