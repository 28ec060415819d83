//! Command-line front end for `bicluster-core`.
//!
//! Every command renders one report (a JSON object, or CSV with a header)
//! into a string; [`execute`] returns it along with the exit status so the
//! binary only has to print and exit.

use std::fmt;
use std::io::Read;
use std::path::PathBuf;
use std::str::FromStr;

use bicluster_core::bounds::{
    block_decomposition, grid_search_alpha, l2_decomposition, lower_bound_check,
    per_bicluster_bound, swap_normalize, AlphaSearch,
};
use bicluster_core::cost::as_integral;
use bicluster_core::rng::Xorshift64Star;
use bicluster_core::search::{alpha_bound, ALPHA_L1_BINARY, ALPHA_L2, BOUND_TOL};
use bicluster_core::worstcase::{
    planted_real_matrix, random_binary_matrix, random_real_matrix, worst_case_report,
};
use bicluster_core::{
    exact_biclustering, ratio, run_scheme, DataMatrix, Error, Norm, Partition, RatioReport,
    SolverMode,
};
use clap::{Parser, ValueEnum};
use rayon::prelude::*;
use serde_json::{json, Map, Value};

pub const EXIT_OK: u8 = 0;
pub const EXIT_IO: u8 = 2;
pub const EXIT_VALIDATION: u8 = 3;
pub const EXIT_CAP: u8 = 4;
pub const EXIT_FINDING: u8 = 5;

/// Noise amplitude of the planted real instances used by sweeps.
const PLANTED_NOISE: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    /// Run the scheme on --input and report partitions and costs.
    Run,
    /// Exhaustive optimal biclustering of --input.
    Exact,
    /// Scheme versus optimum on --input, certified against the bound.
    Ratio,
    /// Check the closed-form costs of the q-th worst-case matrix.
    Worstcase,
    /// Ratio reports over seeded random instances.
    Sweep,
    /// Run the bound verification batteries.
    VerifyBounds,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Exact,
    Heuristic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BinaryArg {
    Auto,
    True,
    False,
}

/// `N` or an inclusive range `A-B`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DimRange {
    pub lo: usize,
    pub hi: usize,
}

impl FromStr for DimRange {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parse = |t: &str| {
            t.trim()
                .parse::<usize>()
                .map_err(|_| format!("expected N or A-B, got {s:?}"))
        };
        let (lo, hi) = match s.split_once('-') {
            Some((a, b)) => (parse(a)?, parse(b)?),
            None => {
                let n = parse(s)?;
                (n, n)
            }
        };
        if lo == 0 || lo > hi {
            return Err(format!("range {s:?} must satisfy 1 <= A <= B"));
        }
        Ok(Self { lo, hi })
    }
}

impl fmt::Display for DimRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.lo == self.hi {
            write!(f, "{}", self.lo)
        } else {
            write!(f, "{}-{}", self.lo, self.hi)
        }
    }
}

#[derive(Debug, Clone, Parser)]
#[command(
    name = "bicluster",
    version,
    about = "Biclustering by independent row and column clustering"
)]
pub struct Cli {
    pub command: Command,

    /// Headerless numeric CSV, one matrix row per line; "-" reads stdin.
    #[arg(long)]
    pub input: Option<PathBuf>,

    /// Number of row clusters.
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u64).range(1..))]
    pub kr: u64,

    /// Number of column clusters.
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u64).range(1..))]
    pub kc: u64,

    #[arg(long, value_enum, default_value_t = NormArg::L1)]
    pub norm: NormArg,

    /// One-way solver used by `run`.
    #[arg(long, value_enum, default_value_t = ModeArg::Exact)]
    pub mode: ModeArg,

    /// Lloyd restarts in heuristic mode.
    #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u64).range(1..))]
    pub restarts: u64,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,

    /// Treat the input as binary (true), real (false), or detect it.
    #[arg(long, value_enum, default_value_t = BinaryArg::Auto)]
    pub binary: BinaryArg,

    /// Worst-case instance index.
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u64).range(1..))]
    pub q: u64,

    /// Print the worst-case matrix as CSV instead of checking it.
    #[arg(long)]
    pub emit_matrix: bool,

    /// Instances per sweep or per verification battery.
    #[arg(long)]
    pub count: Option<usize>,

    /// Row count of generated instances: N or A-B.
    #[arg(long)]
    pub rows: Option<DimRange>,

    /// Column count of generated instances: N or A-B.
    #[arg(long)]
    pub cols: Option<DimRange>,

    /// Probability of a one in generated binary instances.
    #[arg(long, default_value_t = 0.5)]
    pub ones_p: f64,

    /// Grid resolution of the alpha search.
    #[arg(long, default_value_t = 400)]
    pub resolution: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum NormArg {
    L1,
    L2,
}

impl From<NormArg> for Norm {
    fn from(n: NormArg) -> Self {
        match n {
            NormArg::L1 => Norm::L1,
            NormArg::L2 => Norm::L2,
        }
    }
}

/// A failed command, with the exit status it maps to.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    fn validation(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_VALIDATION,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::Io(_) => EXIT_IO,
            Error::CapExceeded { .. } => EXIT_CAP,
            Error::Violation(_) => EXIT_FINDING,
            _ => EXIT_VALIDATION,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Self {
            code: EXIT_IO,
            message: e.to_string(),
        }
    }
}

/// A rendered report. `code` is 0, or 5 when the report records a finding.
#[derive(Debug)]
pub struct Outcome {
    pub code: u8,
    pub stdout: String,
}

type CliResult<T> = Result<T, Failure>;

/// Parses `args` (including the program name) and runs the command.
/// Usage errors exit 3; help and version exit 0.
pub fn run_with_args<I, T>(args: I) -> CliResult<Outcome>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => execute(&cli),
        Err(e) if !e.use_stderr() => Ok(Outcome {
            code: EXIT_OK,
            stdout: e.to_string(),
        }),
        Err(e) => {
            let msg = e.to_string();
            let msg = msg.strip_prefix("error: ").unwrap_or(&msg);
            Err(Failure::validation(msg.trim_end()))
        }
    }
}

pub fn execute(cli: &Cli) -> CliResult<Outcome> {
    if !(0.0..=1.0).contains(&cli.ones_p) {
        return Err(Failure::validation(format!(
            "--ones-p {} outside [0, 1]",
            cli.ones_p
        )));
    }
    match cli.command {
        Command::Run => cmd_run(cli),
        Command::Exact => cmd_exact(cli),
        Command::Ratio => cmd_ratio(cli),
        Command::Worstcase => cmd_worstcase(cli),
        Command::Sweep => cmd_sweep(cli),
        Command::VerifyBounds => cmd_verify_bounds(cli),
    }
}

fn load_input(cli: &Cli) -> CliResult<DataMatrix> {
    let path = cli
        .input
        .as_ref()
        .ok_or_else(|| Failure::validation("--input is required for this command"))?;
    let x = if path.as_os_str() == "-" {
        let mut buf = Vec::new();
        std::io::stdin()
            .read_to_end(&mut buf)
            .map_err(Error::from)?;
        DataMatrix::from_csv_reader(buf.as_slice())
    } else {
        DataMatrix::from_csv_path(path)
    }
    .map_err(|e| match e {
        Error::Io(io) => Failure {
            code: EXIT_IO,
            message: format!("{}: {io}", path.display()),
        },
        other => Failure::from(other),
    })?;
    Ok(match cli.binary {
        BinaryArg::Auto => x,
        BinaryArg::True => x.with_binary(true)?,
        BinaryArg::False => x.with_binary(false)?,
    })
}

fn k_values(cli: &Cli) -> (usize, usize) {
    (cli.kr as usize, cli.kc as usize)
}

fn solver_mode(cli: &Cli) -> SolverMode {
    match cli.mode {
        ModeArg::Exact => SolverMode::Exact,
        ModeArg::Heuristic => SolverMode::Heuristic {
            restarts: cli.restarts as usize,
            seed: cli.seed,
        },
    }
}

fn norm_name(norm: Norm) -> &'static str {
    match norm {
        Norm::L1 => "l1",
        Norm::L2 => "l2",
    }
}

fn binary_name(b: BinaryArg) -> &'static str {
    match b {
        BinaryArg::Auto => "auto",
        BinaryArg::True => "true",
        BinaryArg::False => "false",
    }
}

fn format_name(f: Format) -> &'static str {
    match f {
        Format::Json => "json",
        Format::Csv => "csv",
    }
}

/// Formats costs, asserting integrality when they must be integers.
#[derive(Debug, Clone, Copy)]
struct CostFormat {
    integral: bool,
}

impl CostFormat {
    fn new(norm: Norm, binary: bool) -> Self {
        Self {
            integral: norm == Norm::L1 && binary,
        }
    }

    fn integer(&self, v: f64) -> CliResult<Option<i64>> {
        if !self.integral {
            return Ok(None);
        }
        as_integral(v).map(Some).ok_or_else(|| {
            Failure::from(Error::Violation(format!(
                "cost {v} on binary L1 input is not integral"
            )))
        })
    }

    fn json(&self, v: f64) -> CliResult<Value> {
        Ok(match self.integer(v)? {
            Some(i) => json!(i),
            None => json!(v),
        })
    }

    fn text(&self, v: f64) -> CliResult<String> {
        Ok(match self.integer(v)? {
            Some(i) => i.to_string(),
            None => v.to_string(),
        })
    }

    fn grid_json(&self, grid: &[Vec<f64>]) -> CliResult<Value> {
        grid.iter()
            .map(|row| {
                row.iter()
                    .map(|&v| self.json(v))
                    .collect::<CliResult<Vec<_>>>()
            })
            .collect::<CliResult<Vec<_>>>()
            .map(|g| json!(g))
    }

    /// Rows separated by `;`, entries by spaces.
    fn grid_text(&self, grid: &[Vec<f64>]) -> CliResult<String> {
        let rows = grid
            .iter()
            .map(|row| {
                row.iter()
                    .map(|&v| self.text(v))
                    .collect::<CliResult<Vec<_>>>()
                    .map(|r| r.join(" "))
            })
            .collect::<CliResult<Vec<_>>>()?;
        Ok(rows.join(";"))
    }
}

fn assignment_text(p: &Partition) -> String {
    p.assignment()
        .iter()
        .map(|l| l.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

fn partition_json(p: &Partition) -> Value {
    json!({
        "clusters": p.clusters_one_based(),
        "assignment": assignment_text(p),
    })
}

/// 1-based clusters as `{1,2},{3,4}`.
fn clusters_text(p: &Partition) -> String {
    p.clusters_one_based()
        .iter()
        .map(|c| {
            let items: Vec<String> = c.iter().map(|i| i.to_string()).collect();
            format!("{{{}}}", items.join(","))
        })
        .collect::<Vec<_>>()
        .join(",")
}

fn ratio_json(r: f64) -> Value {
    if r.is_finite() {
        json!(r)
    } else {
        json!("inf")
    }
}

fn opt_text<T: ToString>(v: Option<T>) -> String {
    v.map_or_else(String::new, |v| v.to_string())
}

/// Config fields common to the commands that read a matrix.
fn matrix_config(cli: &Cli, command: &str) -> Map<String, Value> {
    let mut c = Map::new();
    c.insert("command".into(), json!(command));
    c.insert(
        "input".into(),
        json!(cli.input.as_ref().map(|p| p.display().to_string())),
    );
    c.insert("kr".into(), json!(cli.kr));
    c.insert("kc".into(), json!(cli.kc));
    c.insert("norm".into(), json!(norm_name(cli.norm.into())));
    c.insert("binary".into(), json!(binary_name(cli.binary)));
    c.insert("format".into(), json!(format_name(cli.format)));
    c
}

fn matrix_json(x: &DataMatrix) -> Value {
    json!({ "n_rows": x.n_rows(), "n_cols": x.n_cols(), "binary": x.is_binary() })
}

fn render_json(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values always serialize");
    s.push('\n');
    s
}

fn render_csv(header: &[&str], rows: &[Vec<String>]) -> CliResult<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(row)?;
    }
    let bytes = w.into_inner().map_err(|e| Failure {
        code: EXIT_IO,
        message: e.to_string(),
    })?;
    Ok(String::from_utf8(bytes).expect("CSV built from UTF-8 fields"))
}

fn ok(stdout: String) -> CliResult<Outcome> {
    Ok(Outcome {
        code: EXIT_OK,
        stdout,
    })
}

fn cmd_run(cli: &Cli) -> CliResult<Outcome> {
    let x = load_input(cli)?;
    let norm: Norm = cli.norm.into();
    let (kr, kc) = k_values(cli);
    let mode = solver_mode(cli);
    let s = run_scheme(&x, kr, kc, norm, mode)?;
    let f = CostFormat::new(norm, x.is_binary());
    let b = &s.breakdown;
    let rows = &s.biclustering.rows;
    let cols = &s.biclustering.cols;
    let mode_name = if mode.is_exact() {
        "exact"
    } else {
        "heuristic"
    };

    let stdout = match cli.format {
        Format::Json => {
            let mut config = matrix_config(cli, "run");
            config.insert("mode".into(), json!(mode_name));
            if !mode.is_exact() {
                config.insert("restarts".into(), json!(cli.restarts));
                config.insert("seed".into(), json!(cli.seed));
            }
            render_json(&json!({
                "config": config,
                "matrix": matrix_json(&x),
                "rows": partition_json(rows),
                "cols": partition_json(cols),
                "per_bicluster_costs": f.grid_json(&s.biclustering.per_bicluster_costs)?,
                "l_r": f.json(b.l_r)?,
                "l_c": f.json(b.l_c)?,
                "l": f.json(b.l)?,
            }))
        }
        Format::Csv => render_csv(
            &[
                "n_rows",
                "n_cols",
                "binary",
                "kr",
                "kc",
                "norm",
                "mode",
                "restarts",
                "seed",
                "row_clusters",
                "row_assignment",
                "col_clusters",
                "col_assignment",
                "per_bicluster_costs",
                "l_r",
                "l_c",
                "l",
            ],
            &[vec![
                x.n_rows().to_string(),
                x.n_cols().to_string(),
                x.is_binary().to_string(),
                cli.kr.to_string(),
                cli.kc.to_string(),
                norm_name(norm).into(),
                mode_name.into(),
                if mode.is_exact() {
                    String::new()
                } else {
                    cli.restarts.to_string()
                },
                if mode.is_exact() {
                    String::new()
                } else {
                    cli.seed.to_string()
                },
                clusters_text(rows),
                assignment_text(rows),
                clusters_text(cols),
                assignment_text(cols),
                f.grid_text(&s.biclustering.per_bicluster_costs)?,
                f.text(b.l_r)?,
                f.text(b.l_c)?,
                f.text(b.l)?,
            ]],
        )?,
    };
    ok(stdout)
}

fn cmd_exact(cli: &Cli) -> CliResult<Outcome> {
    let x = load_input(cli)?;
    let norm: Norm = cli.norm.into();
    let (kr, kc) = k_values(cli);
    let opt = exact_biclustering(&x, kr, kc, norm)?;
    let f = CostFormat::new(norm, x.is_binary());
    let stdout = match cli.format {
        Format::Json => render_json(&json!({
            "config": matrix_config(cli, "exact"),
            "matrix": matrix_json(&x),
            "rows": partition_json(&opt.rows),
            "cols": partition_json(&opt.cols),
            "l_star": f.json(opt.cost)?,
        })),
        Format::Csv => render_csv(
            &[
                "n_rows",
                "n_cols",
                "binary",
                "kr",
                "kc",
                "norm",
                "row_clusters",
                "row_assignment",
                "col_clusters",
                "col_assignment",
                "l_star",
            ],
            &[vec![
                x.n_rows().to_string(),
                x.n_cols().to_string(),
                x.is_binary().to_string(),
                cli.kr.to_string(),
                cli.kc.to_string(),
                norm_name(norm).into(),
                clusters_text(&opt.rows),
                assignment_text(&opt.rows),
                clusters_text(&opt.cols),
                assignment_text(&opt.cols),
                f.text(opt.cost)?,
            ]],
        )?,
    };
    ok(stdout)
}

fn is_violation(r: &RatioReport) -> bool {
    r.certified == Some(false)
}

fn ratio_report_json(
    config: Map<String, Value>,
    r: &RatioReport,
    f: CostFormat,
) -> CliResult<Value> {
    Ok(json!({
        "config": config,
        "n_rows": r.n_rows,
        "n_cols": r.n_cols,
        "binary": r.binary,
        "k_r": r.k_r,
        "k_c": r.k_c,
        "norm": norm_name(r.norm),
        "seed": r.seed,
        "l_r": f.json(r.l_r)?,
        "l_c": f.json(r.l_c)?,
        "l": f.json(r.l)?,
        "l_star": f.json(r.l_star)?,
        "ratio": ratio_json(r.ratio),
        "alpha_bound": r.alpha_bound,
        "certified": r.certified,
        "scheme": {
            "rows": partition_json(&r.scheme.rows),
            "cols": partition_json(&r.scheme.cols),
            "per_bicluster_costs": f.grid_json(&r.scheme.per_bicluster_costs)?,
        },
        "optimal": {
            "rows": partition_json(&r.optimal.rows),
            "cols": partition_json(&r.optimal.cols),
        },
    }))
}

fn cmd_ratio(cli: &Cli) -> CliResult<Outcome> {
    if cli.mode != ModeArg::Exact {
        return Err(Failure::validation(
            "ratio certifies the exact scheme only; drop --mode heuristic",
        ));
    }
    let x = load_input(cli)?;
    let norm: Norm = cli.norm.into();
    let (kr, kc) = k_values(cli);
    let r = ratio(&x, kr, kc, norm)?;
    let f = CostFormat::new(norm, x.is_binary());
    let stdout = match cli.format {
        Format::Json => render_json(&ratio_report_json(matrix_config(cli, "ratio"), &r, f)?),
        Format::Csv => render_csv(
            &[
                "n_rows",
                "n_cols",
                "binary",
                "kr",
                "kc",
                "norm",
                "l_r",
                "l_c",
                "l",
                "l_star",
                "ratio",
                "alpha_bound",
                "certified",
                "scheme_rows",
                "scheme_cols",
                "optimal_rows",
                "optimal_cols",
            ],
            &[vec![
                r.n_rows.to_string(),
                r.n_cols.to_string(),
                r.binary.to_string(),
                r.k_r.to_string(),
                r.k_c.to_string(),
                norm_name(norm).into(),
                f.text(r.l_r)?,
                f.text(r.l_c)?,
                f.text(r.l)?,
                f.text(r.l_star)?,
                r.ratio.to_string(),
                opt_text(r.alpha_bound),
                opt_text(r.certified),
                clusters_text(&r.scheme.rows),
                clusters_text(&r.scheme.cols),
                clusters_text(&r.optimal.rows),
                clusters_text(&r.optimal.cols),
            ]],
        )?,
    };
    if is_violation(&r) {
        eprintln!(
            "bound violated: ratio {} exceeds alpha {}",
            r.ratio,
            opt_text(r.alpha_bound)
        );
    }
    Ok(Outcome {
        code: if is_violation(&r) {
            EXIT_FINDING
        } else {
            EXIT_OK
        },
        stdout,
    })
}

fn cmd_worstcase(cli: &Cli) -> CliResult<Outcome> {
    let q = cli.q as usize;
    if cli.emit_matrix {
        return ok(bicluster_core::worstcase::worst_case_matrix(q)?.to_csv());
    }
    let r = worst_case_report(q)?;
    let f = CostFormat::new(Norm::L1, true);
    let stdout = match cli.format {
        Format::Json => render_json(&json!({
            "config": {
                "command": "worstcase",
                "q": q,
                "kr": 2,
                "kc": 1,
                "norm": "l1",
                "mode": "exact",
                "format": format_name(cli.format),
            },
            "n_rows": 4,
            "n_cols": 4 * q - 1,
            "l": f.json(r.l)?,
            "l_star": f.json(r.l_star)?,
            "ratio": r.ratio,
            "scheme_rows": partition_json(&r.scheme_rows),
            "optimal_rows": partition_json(&r.optimal_rows),
            "checks": r.checks,
            "passed": r.passed,
        })),
        Format::Csv => render_csv(
            &[
                "q",
                "n_rows",
                "n_cols",
                "l",
                "l_star",
                "ratio",
                "scheme_rows",
                "optimal_rows",
                "passed",
            ],
            &[vec![
                q.to_string(),
                "4".into(),
                (4 * q - 1).to_string(),
                f.text(r.l)?,
                f.text(r.l_star)?,
                r.ratio.to_string(),
                clusters_text(&r.scheme_rows),
                clusters_text(&r.optimal_rows),
                r.passed.to_string(),
            ]],
        )?,
    };
    if !r.passed {
        for c in r.checks.iter().filter(|c| !c.ok) {
            eprintln!(
                "check failed: {}: expected {}, got {}",
                c.name, c.expected, c.actual
            );
        }
    }
    Ok(Outcome {
        code: if r.passed { EXIT_OK } else { EXIT_FINDING },
        stdout,
    })
}

/// What a sweep generates for the current norm and `--binary`.
fn sweep_binary(cli: &Cli) -> bool {
    match cli.binary {
        BinaryArg::True => true,
        BinaryArg::False => false,
        BinaryArg::Auto => cli.norm == NormArg::L1,
    }
}

#[derive(Debug, Clone, Copy)]
enum Generator {
    Binary(f64),
    Uniform,
    Planted,
}

impl Generator {
    fn name(&self) -> &'static str {
        match self {
            Generator::Binary(_) => "binary",
            Generator::Uniform => "uniform",
            Generator::Planted => "planted",
        }
    }
}

struct Instance {
    index: usize,
    seed: u64,
    generator: Generator,
    x: DataMatrix,
}

/// Instance `index` draws its shape and entries from `seed + index` alone.
fn generate_instance(
    index: usize,
    base_seed: u64,
    binary: bool,
    ones_p: f64,
    rows: DimRange,
    cols: DimRange,
) -> CliResult<Instance> {
    let seed = base_seed.wrapping_add(index as u64);
    let mut rng = Xorshift64Star::new(seed);
    let mut draw = |r: DimRange| r.lo + rng.next_below(r.hi - r.lo + 1);
    let (n, m) = (draw(rows), draw(cols));
    let matrix_seed = rng.next_u64();
    let generator = if binary {
        Generator::Binary(ones_p)
    } else if index.is_multiple_of(2) {
        Generator::Uniform
    } else {
        Generator::Planted
    };
    let x = match generator {
        Generator::Binary(p) => random_binary_matrix(n, m, p, matrix_seed)?,
        Generator::Uniform => random_real_matrix(n, m, matrix_seed),
        Generator::Planted => planted_real_matrix(n, m, PLANTED_NOISE, matrix_seed),
    };
    Ok(Instance {
        index,
        seed,
        generator,
        x,
    })
}

fn sweep_config(cli: &Cli, count: usize, rows: DimRange, cols: DimRange, binary: bool) -> Value {
    json!({
        "command": "sweep",
        "count": count,
        "rows": rows.to_string(),
        "cols": cols.to_string(),
        "kr": cli.kr,
        "kc": cli.kc,
        "norm": norm_name(cli.norm.into()),
        "binary": binary,
        "ones_p": cli.ones_p,
        "planted_noise": PLANTED_NOISE,
        "seed": cli.seed,
        "format": format_name(cli.format),
    })
}

fn cmd_sweep(cli: &Cli) -> CliResult<Outcome> {
    let count = cli.count.unwrap_or(100);
    let rows = cli.rows.unwrap_or(DimRange { lo: 4, hi: 4 });
    let cols = cli.cols.unwrap_or(DimRange { lo: 4, hi: 4 });
    let binary = sweep_binary(cli);
    let norm: Norm = cli.norm.into();
    let (kr, kc) = k_values(cli);

    let results: Vec<CliResult<(Instance, RatioReport)>> = (0..count)
        .into_par_iter()
        .map(|i| {
            let inst = generate_instance(i, cli.seed, binary, cli.ones_p, rows, cols)?;
            let mut r = ratio(
                &inst.x,
                kr.min(inst.x.n_rows()),
                kc.min(inst.x.n_cols()),
                norm,
            )?;
            r.seed = Some(inst.seed);
            Ok((inst, r))
        })
        .collect();
    let results = results.into_iter().collect::<CliResult<Vec<_>>>()?;

    let violations = results.iter().filter(|(_, r)| is_violation(r)).count();
    let max_ratio = results
        .iter()
        .map(|(_, r)| r.ratio)
        .fold(f64::NAN, f64::max);
    let f = CostFormat::new(norm, binary);

    let stdout = match cli.format {
        Format::Json => {
            let instances = results
                .iter()
                .map(|(inst, r)| {
                    Ok(json!({
                        "index": inst.index,
                        "seed": inst.seed,
                        "generator": inst.generator.name(),
                        "n_rows": r.n_rows,
                        "n_cols": r.n_cols,
                        "k_r": r.k_r,
                        "k_c": r.k_c,
                        "l_r": f.json(r.l_r)?,
                        "l_c": f.json(r.l_c)?,
                        "l": f.json(r.l)?,
                        "l_star": f.json(r.l_star)?,
                        "ratio": ratio_json(r.ratio),
                        "alpha_bound": r.alpha_bound,
                        "certified": r.certified,
                    }))
                })
                .collect::<CliResult<Vec<_>>>()?;
            render_json(&json!({
                "config": sweep_config(cli, count, rows, cols, binary),
                "instances": instances,
                "summary": {
                    "count": count,
                    "max_ratio": if count == 0 { Value::Null } else { ratio_json(max_ratio) },
                    "alpha_bound": alpha_bound(norm, binary),
                    "violations": violations,
                },
            }))
        }
        Format::Csv => {
            let mut table = results
                .iter()
                .map(|(inst, r)| {
                    Ok(vec![
                        inst.index.to_string(),
                        inst.seed.to_string(),
                        inst.generator.name().into(),
                        r.n_rows.to_string(),
                        r.n_cols.to_string(),
                        r.k_r.to_string(),
                        r.k_c.to_string(),
                        f.text(r.l_r)?,
                        f.text(r.l_c)?,
                        f.text(r.l)?,
                        f.text(r.l_star)?,
                        r.ratio.to_string(),
                        opt_text(r.alpha_bound),
                        opt_text(r.certified),
                        (is_violation(r) as u8).to_string(),
                    ])
                })
                .collect::<CliResult<Vec<_>>>()?;
            let mut summary = vec![String::new(); 15];
            summary[0] = "summary".into();
            summary[11] = if count == 0 {
                String::new()
            } else {
                max_ratio.to_string()
            };
            summary[12] = opt_text(alpha_bound(norm, binary));
            summary[14] = violations.to_string();
            table.push(summary);
            render_csv(
                &[
                    "index",
                    "seed",
                    "generator",
                    "n_rows",
                    "n_cols",
                    "k_r",
                    "k_c",
                    "l_r",
                    "l_c",
                    "l",
                    "l_star",
                    "ratio",
                    "alpha_bound",
                    "certified",
                    "violation",
                ],
                &table,
            )?
        }
    };
    if violations > 0 {
        eprintln!("{violations} of {count} instances violate the bound");
    }
    Ok(Outcome {
        code: if violations > 0 {
            EXIT_FINDING
        } else {
            EXIT_OK
        },
        stdout,
    })
}

/// Pass/fail tally of one verification battery.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Battery {
    pub name: &'static str,
    pub checks: usize,
    pub failures: usize,
}

impl Battery {
    fn new(name: &'static str) -> Self {
        Self {
            name,
            checks: 0,
            failures: 0,
        }
    }

    fn record(&mut self, ok: bool) {
        self.checks += 1;
        self.failures += usize::from(!ok);
    }

    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

/// A random nonempty subset of `0..t`, sorted.
fn random_subset(rng: &mut Xorshift64Star, t: usize) -> Vec<usize> {
    loop {
        let s: Vec<usize> = (0..t).filter(|_| rng.bernoulli(0.5)).collect();
        if !s.is_empty() {
            return s;
        }
    }
}

fn battery_per_bicluster(instances: &[Instance], seed: u64) -> Battery {
    let mut b = Battery::new("per-bicluster bound");
    let mut rng = Xorshift64Star::new(seed ^ 0x5eed_0001);
    for inst in instances {
        let x = &inst.x;
        let (norm, alpha) = if x.is_binary() {
            (Norm::L1, ALPHA_L1_BINARY)
        } else {
            (Norm::L2, ALPHA_L2)
        };
        for _ in 0..4 {
            let rows = random_subset(&mut rng, x.n_rows());
            let cols = random_subset(&mut rng, x.n_cols());
            let y = x.submatrix(&rows, &cols).expect("indices drawn in range");
            b.record(per_bicluster_bound(&y, norm, alpha).pass);
        }
    }
    b
}

fn battery_lower_bound(instances: &[Instance], kr: usize, kc: usize) -> CliResult<Battery> {
    let outcomes: Vec<CliResult<bool>> = instances
        .par_iter()
        .map(|inst| {
            let x = &inst.x;
            let norm = if x.is_binary() { Norm::L1 } else { Norm::L2 };
            Ok(lower_bound_check(x, kr.min(x.n_rows()), kc.min(x.n_cols()), norm)?.holds)
        })
        .collect();
    let mut b = Battery::new("lower bound on the optimum");
    for o in outcomes {
        b.record(o?);
    }
    Ok(b)
}

fn battery_swap(instances: &[Instance]) -> CliResult<Battery> {
    let mut b = Battery::new("swap normalization descent");
    for inst in instances.iter().filter(|i| i.x.is_binary()) {
        // Swaps are defined with ones in the minority.
        let blocks = block_decomposition(&inst.x.full_view())?;
        let x = if blocks.complemented {
            let flipped = inst.x.values().iter().map(|v| 1.0 - v).collect();
            DataMatrix::new(inst.x.n_rows(), inst.x.n_cols(), flipped)?
        } else {
            inst.x.clone()
        };
        let ok = match swap_normalize(&x.full_view()) {
            Ok(s) => {
                s.trace.iter().all(|st| st.spread_after < st.spread_before)
                    && s.trace.len() <= s.initial_spread
                    && s.final_spread <= s.initial_spread
            }
            Err(Error::Violation(msg)) => {
                eprintln!("swap violation on instance {}: {msg}", inst.index);
                false
            }
            Err(e) => return Err(e.into()),
        };
        b.record(ok);
    }
    Ok(b)
}

fn battery_l2_identity(instances: &[Instance]) -> Battery {
    let mut b = Battery::new("L2 decomposition identity");
    for inst in instances.iter().filter(|i| !i.x.is_binary()) {
        let d = l2_decomposition(&inst.x.full_view());
        let scale = 1.0 + d.v_r + d.v_c;
        b.record(d.identity_error().abs() <= BOUND_TOL * scale && d.residual >= -BOUND_TOL * scale);
    }
    b
}

fn alpha_battery(s: &AlphaSearch) -> (Battery, bool) {
    let mut b = Battery::new("alpha grid search");
    let hit = (s.value - ALPHA_L1_BINARY).abs() <= BOUND_TOL;
    let capped = s.lattice_value <= ALPHA_L1_BINARY + BOUND_TOL;
    b.record(hit);
    b.record(capped);
    (b, hit && capped)
}

fn cmd_verify_bounds(cli: &Cli) -> CliResult<Outcome> {
    let count = cli.count.unwrap_or(200);
    let rows = cli.rows.unwrap_or(DimRange { lo: 2, hi: 6 });
    let cols = cli.cols.unwrap_or(DimRange { lo: 2, hi: 6 });
    let (kr, kc) = k_values(cli);
    // Alternate binary and real instances so every battery gets samples.
    let instances = (0..count)
        .map(|i| generate_instance(i, cli.seed, i % 2 == 0, cli.ones_p, rows, cols))
        .collect::<CliResult<Vec<_>>>()?;

    let alpha = grid_search_alpha(cli.resolution)?;
    let (alpha_b, _) = alpha_battery(&alpha);
    let batteries = [
        battery_per_bicluster(&instances, cli.seed),
        battery_lower_bound(&instances, kr, kc)?,
        battery_swap(&instances)?,
        battery_l2_identity(&instances),
        alpha_b,
    ];
    let passed = batteries.iter().all(Battery::passed);

    let stdout = match cli.format {
        Format::Json => render_json(&json!({
            "config": {
                "command": "verify-bounds",
                "count": count,
                "rows": rows.to_string(),
                "cols": cols.to_string(),
                "kr": cli.kr,
                "kc": cli.kc,
                "ones_p": cli.ones_p,
                "resolution": cli.resolution,
                "seed": cli.seed,
                "format": format_name(cli.format),
            },
            "batteries": batteries.iter().map(|b| json!({
                "name": b.name,
                "checks": b.checks,
                "failures": b.failures,
                "passed": b.passed(),
            })).collect::<Vec<_>>(),
            "alpha": {
                "value": alpha.value,
                "best": alpha.best,
                "lattice_value": alpha.lattice_value,
                "lattice_best": alpha.lattice_best,
                "evaluated": alpha.evaluated,
                "target": ALPHA_L1_BINARY,
            },
            "passed": passed,
        })),
        Format::Csv => render_csv(
            &["battery", "checks", "failures", "passed"],
            &batteries
                .iter()
                .map(|b| {
                    vec![
                        b.name.into(),
                        b.checks.to_string(),
                        b.failures.to_string(),
                        b.passed().to_string(),
                    ]
                })
                .collect::<Vec<_>>(),
        )?,
    };
    for b in batteries.iter().filter(|b| !b.passed()) {
        eprintln!(
            "battery failed: {} ({} of {} checks)",
            b.name, b.failures, b.checks
        );
    }
    Ok(Outcome {
        code: if passed { EXIT_OK } else { EXIT_FINDING },
        stdout,
    })
}
