//! Command-line front end.
//!
//! Exit codes: 0 success, 1 verification failure, 2 invalid configuration or
//! input, 3 solver failure. A probe also exits 1 when the fitted slope misses
//! `λ_n` by more than the mode's allowance.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::cones::{ConeModel, ConePoint, DEFAULT_GAMMA_FRAC};
use crate::probe::{self, Grid, ProbeMode};
use crate::project::{self, SolveStats, SolverConfig};
use crate::space::{fmt_f64, Euclidean};
use crate::symmat::BlockSymMatrix;
use crate::verify::{self, VerifyConfig};
use crate::{Error, Result};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;

/// Allowed `|slope - λ_n|` for a probe to count as a success.
pub const EXACT_SLOPE_ALLOWANCE: f64 = 0.05;
pub const NUMERIC_SLOPE_ALLOWANCE: f64 = 0.1;

#[derive(Debug, Parser)]
#[command(name = "sliceproj", version, about = "Projections onto LMI cones and semismoothness probes")]
pub struct Cli {
    /// Worker threads for grid and sample evaluation (0: all cores).
    #[arg(long, global = true, default_value_t = 0)]
    pub jobs: usize,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit the residual exponent along the curve v(t).
    Probe(ProbeArgs),
    /// Project a point or block matrix read from a file.
    Project(ProjectArgs),
    /// Run the invariant suite.
    Verify(VerifyArgs),
    /// Tabulate v(t), w(t) and the residual on a grid.
    Curves(CurvesArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Exact,
    Numeric,
}

impl From<Mode> for ProbeMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Exact => ProbeMode::Exact,
            Mode::Numeric => ProbeMode::Numeric,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Target {
    #[value(name = "K")]
    K,
    Polar,
    SliceDykstra,
    SliceFixedpoint,
}

#[derive(Debug, Clone, Args)]
pub struct SolverArgs {
    #[arg(long, default_value_t = SolverConfig::default().tol)]
    pub tol: f64,
    #[arg(long, default_value_t = SolverConfig::default().max_iter)]
    pub max_iter: usize,
    #[arg(long, default_value_t = SolverConfig::default().rho)]
    pub rho: f64,
}

impl SolverArgs {
    fn config(&self) -> SolverConfig {
        SolverConfig { tol: self.tol, max_iter: self.max_iter, rho: self.rho, ..Default::default() }
    }
}

#[derive(Debug, Clone, Args)]
pub struct GridArgs {
    #[arg(long, default_value_t = probe::DEFAULT_T_MIN)]
    pub t_min: f64,
    #[arg(long, default_value_t = probe::DEFAULT_T_MAX)]
    pub t_max: f64,
    #[arg(long, default_value_t = probe::DEFAULT_POINTS)]
    pub points: usize,
}

impl GridArgs {
    fn grid(&self) -> Grid {
        Grid { t_min: self.t_min, t_max: self.t_max, points: self.points }
    }
}

#[derive(Debug, Clone, Args)]
pub struct ProbeArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, value_enum, default_value_t = Mode::Exact)]
    pub mode: Mode,
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[arg(long, default_value_t = probe::DEFAULT_FD_STEP)]
    pub fd_step: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Clone, Args)]
pub struct ProjectArgs {
    #[arg(long, value_enum, default_value_t = Target::K)]
    pub target: Target,
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Cone index; must match the input when given.
    #[arg(long)]
    pub n: Option<usize>,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Fixed-point step as a fraction of `1/λ_max(A*A)`.
    #[arg(long, default_value_t = DEFAULT_GAMMA_FRAC)]
    pub gamma_frac: f64,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = verify::DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long, default_value_t = verify::DEFAULT_N_MAX)]
    pub n_max: usize,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[arg(long, hide = true)]
    pub inject_fault: bool,
}

#[derive(Debug, Clone, Args)]
pub struct CurvesArgs {
    #[arg(long)]
    pub n: usize,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Add rows for t = 0 and t = 1.
    #[arg(long)]
    pub include_endpoints: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parses `args` (including the program name), runs the command and returns
/// the exit code. Diagnostics go to stderr.
pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
        }
    };
    run(cli)
}

pub fn run(cli: Cli) -> i32 {
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cli.jobs).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: cannot start worker pool: {e}");
            return EXIT_INVALID;
        }
    };
    pool.install(|| {
        let outcome = match &cli.command {
            Command::Probe(a) => cmd_probe(a),
            Command::Project(a) => cmd_project(a),
            Command::Verify(a) => cmd_verify(a),
            Command::Curves(a) => cmd_curves(a),
        };
        outcome.unwrap_or_else(|e| {
            eprintln!("error: {}", message(&e));
            exit_code(&e)
        })
    })
}

fn message(e: &Error) -> String {
    match e {
        Error::InvalidInput(m) => m.clone(),
        other => other.to_string(),
    }
}

/// Exit code for an error that escaped a command.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::NotConverged(_) | Error::NumericFailure(_) => EXIT_SOLVER,
        Error::InvalidInput(_) | Error::DimensionMismatch { .. } | Error::Parse(_) | Error::Io(_) => {
            EXIT_INVALID
        }
    }
}

fn emit(out: &Option<PathBuf>, body: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, body)?,
        None => std::io::stdout().write_all(body.as_bytes())?,
    }
    Ok(())
}

/// The summary goes to stdout when the report is written to a file, and to
/// stderr when the report itself occupies stdout.
fn summary(out: &Option<PathBuf>, line: &str) {
    if out.is_some() {
        println!("{line}");
    } else {
        eprintln!("{line}");
    }
}

pub fn cmd_probe(a: &ProbeArgs) -> Result<i32> {
    let model = ConeModel::new(a.n)?;
    let grid = a.grid.grid();
    grid.validate()?;
    let cfg = a.solver.config();
    cfg.validate()?;
    if !(a.fd_step > 0.0) {
        return Err(Error::invalid(format!("fd-step must be positive, got {}", a.fd_step)));
    }
    let mode = ProbeMode::from(a.mode);
    let report = probe::probe_semismoothness(&model, mode, &grid, &cfg, a.fd_step)?;
    let body = match a.format {
        Format::Csv => report.to_csv(),
        Format::Json => report.to_json() + "\n",
    };
    emit(&a.out, &body)?;
    summary(&a.out, &report.summary_line());
    let allowance = match mode {
        ProbeMode::Exact => EXACT_SLOPE_ALLOWANCE,
        ProbeMode::Numeric => NUMERIC_SLOPE_ALLOWANCE,
    };
    Ok(if report.gap() <= allowance { EXIT_OK } else { EXIT_FAILED })
}

#[derive(Serialize)]
struct ProjectionJson<'a> {
    target: &'static str,
    n: usize,
    /// Point coordinates, or the packed `(a, b, c)` entries of each block.
    values: Vec<f64>,
    stats: &'a SolveStats,
}

fn target_name(t: Target) -> &'static str {
    match t {
        Target::K => "K",
        Target::Polar => "polar",
        Target::SliceDykstra => "slice-dykstra",
        Target::SliceFixedpoint => "slice-fixedpoint",
    }
}

pub fn cmd_project(a: &ProjectArgs) -> Result<i32> {
    let cfg = a.solver.config();
    cfg.validate()?;
    let text = std::fs::read_to_string(&a.input)?;
    let check_n = |found: usize| match a.n {
        Some(n) if n != found => Err(Error::invalid(format!("--n {n} does not match the input (n = {found})"))),
        _ => Ok(()),
    };
    let (n, values, plain, stats) = match a.target {
        Target::K | Target::Polar => {
            let q: ConePoint = text.parse()?;
            check_n(q.n())?;
            let model = ConeModel::new(q.n())?;
            let (p, stats) = if a.target == Target::K {
                project::project_k(&model, &q, &cfg)?
            } else {
                project::project_polar(&model, &q, &cfg)?
            };
            (q.n(), p.coords().to_vec(), p.to_string(), stats)
        }
        Target::SliceDykstra | Target::SliceFixedpoint => {
            let x: BlockSymMatrix = text.parse()?;
            check_n(x.n())?;
            let model = ConeModel::new(x.n())?;
            let (p, stats) = if a.target == Target::SliceDykstra {
                project::project_slice_dykstra(&model, &x, &cfg)?
            } else {
                project::project_slice_fixedpoint_with_step(&model, &x, &cfg, a.gamma_frac)?
            };
            let values = p.blocks().iter().flat_map(|b| [b.a, b.b, b.c]).collect();
            (x.n(), values, p.to_string(), stats)
        }
    };
    let body = match a.format {
        Format::Csv => plain,
        Format::Json => {
            let j = ProjectionJson { target: target_name(a.target), n, values, stats: &stats };
            serde_json::to_string_pretty(&j).expect("plain struct serializes") + "\n"
        }
    };
    emit(&a.out, &body)?;
    summary(&a.out, &stats.to_json());
    if stats.converged {
        Ok(EXIT_OK)
    } else {
        eprintln!("error: solver did not converge; best iterate written");
        Ok(EXIT_SOLVER)
    }
}

pub fn cmd_verify(a: &VerifyArgs) -> Result<i32> {
    let cfg = VerifyConfig {
        seed: a.seed,
        n_max: a.n_max,
        solver: a.solver.config(),
        inject_fault: a.inject_fault,
    };
    let outcomes = verify::run(&cfg)?;
    for g in &outcomes {
        println!("{}", g.line());
    }
    let failed = outcomes.iter().filter(|g| !g.passed()).count();
    println!("{} of {} groups passed", outcomes.len() - failed, outcomes.len());
    Ok(if failed == 0 { EXIT_OK } else { EXIT_FAILED })
}

/// Column names of the curves table for cone index `n`.
pub fn curves_header(n: usize) -> Vec<String> {
    let mut names = vec!["x1".to_string(), "x2".into(), "x3".into()];
    names.extend((1..n).map(|i| format!("y{i}")));
    names.extend((1..n).map(|i| format!("z{i}")));
    let mut cols = vec!["t".to_string()];
    cols.extend(names.iter().map(|c| format!("v_{c}")));
    cols.extend(names.iter().map(|c| format!("w_{c}")));
    cols.extend(["inner_vw".into(), "h_norm".into(), "residual_norm".into()]);
    cols
}

pub fn curves_table(model: &ConeModel, grid: &Grid, include_endpoints: bool) -> Result<String> {
    let mut ts = grid.values()?;
    if include_endpoints {
        ts.insert(0, 0.0);
        ts.push(1.0);
    }
    let mut out = curves_header(model.n()).join(",");
    out.push('\n');
    for t in ts {
        let v = model.curve_v(t)?;
        let w = model.curve_w(t)?;
        let residual = if t > 0.0 && t < 1.0 {
            probe::residual_exact(model, t)?.1
        } else {
            model.curve_inner_closed_form(t)? / w.norm()
        };
        let row: Vec<String> = std::iter::once(t)
            .chain(v.coords().iter().copied())
            .chain(w.coords().iter().copied())
            .chain([v.inner(&w), model.curve_step(t)?.norm(), residual])
            .map(fmt_f64)
            .collect();
        let _ = writeln!(out, "{}", row.join(","));
    }
    Ok(out)
}

pub fn cmd_curves(a: &CurvesArgs) -> Result<i32> {
    let model = ConeModel::new(a.n)?;
    let body = curves_table(&model, &a.grid.grid(), a.include_endpoints)?;
    emit(&a.out, &body)?;
    Ok(EXIT_OK)
}
