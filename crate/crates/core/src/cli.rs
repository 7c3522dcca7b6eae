//! Command-line front end. [`run`] does all the work and returns the process
//! exit code so it can be driven from tests.
//!
//! Exit codes: 0 success, 1 I/O or parse failure, 2 invalid arguments,
//! 3 verification failure.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::data::{compute_feature_stats, read_sparse_file, Dataset, ParseOptions};
use crate::error::{Error, Result};
use crate::oracle::{oracle_neg_min_with, OracleConfig};
use crate::path::{run_path, Grid, PathConfig};
use crate::screening::{
    bound_feature, build_context, neg_min, screen_all, theta_at_lambda_max, Branch, Parallelism,
    WeightedFeature,
};
use crate::solver::{self, solve_primal, theta_from_primal, SolverOptions, ThetaVector};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_ARGS: i32 = 2;
pub const EXIT_VERIFY: i32 = 3;

/// Largest closed-form vs oracle discrepancy `verify` accepts.
pub const VERIFY_TOL: f64 = 1e-6;

/// A regularization weight, either absolute or relative to `λ_max`
/// (written `0.5xMAX`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LambdaArg {
    Absolute(f64),
    TimesMax(f64),
}

impl LambdaArg {
    pub fn resolve(self, lambda_max: f64) -> f64 {
        match self {
            LambdaArg::Absolute(v) => v,
            LambdaArg::TimesMax(k) => k * lambda_max,
        }
    }
}

impl FromStr for LambdaArg {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let s = s.trim();
        let lower = s.to_ascii_lowercase();
        let (num, rel) = match lower.strip_suffix("xmax") {
            Some(head) => (head, true),
            None => (lower.as_str(), false),
        };
        let v: f64 = num
            .parse()
            .map_err(|_| format!("expected a number or <k>xMAX, got '{s}'"))?;
        if !v.is_finite() || v <= 0.0 {
            return Err(format!("must be positive and finite, got '{s}'"));
        }
        Ok(if rel {
            LambdaArg::TimesMax(v)
        } else {
            LambdaArg::Absolute(v)
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Parser)]
#[command(name = "svmscreen", version, about = "Safe feature screening for the L1-regularized squared-hinge SVM")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Training data in sparse `label index:value ...` format.
    pub input: PathBuf,
    /// Write output here instead of stdout.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    /// Worker threads for screening (default: all cores).
    #[arg(long)]
    pub threads: Option<usize>,
    /// Reject labels other than +1 and -1.
    #[arg(long)]
    pub strict_labels: bool,
}

#[derive(Debug, Args)]
pub struct SolveFlags {
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    #[arg(long, default_value_t = 100_000)]
    pub max_iter: usize,
}

impl SolveFlags {
    fn options(&self) -> Result<SolverOptions> {
        if !(self.tol > 0.0) || !self.tol.is_finite() {
            return Err(Error::InvalidArgument(format!("--tol must be positive, got {}", self.tol)));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidArgument("--max-iter must be at least 1".into()));
        }
        Ok(SolverOptions {
            tol: self.tol,
            max_iter: self.max_iter,
            ..Default::default()
        })
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Smallest λ with an all-zero solution, and the features that enter first.
    LambdaMax {
        #[command(flatten)]
        common: Common,
    },
    /// Solve at one λ.
    Solve {
        #[command(flatten)]
        common: Common,
        /// A number, or a multiple of λ_max such as `0.5xMAX`.
        #[arg(long)]
        lambda: LambdaArg,
        #[command(flatten)]
        solve: SolveFlags,
    },
    /// Screen features at λ₂ given the dual point at λ₁.
    Screen {
        #[command(flatten)]
        common: Common,
        /// Defaults to λ_max.
        #[arg(long)]
        lambda1: Option<LambdaArg>,
        /// A number, or a multiple of λ_max such as `0.5xMAX`.
        #[arg(long)]
        lambda2: LambdaArg,
        /// JSON array with the dual point at λ₁; solved for when omitted.
        #[arg(long)]
        theta1: Option<PathBuf>,
        #[command(flatten)]
        solve: SolveFlags,
    },
    /// Screened regularization path over a geometric grid.
    Path {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 10)]
        grid_size: usize,
        #[arg(long, default_value_t = 0.8)]
        ratio: f64,
        /// Also solve without screening and count unsafe discards.
        #[arg(long)]
        verify: bool,
        /// Solve every step over all features.
        #[arg(long)]
        no_screen: bool,
        #[command(flatten)]
        solve: SolveFlags,
    },
    /// Compare the closed-form bounds against the brute-force oracle (n ≤ 10).
    Verify {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        lambda1: Option<LambdaArg>,
        #[arg(long, default_value = "0.5xMAX")]
        lambda2: LambdaArg,
        #[arg(long)]
        theta1: Option<PathBuf>,
        #[command(flatten)]
        solve: SolveFlags,
    },
}

impl Command {
    fn common(&self) -> &Common {
        match self {
            Command::LambdaMax { common }
            | Command::Solve { common, .. }
            | Command::Screen { common, .. }
            | Command::Path { common, .. }
            | Command::Verify { common, .. } => common,
        }
    }
}

#[derive(Debug)]
enum Failure {
    Error(Error),
    Verification(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Error(e)
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidArgument(_)
        | Error::InfeasibleTheta(_)
        | Error::InconsistentInputs(_)
        | Error::OracleTooLarge { .. } => EXIT_ARGS,
        _ => EXIT_IO,
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ARGS } else { EXIT_OK };
            let sink: &mut dyn Write = if code == EXIT_OK { stdout } else { stderr };
            let _ = write!(sink, "{}", e.render());
            return code;
        }
    };
    let mut buf = Vec::new();
    let result = match cli.command.common().threads {
        Some(0) => Err(Failure::Error(Error::InvalidArgument("--threads must be at least 1".into()))),
        Some(t) => match rayon::ThreadPoolBuilder::new().num_threads(t).build() {
            Ok(pool) => pool.install(|| dispatch(&cli.command, &mut buf)),
            Err(e) => Err(Failure::Error(Error::InvalidArgument(format!("thread pool: {e}")))),
        },
        None => dispatch(&cli.command, &mut buf),
    };
    if let Err(e) = stdout.write_all(&buf).and_then(|_| stdout.flush()) {
        let _ = writeln!(stderr, "error: {e}");
        return EXIT_IO;
    }
    match result {
        Ok(()) => EXIT_OK,
        Err(Failure::Error(e)) => {
            let _ = writeln!(stderr, "error: {e}");
            exit_code(&e)
        }
        Err(Failure::Verification(msg)) => {
            let _ = writeln!(stderr, "verification failed: {msg}");
            EXIT_VERIFY
        }
    }
}

fn load(common: &Common) -> Result<Dataset> {
    read_sparse_file(
        &common.input,
        ParseOptions {
            strict_labels: common.strict_labels,
        },
    )
}

fn emit(common: &Common, text: &str, stdout: &mut Vec<u8>) -> Result<()> {
    match &common.output {
        Some(p) => fs::write(p, text).map_err(|e| Error::file(p, e))?,
        None => stdout.extend_from_slice(text.as_bytes()),
    }
    Ok(())
}

fn emit_json<T: Serialize>(common: &Common, value: &T, stdout: &mut Vec<u8>) -> Result<()> {
    if common.format != Format::Json {
        return Err(Error::InvalidArgument("this command only writes JSON".into()));
    }
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    emit(common, &s, stdout)
}

#[derive(Serialize)]
struct LambdaMaxJson {
    lambda_max: f64,
    bias: f64,
    first_features: Vec<usize>,
}

fn read_theta(path: &Path, n: usize, lambda: f64) -> Result<ThetaVector> {
    let values: Vec<f64> = serde_json::from_str(&fs::read_to_string(path).map_err(|e| Error::file(path, e))?)?;
    if values.len() != n {
        return Err(Error::InvalidArgument(format!(
            "θ₁ file has {} entries, dataset has {n} samples",
            values.len()
        )));
    }
    ThetaVector::new(values, lambda)
}

/// Dual point at λ₁: from file, from the closed form at λ_max, or by solving.
fn theta_for(
    data: &Dataset,
    lambda1: Option<LambdaArg>,
    theta_file: Option<&Path>,
    solve: &SolveFlags,
) -> Result<ThetaVector> {
    let lm = solver::lambda_max(data).lambda_max;
    if !(lm > 0.0) {
        return Err(Error::InvalidArgument(
            "lambda_max is 0 (all labels identical or all features zero); nothing to screen".into(),
        ));
    }
    let l1 = lambda1.map_or(lm, |l| l.resolve(lm));
    if l1 > lm * (1.0 + 1e-9) {
        return Err(Error::InvalidArgument(format!("lambda1 = {l1} exceeds lambda_max = {lm}")));
    }
    if let Some(p) = theta_file {
        return read_theta(p, data.n_samples(), l1);
    }
    if l1 >= lm * (1.0 - 1e-12) {
        return theta_at_lambda_max(data);
    }
    let model = solve_primal(data, l1, &solve.options()?)?;
    if !model.converged {
        return Err(Error::InvalidArgument(format!(
            "solve at lambda1 = {l1} did not converge (KKT residual {:e})",
            model.kkt_residual
        )));
    }
    theta_from_primal(data, &model.weights, model.bias, l1)
}

fn dispatch(cmd: &Command, stdout: &mut Vec<u8>) -> std::result::Result<(), Failure> {
    let common = cmd.common();
    if common.format == Format::Csv && !matches!(cmd, Command::Path { .. }) {
        return Err(Error::InvalidArgument("--format csv is only available for path".into()).into());
    }
    let data = load(common)?;
    match cmd {
        Command::LambdaMax { .. } => {
            let lm = solver::lambda_max(&data);
            let first = if lm.lambda_max > 0.0 {
                solver::first_features(&lm.direction)
            } else {
                Vec::new()
            };
            let out = LambdaMaxJson {
                lambda_max: lm.lambda_max,
                bias: lm.bias,
                first_features: first.into_iter().map(|j| j + 1).collect(),
            };
            emit_json(common, &out, stdout)?;
        }
        Command::Solve { lambda, solve, .. } => {
            let lm = solver::lambda_max(&data).lambda_max;
            let lam = lambda.resolve(lm);
            let model = solve_primal(&data, lam, &solve.options()?)?;
            emit_json(common, &model.to_json(), stdout)?;
        }
        Command::Screen {
            lambda1,
            lambda2,
            theta1,
            solve,
            ..
        } => {
            let theta = theta_for(&data, *lambda1, theta1.as_deref(), solve)?;
            let l2 = lambda2.resolve(solver::lambda_max(&data).lambda_max);
            let ctx = build_context(&data, &theta, l2)?;
            let stats = compute_feature_stats(&data);
            let report = screen_all(&ctx, &data, &stats, Parallelism::Rayon);
            emit_json(common, &report.to_json(), stdout)?;
        }
        Command::Path {
            grid_size,
            ratio,
            verify,
            no_screen,
            solve,
            ..
        } => {
            let cfg = PathConfig {
                grid: Grid::Geometric {
                    size: *grid_size,
                    ratio: *ratio,
                },
                solver: solve.options()?,
                verify: *verify,
                screen: !*no_screen,
                parallelism: Parallelism::Rayon,
            };
            let report = run_path(&data, &cfg)?;
            match common.format {
                Format::Csv => emit(common, &report.to_csv()?, stdout)?,
                Format::Json => emit_json(common, &report, stdout)?,
            }
            let violations = report.total_violations();
            if violations > 0 {
                return Err(Failure::Verification(format!(
                    "{violations} discarded feature(s) are active in the full solve"
                )));
            }
        }
        Command::Verify {
            lambda1,
            lambda2,
            theta1,
            solve,
            ..
        } => {
            let theta = theta_for(&data, *lambda1, theta1.as_deref(), solve)?;
            let l2 = lambda2.resolve(solver::lambda_max(&data).lambda_max);
            let summary = verify_bounds(&data, &theta, l2, &OracleConfig::default())?;
            emit_json(common, &summary, stdout)?;
            if summary.max_discrepancy > VERIFY_TOL {
                return Err(Failure::Verification(format!(
                    "max discrepancy {:e} exceeds {VERIFY_TOL:e}",
                    summary.max_discrepancy
                )));
            }
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct BranchCheck {
    pub count: usize,
    pub max_discrepancy: f64,
    /// Oracle results that failed their own certificate (not compared).
    pub uncertified: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifySummary {
    pub lambda1: f64,
    pub lambda2: f64,
    pub n_samples: usize,
    pub n_features: usize,
    pub branches: BTreeMap<String, BranchCheck>,
    pub max_discrepancy: f64,
}

fn branch_name(b: Branch) -> &'static str {
    match b {
        Branch::DegenerateF => "degenerate_f",
        Branch::BetaZero => "beta_zero",
        Branch::AlphaZero => "alpha_zero",
        Branch::InteriorCorner => "interior_corner",
    }
}

/// Closed-form `neg_min` for `±f̂_j` of every feature against the oracle.
pub fn verify_bounds(data: &Dataset, theta: &ThetaVector, lambda2: f64, cfg: &OracleConfig) -> Result<VerifySummary> {
    let n = data.n_samples();
    if n > cfg.max_n {
        return Err(Error::OracleTooLarge { n, cap: cfg.max_n });
    }
    let ctx = build_context(data, theta, lambda2)?;
    let stats = compute_feature_stats(data);
    let mut branches: BTreeMap<String, BranchCheck> = BTreeMap::new();
    let mut max_discrepancy = 0.0f64;
    for (j, col) in data.columns().iter().enumerate() {
        let fhat: Vec<f64> = col
            .to_dense(n)
            .iter()
            .zip(data.labels())
            .map(|(f, y)| f * y)
            .collect();
        let wf = WeightedFeature::from_column(&ctx, data, stats[j], j);
        let fb = bound_feature(&ctx, j, &wf);
        for (sign, branch) in [(1.0, fb.branch_pos), (-1.0, fb.branch_neg)] {
            let g: Vec<f64> = fhat.iter().map(|v| sign * v).collect();
            let feature = if sign > 0.0 { wf } else { wf.negated() };
            let (closed, _) = neg_min(&ctx, &feature);
            let oracle = oracle_neg_min_with(&ctx, &g, cfg)?;
            let entry = branches.entry(branch_name(branch).to_string()).or_default();
            entry.count += 1;
            if oracle.certified {
                let d = (closed - oracle.value).abs();
                entry.max_discrepancy = entry.max_discrepancy.max(d);
                max_discrepancy = max_discrepancy.max(d);
            } else {
                entry.uncertified += 1;
            }
        }
    }
    Ok(VerifySummary {
        lambda1: ctx.lambda1,
        lambda2,
        n_samples: n,
        n_features: data.n_features(),
        branches,
        max_discrepancy,
    })
}
