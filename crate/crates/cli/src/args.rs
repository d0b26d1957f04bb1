use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use condlab::{NormIndex, PrecisionMode, ProblemKind, DEFAULT_MAX_ENUM_DIM};

#[derive(Debug, Parser)]
#[command(
    name = "condlab",
    version,
    about = "Condition numbers, operator norms and random triangular matrix experiments"
)]
pub struct Cli {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    pub format: Format,

    /// Largest dimension for which sign-vector enumeration is attempted.
    #[arg(long, default_value_t = DEFAULT_MAX_ENUM_DIM, global = true)]
    pub max_enum_dim: usize,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Operator norm ||A||_rs with a norm-attaining vector.
    Norm(MatrixArgs),
    /// kappa_rs(A) = ||A||_rs ||A^-1||_sr.
    Kappa(MatrixArgs),
    /// Closed-form condition number of one of the five problems.
    Cond(CondArgs),
    /// Mixed condition number of solving Ax = b with both A and b perturbed.
    Mixed(MatrixVectorArgs),
    /// Distance to the nearest singular matrix.
    Dist(MatrixArgs),
    /// Minimal perturbation E making A + E singular.
    NearestSingular(MatrixArgs),
    /// Condition number estimated from its definition by sampling.
    Estimate(EstimateArgs),
    /// Forward substitution for a lower triangular system.
    SolveTri(TriArgs),
    /// Forward substitution followed by the componentwise backward error check.
    VerifyTri(TriArgs),
    /// Monte Carlo experiment on random triangular matrices.
    Experiment(ExperimentArgs),
}

fn parse_norm(s: &str) -> Result<NormIndex, String> {
    s.parse().map_err(|e: condlab::Error| e.to_string())
}

fn parse_kind(s: &str) -> Result<ProblemKind, String> {
    s.parse().map_err(|e: condlab::Error| e.to_string())
}

fn parse_precision(s: &str) -> Result<PrecisionMode, String> {
    s.parse().map_err(|e: condlab::Error| e.to_string())
}

#[derive(Debug, Args)]
pub struct PairArgs {
    /// Norm on the domain: 1, 2 or inf.
    #[arg(long, value_parser = parse_norm, default_value = "2")]
    pub r: NormIndex,
    /// Norm on the codomain: 1, 2 or inf.
    #[arg(long, value_parser = parse_norm, default_value = "2")]
    pub s: NormIndex,
}

#[derive(Debug, Args)]
pub struct MatrixArgs {
    /// Matrix file (CSV or MatrixMarket array).
    #[arg(long)]
    pub matrix: PathBuf,
    #[command(flatten)]
    pub pair: PairArgs,
}

#[derive(Debug, Args)]
pub struct MatrixVectorArgs {
    #[arg(long)]
    pub matrix: PathBuf,
    /// Vector file (one row or one column, CSV or MatrixMarket array).
    #[arg(long)]
    pub vector: PathBuf,
    #[command(flatten)]
    pub pair: PairArgs,
}

#[derive(Debug, Args)]
pub struct CondArgs {
    /// inversion, mat-vec, solve-fixed-a, solve-fixed-b or solve-both.
    #[arg(long, value_parser = parse_kind, default_value = "inversion")]
    pub kind: ProblemKind,
    #[arg(long)]
    pub matrix: PathBuf,
    /// x for mat-vec, b for the solve problems.
    #[arg(long)]
    pub vector: Option<PathBuf>,
    #[command(flatten)]
    pub pair: PairArgs,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    #[command(flatten)]
    pub problem: CondArgs,
    /// Strictly decreasing perturbation sizes, comma separated.
    #[arg(long, value_delimiter = ',', default_values_t = [1e-4, 1e-5, 1e-6, 1e-7])]
    pub delta: Vec<f64>,
    /// Random perturbations per delta.
    #[arg(long, default_value_t = 1000)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct TriArgs {
    /// Lower triangular matrix file.
    #[arg(long)]
    pub matrix: PathBuf,
    /// Right-hand side file.
    #[arg(long)]
    pub vector: PathBuf,
    /// working (binary64) or reduced (emulated binary32).
    #[arg(long, value_parser = parse_precision, default_value = "working")]
    pub precision: PrecisionMode,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ExperimentKind {
    /// ||L^-1||_F^2 for unit lower triangular Gaussian L.
    FrobInv,
    /// kappa_2(L)^2 for unit lower triangular Gaussian L.
    KappaSq,
    /// ln kappa_2(L) for lower triangular Gaussian L.
    LogKappa,
    /// ln kappa_2(L) for the QL factor of a Gaussian matrix.
    Ql,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    #[arg(value_enum)]
    pub kind: ExperimentKind,
    /// Matrix sizes, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    pub n: Vec<usize>,
    #[arg(long, default_value_t = 10_000)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// For frob-inv: also summarize each column sum of L^-1 separately.
    #[arg(long)]
    pub columns: bool,
}
