use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Pivoted cross approximation and pivoted Cholesky for SPSD matrices.
///
/// Matrix files are either binary PCDM (magic `PCDM`, u64 LE rows and
/// columns, column-major binary64 LE values) or CSV (one row per line, `#`
/// comments). Files ending in `.csv` are read as CSV, everything else as
/// binary. Without --rank or --tol, factorizations stop at the dynamic
/// tolerance `l * u * mean|M_ij|`.
#[derive(Parser, Debug)]
#[command(name = "pivotal", version, about, long_about)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Diagonal or fully pivoted cross approximation of a matrix.
    Ca(CaArgs),
    /// Pivoted Cholesky decomposition of an SPSD matrix.
    Pcd(PcdArgs),
    /// Log-determinant of an SPSD matrix from the full-rank PCD.
    Logdet(LogdetArgs),
    /// Gaussian RBF interpolation.
    #[command(subcommand)]
    Rbf(RbfCommand),
    /// Low-rank eigendecomposition of an SPSD matrix (CA, QR, small eigenproblem).
    Eigen(EigenArgs),
    /// Karhunen-Loeve random field sampling.
    #[command(subcommand)]
    Kle(KleCommand),
    /// RBF solver benchmarks.
    #[command(subcommand)]
    Bench(BenchCommand),
}

/// Stopping rule. --rank and --tol are mutually exclusive; with neither the
/// dynamic tolerance is used.
#[derive(Args, Debug, Clone, Copy)]
pub struct StopArgs {
    /// Stop after exactly K pivots (or earlier if the remainder vanishes).
    #[arg(long, value_name = "K", conflicts_with = "tol")]
    pub rank: Option<usize>,
    /// Stop once the largest remaining entry is at most EPS.
    #[arg(long, value_name = "EPS")]
    pub tol: Option<f64>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum FileFormat {
    /// Comma-separated text, 17 significant digits.
    Csv,
    /// Binary PCDM.
    Bin,
}

#[derive(Args, Debug, Clone)]
pub struct OutputArgs {
    /// Output directory (created if missing).
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
    /// Format of matrix outputs.
    #[arg(long, value_enum, default_value_t = FileFormat::Bin)]
    pub format: FileFormat,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum CaVariant {
    /// Diagonal pivoting through a column oracle (SPSD input).
    Diag,
    /// Full pivoting on the dense matrix (any input).
    Full,
}

#[derive(Args, Debug)]
pub struct CaArgs {
    /// Input matrix.
    #[arg(long, value_name = "PATH")]
    pub input: PathBuf,
    #[command(flatten)]
    pub stop: StopArgs,
    #[command(flatten)]
    pub output: OutputArgs,
    #[arg(long, value_enum, default_value_t = CaVariant::Diag)]
    pub variant: CaVariant,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum PcdMode {
    /// n x k factor L and its k x k pivot block L*.
    Lowrank,
    /// Square factor with the unused diagonal filled in.
    Fullrank,
}

#[derive(Args, Debug)]
pub struct PcdArgs {
    /// Input matrix (SPSD).
    #[arg(long, value_name = "PATH")]
    pub input: PathBuf,
    #[command(flatten)]
    pub stop: StopArgs,
    #[command(flatten)]
    pub output: OutputArgs,
    #[arg(long, value_enum, default_value_t = PcdMode::Lowrank)]
    pub mode: PcdMode,
}

#[derive(Args, Debug)]
pub struct LogdetArgs {
    /// Input matrix (SPSD).
    #[arg(long, value_name = "PATH")]
    pub input: PathBuf,
    #[command(flatten)]
    pub stop: StopArgs,
}

#[derive(Subcommand, Debug)]
pub enum RbfCommand {
    /// Fit weights to samples. The input CSV has one point per line: the
    /// coordinates followed by the sampled value.
    Fit(RbfFitArgs),
    /// Evaluate a saved model. The input CSV holds one query point per line;
    /// an extra trailing column is treated as the true value and reported as
    /// RMSE.
    Predict(RbfPredictArgs),
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum MethodArg {
    /// Pivoted Cholesky with the reduced system.
    Pcd,
    /// Dense Cholesky of the regularized matrix.
    Chol,
    /// Dense LU of the unregularized matrix.
    Lu,
}

#[derive(Args, Debug)]
pub struct RbfFitArgs {
    /// Sample CSV: coordinates then value.
    #[arg(long, value_name = "PATH")]
    pub input: PathBuf,
    /// Shape parameter, one value or one per dimension.
    #[arg(long, value_name = "V[,V...]", value_delimiter = ',', required = true)]
    pub theta: Vec<f64>,
    #[arg(long, value_enum, default_value_t = MethodArg::Pcd)]
    pub method: MethodArg,
    /// Regularization for --method chol (default n * u * mean|Phi_ij|).
    #[arg(long, value_name = "LAMBDA")]
    pub lambda: Option<f64>,
    /// Stopping rule for --method pcd.
    #[command(flatten)]
    pub stop: StopArgs,
    /// Model file to write (JSON).
    #[arg(long, value_name = "PATH")]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct RbfPredictArgs {
    /// Model file written by `rbf fit`.
    #[arg(long, value_name = "PATH")]
    pub model: PathBuf,
    /// Query CSV.
    #[arg(long, value_name = "PATH")]
    pub input: PathBuf,
    /// Prediction CSV to write: coordinates then predicted value.
    #[arg(long, value_name = "PATH")]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct EigenArgs {
    /// Input matrix: SPSD matrix, or an n x k factor with --factor.
    #[arg(long, value_name = "PATH")]
    pub input: PathBuf,
    /// Treat the input as a factor A and decompose A * A^T.
    #[arg(long)]
    pub factor: bool,
    #[command(flatten)]
    pub stop: StopArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Subcommand, Debug)]
pub enum KleCommand {
    /// Draw field samples. The covariance comes from --input (a matrix
    /// file), --points (CSV of x,y,z,sigma) or --surface N (synthetic
    /// surface with N points).
    Sample(KleSampleArgs),
}

#[derive(Args, Debug)]
pub struct KleSampleArgs {
    /// Covariance matrix file.
    #[arg(long, value_name = "PATH", group = "source")]
    pub input: Option<PathBuf>,
    /// Point CSV with columns x, y, z, sigma.
    #[arg(long, value_name = "PATH", group = "source")]
    pub points: Option<PathBuf>,
    /// Number of points on the synthetic surface.
    #[arg(long, value_name = "N", group = "source")]
    pub surface: Option<usize>,
    /// Correlation lengths for --points/--surface.
    #[arg(long, value_name = "TX,TY,TZ", value_delimiter = ',', default_value = "0.1,0.2,0.01")]
    pub theta: Vec<f64>,
    /// Number of expansion terms (clamped to the rank reached).
    #[arg(long = "kprime", value_name = "K'")]
    pub k_prime: usize,
    /// Number of samples to draw.
    #[arg(long, default_value_t = 1)]
    pub samples: u64,
    /// Seed of the sample streams (and of the synthetic surface).
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub stop: StopArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Subcommand, Debug)]
pub enum BenchCommand {
    /// Fit every (n, theta, method) cell once and record RMSE and k.
    Sweep(BenchArgs),
    /// Pick the best theta per (n, method) and time repeated fits there.
    Converge(BenchArgs),
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum FunctionArg {
    /// (6x-2)^2 sin(12x-4) on [0,1].
    F1,
    /// Rosenbrock on [-1,1]^2.
    F2,
}

/// Set PIVOTAL_THREADS to cap the number of cells run in parallel.
#[derive(Args, Debug)]
pub struct BenchArgs {
    #[arg(long, value_enum, default_value_t = FunctionArg::F1)]
    pub function: FunctionArg,
    /// Sample sizes.
    #[arg(long, value_name = "N[,N...]", value_delimiter = ',', required = true)]
    pub n: Vec<usize>,
    /// Smallest shape parameter of the log-spaced grid.
    #[arg(long, default_value_t = 0.001)]
    pub theta_min: f64,
    /// Largest shape parameter.
    #[arg(long, default_value_t = 1.5)]
    pub theta_max: f64,
    /// Number of grid points.
    #[arg(long, default_value_t = 200)]
    pub theta_count: usize,
    /// Methods to compare.
    #[arg(long, value_enum, value_delimiter = ',', default_values_t = [MethodArg::Pcd, MethodArg::Chol, MethodArg::Lu])]
    pub methods: Vec<MethodArg>,
    /// Test points for the RMSE.
    #[arg(long, default_value_t = 10_000)]
    pub test_points: usize,
    /// Fits averaged per timing (converge only).
    #[arg(long, default_value_t = 100)]
    pub repetitions: usize,
    /// Output directory for results.csv and the gnuplot files.
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
}
