use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "rqi", version, about = "Rayleigh quotient iteration experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Matrix eigenvectors on the unit sphere.
    Eig(EigArgs),
    /// Real eigenpairs of a symmetric tensor.
    TensorReal(TensorArgs),
    /// Enumeration of all complex eigenpair classes of a symmetric tensor.
    TensorComplex(TensorComplexArgs),
    /// Polynomial eigenvalue problems, one- or two-sided.
    Nlep(NlepArgs),
    /// Eigen-like problem on the Stiefel manifold.
    Stiefel(StiefelArgs),
    /// Invariant or density-dependent subspaces on the Grassmann manifold.
    Grassmann(GrassmannArgs),
    /// Vector Lagrangian on a graph constraint.
    Graph(GraphArgs),
    /// Enumeration counts over a grid of tensor sizes.
    VerifyCounts(VerifyArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolverKind {
    Nr,
    Chebyshev,
    RqiSchur,
    RqiTangent,
    RcSchur,
}

impl SolverKind {
    pub fn name(self) -> &'static str {
        match self {
            SolverKind::Nr => "nr",
            SolverKind::Chebyshev => "chebyshev",
            SolverKind::RqiSchur => "rqi-schur",
            SolverKind::RqiTangent => "rqi-tangent",
            SolverKind::RcSchur => "rc-schur",
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum MatrixKind {
    Symmetric,
    Nonnormal,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sides {
    One,
    Two,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum FArg {
    Linear,
    Sine,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum HArg {
    Constant,
    Quadratic,
}

fn positive(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(v) if v > 0 => Ok(v),
        _ => Err(format!("expected a positive integer, got {s:?}")),
    }
}

/// Options shared by every solve command.
#[derive(Args, Clone, Debug)]
pub struct Common {
    #[arg(long, default_value_t = 10, value_parser = positive)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = SolverKind::RqiSchur)]
    pub solver: SolverKind,
    /// Residual tolerance.
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
    #[arg(long = "max-iter", default_value_t = 100, value_parser = positive)]
    pub max_iter: usize,
    /// Result file; only the summary is printed when omitted.
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Per-iteration trace file (single trial only).
    #[arg(long)]
    pub trace: Option<PathBuf>,
    /// Include per-iteration residuals in every record.
    #[arg(long)]
    pub residuals: bool,
    /// Append local timings, marked non-normative.
    #[arg(long)]
    pub wallclock: bool,
}

#[derive(Args, Clone, Debug)]
pub struct EigArgs {
    #[arg(long, default_value_t = 20, value_parser = positive)]
    pub n: usize,
    #[arg(long, value_enum, default_value_t = MatrixKind::Symmetric)]
    pub matrix: MatrixKind,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Clone, Debug)]
pub struct TensorArgs {
    #[arg(long, default_value_t = 3, value_parser = positive)]
    pub m: usize,
    #[arg(long, default_value_t = 3, value_parser = positive)]
    pub n: usize,
    /// JSON tensor `{order, dim, entries}`; overrides `--m` and `--n`.
    #[arg(long = "tensor-file")]
    pub tensor_file: Option<PathBuf>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Clone, Debug)]
pub struct TensorComplexArgs {
    #[arg(long, default_value_t = 3, value_parser = positive)]
    pub m: usize,
    #[arg(long, default_value_t = 2, value_parser = positive)]
    pub n: usize,
    #[arg(long = "tensor-file")]
    pub tensor_file: Option<PathBuf>,
    /// Allow class counts above the desk budget.
    #[arg(long)]
    pub heavy: bool,
    /// Restart budget; defaults to a multiple of the class count.
    #[arg(long = "max-restarts", value_parser = clap::value_parser!(u64).range(1..))]
    pub max_restarts: Option<u64>,
    /// Eigenpair table export.
    #[arg(long = "pairs-output")]
    pub pairs_output: Option<PathBuf>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Clone, Debug)]
pub struct NlepArgs {
    #[arg(long, default_value_t = 20, value_parser = positive)]
    pub n: usize,
    #[arg(long, default_value_t = 4, value_parser = positive)]
    pub degree: usize,
    #[arg(long, value_enum, default_value_t = Sides::One)]
    pub sides: Sides,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Clone, Debug)]
pub struct StiefelArgs {
    #[arg(long, default_value_t = 6, value_parser = positive)]
    pub n: usize,
    #[arg(long, default_value_t = 2, value_parser = positive)]
    pub p: usize,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Clone, Debug)]
pub struct GrassmannArgs {
    #[arg(long, default_value_t = 10, value_parser = positive)]
    pub n: usize,
    #[arg(long, default_value_t = 2, value_parser = positive)]
    pub p: usize,
    /// Density coupling; without it the target is an invariant subspace of
    /// a random symmetric matrix.
    #[arg(long)]
    pub alpha: Option<f64>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Clone, Debug)]
pub struct GraphArgs {
    /// Number of free coordinates.
    #[arg(long, default_value_t = 4, value_parser = positive)]
    pub n: usize,
    #[arg(long = "f-kind", value_enum, default_value_t = FArg::Sine)]
    pub f_kind: FArg,
    #[arg(long = "h-kind", value_enum, default_value_t = HArg::Quadratic)]
    pub h_kind: HArg,
    /// Size of the start perturbation around the known solution.
    #[arg(long, default_value_t = 0.02)]
    pub perturb: f64,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Clone, Debug)]
pub struct VerifyArgs {
    /// Single order; overrides the order range.
    #[arg(long)]
    pub m: Option<usize>,
    /// Single dimension; overrides the dimension range.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long = "m-min", default_value_t = 3)]
    pub m_min: usize,
    #[arg(long = "m-max", default_value_t = 4)]
    pub m_max: usize,
    #[arg(long = "n-min", default_value_t = 2)]
    pub n_min: usize,
    #[arg(long = "n-max", default_value_t = 3)]
    pub n_max: usize,
    #[arg(long, default_value_t = 1, value_parser = positive)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub heavy: bool,
    /// Restart budget per tensor; defaults to a multiple of the class count.
    #[arg(long = "max-restarts", value_parser = clap::value_parser!(u64).range(1..))]
    pub max_restarts: Option<u64>,
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}
