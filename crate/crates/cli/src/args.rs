use std::path::PathBuf;

use clap::builder::BoolishValueParser;
use clap::{Args, Parser, Subcommand, ValueEnum};

/// Sparsest k-partition via SDP rounding.
///
/// Every flag can also be set through an environment variable named
/// `KPART_<FLAG>` (for example `KPART_K`, `KPART_T_CAP`).
#[derive(Debug, Parser)]
#[command(name = "kpart", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve the SDP relaxation only.
    Solve(GraphArgs),
    /// Round the relaxation into disjoint sets (one run).
    Round(GraphArgs),
    /// Round into a full partition of the vertex set.
    Partition(GraphArgs),
    /// Balanced relaxation, rounding and merge.
    Balanced(GraphArgs),
    /// Exact sparsest k-partition and sparsest cut by enumeration.
    Oracle(GraphArgs),
    /// Normalized Laplacian spectrum.
    Spectrum(GraphArgs),
    /// Two-clique instance where the assignment relaxation has value zero.
    GapDemo(GapArgs),
    /// Monte-Carlo audit of the separator properties on the embedding.
    AuditSeparators(AuditArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Plain,
    Balanced,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SeparatorKind {
    Raw,
    Rescaled,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// Write the report here instead of standard output.
    #[arg(long, env = "KPART_OUT")]
    pub out: Option<PathBuf>,
    /// Include wall-clock timings (makes reports non-reproducible).
    #[arg(long, env = "KPART_TIMING", value_parser = BoolishValueParser::new())]
    pub timing: bool,
}

#[derive(Debug, Clone, Args)]
pub struct GraphArgs {
    /// Graph file.
    pub input: PathBuf,
    #[arg(long, env = "KPART_K")]
    pub k: Option<usize>,
    #[arg(long, env = "KPART_EPSILON", default_value_t = 0.4)]
    pub epsilon: f64,
    /// Master seed; a fresh one is generated and recorded when omitted.
    #[arg(long, env = "KPART_SEED")]
    pub seed: Option<u64>,
    #[arg(long, env = "KPART_MODE", value_enum, default_value_t = Mode::Plain)]
    pub mode: Mode,
    /// Independent rounding runs for `partition` and `balanced`.
    #[arg(long, env = "KPART_REPS")]
    pub reps: Option<usize>,
    /// Maximum separator samples per run.
    #[arg(long = "t-cap", env = "KPART_T_CAP")]
    pub t_cap: Option<usize>,
    #[arg(long = "tol-feas", env = "KPART_TOL_FEAS", default_value_t = 1e-6)]
    pub tol_feas: f64,
    #[arg(long = "max-iters", env = "KPART_MAX_ITERS", default_value_t = 200_000)]
    pub max_iters: usize,
    /// Add triangle constraints on demand (default).
    #[arg(long, env = "KPART_LAZY", value_parser = BoolishValueParser::new(), conflicts_with = "eager")]
    pub lazy: bool,
    /// Materialize every triangle constraint up front.
    #[arg(long, env = "KPART_EAGER", value_parser = BoolishValueParser::new())]
    pub eager: bool,
    #[arg(long, env = "KPART_SEPARATOR", value_enum, default_value_t = SeparatorKind::Rescaled)]
    pub separator: SeparatorKind,
    /// Also report the exact optimum (n ≤ 12).
    #[arg(long = "compare-oracle", env = "KPART_COMPARE_ORACLE", value_parser = BoolishValueParser::new())]
    pub compare_oracle: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct GapArgs {
    #[arg(long, env = "KPART_N")]
    pub n: usize,
    #[arg(long, env = "KPART_K")]
    pub k: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct AuditArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    #[arg(long, env = "KPART_SAMPLES", default_value_t = 100_000)]
    pub samples: usize,
    /// Orthogonality parameter; defaults to 12k/ε.
    #[arg(long, env = "KPART_M")]
    pub m: Option<f64>,
    /// Separation threshold; defaults to 1 − ε/4.
    #[arg(long, env = "KPART_BETA")]
    pub beta: Option<f64>,
}
