use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "gausspulse",
    version,
    about = "Gaussian ISI-free pulses, orthonormal roots and their digital filters"
)]
pub struct Cli {
    #[command(flatten)]
    pub run: RunArgs,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Bandwidth parameter of the Gaussian generator.
    #[arg(long, global = true, default_value_t = 1.0)]
    pub beta: f64,

    /// Sampling step.
    #[arg(long, global = true, default_value_t = 1.0)]
    pub lambda: f64,

    /// Relative tail size at which series stop.
    #[arg(long, global = true, default_value_t = 1e-16)]
    pub rel_tol: f64,

    /// Hard cap on terms per series.
    #[arg(long, global = true, default_value_t = 100_000)]
    pub max_terms: usize,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,

    /// Write to this file instead of stdout.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,

    /// Record per-check wall-clock time (output is then not reproducible).
    #[arg(long, global = true)]
    pub timings: bool,

    /// Run outside the supported region 0.2 <= lambda*beta <= 5.
    #[arg(long, global = true)]
    pub allow_unsupported: bool,

    /// Test hook: supply the nome directly instead of deriving it.
    #[arg(long, global = true, hide = true)]
    pub inject_q: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample a pulse on a grid.
    Pulse(PulseArgs),
    /// Export a filter or the coefficient sequence a_n.
    Filter(FilterArgs),
    /// Run a verification suite; exits 1 if any check fails.
    Verify(VerifyArgs),
    /// Prefilter, sample and reconstruct a test signal.
    Reconstruct(ReconstructArgs),
}

#[derive(Debug, Clone, Args)]
pub struct GridArgs {
    /// First grid point [default: -8 lambda].
    #[arg(long, allow_negative_numbers = true)]
    pub start: Option<f64>,

    /// Grid spacing [default: lambda/32].
    #[arg(long)]
    pub step: Option<f64>,

    #[arg(long, default_value_t = 513)]
    pub count: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum PulseKind {
    Phi,
    CapitalPhi,
    PhiInt,
    S0,
    PhiOrtho,
    VarphiInt,
}

#[derive(Debug, Args)]
pub struct PulseArgs {
    #[arg(long, value_enum)]
    pub which: PulseKind,

    #[command(flatten)]
    pub grid: GridArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FilterChoice {
    #[value(name = "H1")]
    H1,
    #[value(name = "H2")]
    H2,
    #[value(name = "H3")]
    H3,
    #[value(name = "H4")]
    H4,
    Coefficients,
}

#[derive(Debug, Args)]
pub struct FilterArgs {
    #[arg(long, value_enum)]
    pub which: FilterChoice,

    /// Truncation order N [default: smallest order with neglected tail below 1e-15].
    #[arg(long)]
    pub order: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SuiteChoice {
    Identities,
    Pulses,
    Filters,
    Sampling,
    All,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, value_enum, default_value_t = SuiteChoice::All)]
    pub suite: SuiteChoice,

    /// Fixed truncation order for identities and filters.
    #[arg(long)]
    pub order: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SignalChoice {
    /// The generator itself.
    Phi,
    /// Three Gaussian components drawn from --seed.
    Mixture,
    Zero,
}

#[derive(Debug, Args)]
pub struct ReconstructArgs {
    #[arg(long = "f", value_enum, default_value_t = SignalChoice::Phi)]
    pub signal: SignalChoice,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Sample at a + n lambda, with a given in units of lambda; also runs the
    /// offset interpolant on f itself.
    #[arg(long, allow_negative_numbers = true)]
    pub offset: Option<f64>,

    #[command(flatten)]
    pub grid: GridArgs,
}
