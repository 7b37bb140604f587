use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "wallach",
    version,
    about = "Curvature regions and normalized Ricci flow on generalized Wallach spaces"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample a named boundary, separatrix or invariant curve.
    SampleCurve(SampleCurveArgs),
    /// Integrate the reduced flow from an initial metric.
    Integrate(IntegrateArgs),
    /// Print the curvature signs of a metric as JSON.
    Classify(ClassifyArgs),
    /// List the equilibria on the unit-volume surface with their linearization.
    Equilibria(EquilibriaArgs),
    /// Run a verification suite and write its report.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Rk4,
    Rk45,
}

#[derive(Debug, Args)]
pub struct SampleCurveArgs {
    /// s1..s3, r1i..r3j, l1..l3 or I1..I3.
    #[arg(long)]
    pub curve: String,
    /// Space parameter; decimals or a rational such as 1/6.
    #[arg(long)]
    pub a: Option<String>,
    #[arg(long, default_value_t = 0.01, allow_negative_numbers = true)]
    pub t_min: f64,
    #[arg(long, default_value_t = 100.0, allow_negative_numbers = true)]
    pub t_max: f64,
    #[arg(long, default_value_t = 200)]
    pub n: usize,
    /// Geometric spacing of the parameter grid; `--log-spacing false` for uniform.
    #[arg(long, default_value_t = true, num_args = 0..=1, default_missing_value = "true", action = clap::ArgAction::Set)]
    pub log_spacing: bool,
    /// Sample r-curves on the full parameter range instead of the trimmed arc.
    #[arg(long)]
    pub untrimmed: bool,
    /// Sample l-curves at any a.
    #[arg(long)]
    pub force_kahler: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct IntegrateArgs {
    /// Initial metric `x1,x2,x3`; rescaled to unit volume before integrating.
    #[arg(long, allow_hyphen_values = true)]
    pub x0: String,
    #[arg(long)]
    pub a: String,
    #[arg(long, default_value_t = 10.0)]
    pub t_end: f64,
    #[arg(long, value_enum, default_value_t = MethodArg::Rk45)]
    pub method: MethodArg,
    /// Fixed step for rk4.
    #[arg(long, conflicts_with = "rel_tol")]
    pub dt: Option<f64>,
    /// Relative and absolute tolerance for rk45.
    #[arg(long)]
    pub rel_tol: Option<f64>,
    #[arg(long)]
    pub renormalize: bool,
    #[arg(long)]
    pub events: bool,
    #[arg(long, default_value_t = 1)]
    pub store_every: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub x: String,
    #[arg(long)]
    pub a: String,
}

#[derive(Debug, Args)]
pub struct EquilibriaArgs {
    #[arg(long)]
    pub a: String,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// all, theorem1, theorem2, inclusion, kahler or asymptotics.
    #[arg(long, default_value = "all")]
    pub suite: String,
    /// A single value, a comma-separated list, or `sweep` for the default sweep.
    #[arg(long)]
    pub a: Option<String>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Random metrics per a in the inclusion check.
    #[arg(long, default_value_t = 100_000)]
    pub n_random: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}
