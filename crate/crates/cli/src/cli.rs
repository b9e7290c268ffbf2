use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(
    name = "sccp",
    version,
    about = "Parse, compile and simulate stochastic concurrent constraint programs"
)]
pub struct Cli {
    /// Log verbosity (error, warn, info, debug, trace); RUST_LOG also works.
    #[arg(long, global = true)]
    pub log_level: Option<String>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Check a model file and print its diagnostics.
    Parse(ParseArgs),
    /// Print the transition systems or the hybrid automaton of a model.
    Compile(CompileArgs),
    /// Simulate one trajectory and write it as CSV.
    Simulate(SimulateArgs),
    /// Simulate many replicates and write summary reports.
    Ensemble(EnsembleArgs),
    /// Re-run the command recorded in a manifest.
    Replay(ReplayArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Builtin {
    Prostate,
}

/// Where the model comes from.
#[derive(Args, Debug, Clone)]
pub struct ModelArgs {
    /// Model file in the sccp language.
    #[arg(conflicts_with = "builtin", required_unless_present = "builtin")]
    pub file: Option<PathBuf>,
    /// Built-in model instead of a file.
    #[arg(long, value_enum)]
    pub builtin: Option<Builtin>,
    /// Therapy policy of the built-in prostate model: cas or ias.
    #[arg(long, default_value = "cas", requires = "builtin")]
    pub policy: String,
    /// Variant of the built-in prostate model: base, random-psa-rate or hidden.
    #[arg(long, default_value = "base", requires = "builtin")]
    pub variant: String,
    /// Parameter override `name=value`; repeatable.
    #[arg(long = "param", value_name = "NAME=VALUE")]
    pub params: Vec<String>,
}

#[derive(Args, Debug)]
pub struct ParseArgs {
    #[command(flatten)]
    pub model: ModelArgs,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Emit {
    Rts,
    Tdsha,
    Dot,
}

#[derive(Args, Debug)]
pub struct CompileArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Partition: all-discrete, all-continuous, optionally followed by
    /// `,agent.branch=c|d` overrides.
    #[arg(long, default_value = "all-discrete")]
    pub kappa: String,
    #[arg(long, value_enum, default_value = "tdsha")]
    pub emit: Emit,
    /// Output file (standard output when absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct RunArgs {
    #[arg(long, default_value = "all-discrete")]
    pub kappa: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1000.0)]
    pub t_end: f64,
    /// Sampling interval; every jump is recorded when absent (simulate only).
    #[arg(long)]
    pub grid: Option<f64>,
    /// Relative tolerance of the flow integrator.
    #[arg(long, default_value_t = 1e-6)]
    pub rtol: f64,
    /// Absolute tolerance of the flow integrator.
    #[arg(long, default_value_t = 1e-9)]
    pub atol: f64,
    /// Output directory; defaults to $SCCP_OUT_DIR, then `sccp-out`.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub run: RunArgs,
    /// Also write state indicators and the clock.
    #[arg(long)]
    pub all_columns: bool,
    /// Log stochastic jumps as well as instantaneous transitions.
    #[arg(long, conflicts_with = "no_events")]
    pub log_all_events: bool,
    /// Keep no event log and write no events.csv.
    #[arg(long)]
    pub no_events: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Report {
    Stats,
    Extinction,
    NoiseScaling,
}

#[derive(Args, Debug)]
pub struct EnsembleArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub run: RunArgs,
    /// Number of replicates.
    #[arg(long, default_value_t = 100)]
    pub n: u64,
    #[arg(long, value_enum, default_value = "stats")]
    pub report: Report,
    /// Population scalings: sets N0, OmegaZ and OmegaV. Comma separated; a
    /// list is only allowed with the noise-scaling report.
    #[arg(long, value_delimiter = ',')]
    pub n0: Vec<f64>,
    /// Variable whose coefficient of variation is fitted.
    #[arg(long, default_value = "V")]
    pub var: String,
    /// Time at which the coefficient of variation is measured.
    #[arg(long, default_value_t = 200.0)]
    pub at: f64,
    /// Worker threads for replicates (all cores when absent).
    #[arg(long)]
    pub jobs: Option<usize>,
}

#[derive(Args, Debug)]
pub struct ReplayArgs {
    /// Manifest written by an earlier run.
    pub manifest: PathBuf,
    /// Output directory for the replayed run.
    #[arg(long)]
    pub out: Option<PathBuf>,
}
