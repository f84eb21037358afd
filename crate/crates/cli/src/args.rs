use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "ness-qgroup", version, about = "Exact steady states of boundary-driven quantum chains")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Build the MPO steady state, optionally against the Liouvillian oracle.
    SteadyState(SteadyStateArgs),
    /// Run the identity checks; exit code 4 names any failure.
    Verify(VerifyArgs),
    /// Current and density profile from vertex-operator contractions.
    Observables(ObservablesArgs),
    /// Current and partition function over a grid of couplings or anisotropies.
    Sweep(SweepArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModelKind {
    Xxz,
    Xxx,
    Sun,
    ThetaXxz,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
    Bin,
}

#[derive(Args, Debug, Clone)]
pub struct RunArgs {
    #[arg(long, value_enum, default_value = "xxz")]
    pub model: ModelKind,
    /// Number of sites.
    #[arg(long, default_value_t = 4)]
    pub n: usize,
    /// Anisotropy angle γ in radians (XXZ and Θ-XXZ).
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Twist angle Θ in radians (Θ-XXZ only).
    #[arg(long)]
    pub theta: Option<f64>,
    /// Dissipative coupling Γ > 0. For SU(N) the right coupling is (N-1)² Γ.
    #[arg(long, default_value_t = 1.0)]
    pub coupling: f64,
    /// Local dimension of the SU(N) chain.
    #[arg(long = "N")]
    pub species: Option<usize>,
    /// Output file; standard output when omitted (not allowed for bin).
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    /// Seed for randomized checks.
    #[arg(long, default_value_t = ness_core::verify::DEFAULT_SEED)]
    pub seed: u64,
}

#[derive(Args, Debug)]
pub struct SteadyStateArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// Also solve the Liouvillian null space and report the difference.
    #[arg(long)]
    pub oracle: bool,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum SuiteArg {
    Algebra,
    /// General sl2-invariant R-operator checks.
    #[value(name = "appendix-b", alias = "general-r")]
    GeneralR,
    All,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[arg(long, value_enum, default_value = "all")]
    pub suite: SuiteArg,
    #[arg(long, default_value_t = ness_core::verify::DEFAULT_SEED)]
    pub seed: u64,
    /// Shift added to the solved spin parameter in the boundary checks.
    /// Nonzero values exercise the failure path.
    #[arg(long, default_value_t = 0.0)]
    pub perturb_spin: f64,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ObservablesArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// Per-site occupations (and magnetization for spin 1/2).
    #[arg(long)]
    pub profile: bool,
    /// Current on the central bond.
    #[arg(long)]
    pub current: bool,
    /// Compare the partition-ratio current with the bond contraction.
    #[arg(long, requires = "current")]
    pub check_ratio: bool,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepOver {
    Coupling,
    Gamma,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    #[command(flatten)]
    pub run: RunArgs,
    #[arg(long, value_enum)]
    pub over: SweepOver,
    #[arg(long)]
    pub from: f64,
    #[arg(long)]
    pub to: f64,
    #[arg(long, default_value_t = 11)]
    pub steps: usize,
}
