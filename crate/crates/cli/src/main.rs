//! `mmqkd`: command-line front end for the multimode CV QKD security
//! toolkit. Subcommands compute single key-rate reports, parameter sweeps,
//! security-region boundaries, effective channel parameters under partial
//! knowledge, and fluctuating-source simulations, emitting plot-ready CSV.
//!
//! Exit codes: 0 success, 2 validation error, 3 I/O error, 4 numerical
//! failure.

mod commands;
mod config;
mod output;

use clap::{Args, Parser, Subcommand};

use config::{AttackArg, AxisArg, ScenarioConfig, TrustArg};

#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Io(String),
    Numerical(String),
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Io(_) => 3,
            CliError::Numerical(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Validation(m) | CliError::Io(m) | CliError::Numerical(m) => m,
        }
    }
}

#[derive(Parser)]
#[command(
    name = "mmqkd",
    version,
    about = "Key-rate bounds for entanglement-based CV QKD with multimode sources and detectors"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Flags shared by every subcommand.
#[derive(Args, Clone, Default)]
struct CommonArgs {
    /// Per-mode source variances in shot-noise units (comma separated)
    #[arg(long = "modes", value_delimiter = ',')]
    modes: Option<Vec<f64>>,

    /// Detection weights for both sides: raw gains, normalized internally
    /// (with --weights-squared the values are squared-weight proportions)
    #[arg(long, value_delimiter = ',')]
    weights: Option<Vec<f64>>,

    /// Alice-side weights when different from --weights
    #[arg(long = "alice-weights", value_delimiter = ',')]
    alice_weights: Option<Vec<f64>>,

    /// Bob-side weights when different from --weights
    #[arg(long = "bob-weights", value_delimiter = ',')]
    bob_weights: Option<Vec<f64>>,

    /// Interpret weight lists as lambda^2 proportions
    #[arg(long = "weights-squared")]
    weights_squared: bool,

    /// Channel transmittance in (0, 1]
    #[arg(long = "T")]
    transmittance: Option<f64>,

    /// Fiber distance in km at -0.2 dB/km, alternative to --T
    #[arg(long = "distance-km")]
    distance_km: Option<f64>,

    /// Detection trust model (defaults to untrusted; contour runs both)
    #[arg(long, value_enum)]
    trust: Option<TrustArg>,

    /// Attack class (defaults to collective)
    #[arg(long, value_enum)]
    attack: Option<AttackArg>,

    /// Reconciliation efficiency in (0, 1]
    #[arg(long)]
    beta: Option<f64>,

    /// TOML run configuration; command-line flags override file values
    #[arg(long)]
    config: Option<String>,

    /// Write output to this path instead of stdout
    #[arg(long)]
    out: Option<String>,

    /// Clamp negative key rates to zero in the output
    #[arg(long)]
    clamp: bool,

    /// Worker threads for grid scans (0 or unset = automatic)
    #[arg(long, env = "MMQKD_JOBS")]
    jobs: Option<usize>,

    /// Print the resolved configuration as TOML instead of running
    #[arg(long = "dump-config")]
    dump_config: bool,
}

#[derive(Args)]
struct KeyrateArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Channel excess noise in shot-noise units
    #[arg(long = "eps")]
    excess_noise: Option<f64>,
    /// Emit the report as JSON
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Channel excess noise in shot-noise units
    #[arg(long = "eps")]
    excess_noise: Option<f64>,
    /// Swept parameter
    #[arg(long, value_enum)]
    axis: Option<AxisArg>,
    #[arg(long)]
    from: Option<f64>,
    #[arg(long)]
    to: Option<f64>,
    #[arg(long)]
    steps: Option<usize>,
    /// Mode index for --axis variance
    #[arg(long)]
    mode: Option<usize>,
}

#[derive(Args)]
struct ContourArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Excess-noise values, one boundary line each (comma separated)
    #[arg(long = "eps", value_delimiter = ',')]
    eps_list: Option<Vec<f64>>,
    #[arg(long = "v2-from")]
    v2_from: Option<f64>,
    #[arg(long = "v2-to")]
    v2_to: Option<f64>,
    #[arg(long = "v2-steps")]
    v2_steps: Option<usize>,
    /// Upper end of the first-mode variance search bracket
    #[arg(long = "v1-max")]
    v1_max: Option<f64>,
    /// Bisection stops when |K| falls below this
    #[arg(long = "k-tolerance")]
    k_tolerance: Option<f64>,
}

#[derive(Args)]
struct Table1Args {
    #[command(flatten)]
    common: CommonArgs,
    /// Channel excess noise in shot-noise units
    #[arg(long = "eps")]
    excess_noise: Option<f64>,
    /// Mode grouping per knowledge level, e.g. "0|1,2" (repeatable)
    #[arg(long = "grouping")]
    groupings: Option<Vec<String>>,
}

#[derive(Args)]
struct CompareKnowledgeArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Channel excess noise in shot-noise units
    #[arg(long = "eps")]
    excess_noise: Option<f64>,
    /// Distance grid start in km
    #[arg(long)]
    from: Option<f64>,
    /// Distance grid end in km
    #[arg(long)]
    to: Option<f64>,
    #[arg(long)]
    steps: Option<usize>,
    /// Mode grouping per knowledge level, e.g. "0|1,2" (repeatable)
    #[arg(long = "grouping")]
    groupings: Option<Vec<String>>,
}

#[derive(Args)]
struct MonteCarloArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Channel excess noise in shot-noise units
    #[arg(long = "eps")]
    excess_noise: Option<f64>,
    /// Mean of the per-mode variance law
    #[arg(long)]
    mean: Option<f64>,
    /// Second parameter of the normal law (variance by default)
    #[arg(long)]
    spread: Option<f64>,
    /// Read --spread as a standard deviation instead of a variance
    #[arg(long = "spread-is-std")]
    spread_is_std: bool,
    #[arg(long = "n-modes")]
    n_modes: Option<usize>,
    #[arg(long)]
    runs: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct DumpConfigArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Channel excess noise in shot-noise units
    #[arg(long = "eps")]
    excess_noise: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Compute one key-rate report
    Keyrate(KeyrateArgs),
    /// Sweep one parameter and emit a CSV table
    Sweep(SweepArgs),
    /// Security-region boundaries in the (V1, V2) plane as CSV
    Contour(ContourArgs),
    /// Effective source/channel parameters under partial mode knowledge
    Table1(Table1Args),
    /// Key rate versus distance for each knowledge level
    CompareKnowledge(CompareKnowledgeArgs),
    /// Fluctuating-source simulation series as CSV
    Montecarlo(MonteCarloArgs),
    /// Print the resolved configuration as TOML
    DumpConfig(DumpConfigArgs),
}

impl CommonArgs {
    fn scenario_flags(&self, excess_noise: Option<f64>) -> ScenarioConfig {
        ScenarioConfig {
            modes: self.modes.clone(),
            weights: self.weights.clone(),
            alice_weights: self.alice_weights.clone(),
            bob_weights: self.bob_weights.clone(),
            weights_squared: self.weights_squared,
            transmittance: self.transmittance,
            distance_km: self.distance_km,
            excess_noise,
            attack: self.attack,
            trust: self.trust,
            beta: self.beta,
        }
    }
}

fn main() {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Keyrate(args) => commands::keyrate(args),
        Command::Sweep(args) => commands::sweep(args),
        Command::Contour(args) => commands::contour(args),
        Command::Table1(args) => commands::table1(args),
        Command::CompareKnowledge(args) => commands::compare_knowledge(args),
        Command::Montecarlo(args) => commands::montecarlo(args),
        Command::DumpConfig(args) => commands::dump_config(args),
    };
    match result {
        Ok(()) => {}
        Err(e) => {
            eprintln!("error: {}", e.message());
            std::process::exit(e.exit_code());
        }
    }
}
