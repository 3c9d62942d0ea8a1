//! `vbspower`: dataset generation, model fitting/training, prediction and
//! scenario evaluation over a file-based artifact registry.
//!
//! Exit codes: 0 success, 1 usage error, 2 data/model error, 3 infeasible
//! prediction.

mod commands;
mod registry;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use vbspower::eval::Scenario;
use vbspower::regression::Variant;

use commands::GenOverrides;
use registry::Registry;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(anyhow::Error),
    Infeasible(String),
}

#[derive(Parser)]
#[command(
    name = "vbspower",
    version,
    about = "CPU power models for virtualized base-station schedulers",
    after_help = "All randomness flows from explicit --seed flags; reruns with identical \
flags produce identical files. Model timestamps come from SOURCE_DATE_EPOCH \
(defaulting to the epoch itself)."
)]
struct Cli {
    /// Registry directory (or set VBSPOWER_REGISTRY); created on demand.
    #[arg(long, global = true)]
    registry: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate synthetic measurement datasets
    Generate(GenerateArgs),
    /// Fit a regression model to a dataset CSV
    Fit(FitArgs),
    /// Train (or fine-tune) the neural-network model on a dataset CSV
    Train(TrainArgs),
    /// Run an evaluation scenario over one or more seeds
    Eval(EvalArgs),
    /// Predict power for a single configuration with a saved model
    Predict(PredictArgs),
    /// Inspect or rebuild the artifact registry index
    Registry(RegistryArgs),
}

#[derive(Args)]
pub struct GenerateArgs {
    /// Platform alias (NUC1, NUC2, Server1, Server2)
    #[arg(long)]
    platform: String,
    /// Generate the platform's full reference campaign (both datasets)
    #[arg(long, conflicts_with_all = ["scheduler", "n"])]
    campaign: bool,
    /// Scheduler for a single dataset (`default` or `custom`)
    #[arg(long)]
    scheduler: Option<String>,
    /// Number of samples for a single dataset
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// TOML file with generator overrides (flags take precedence)
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    snr_lo: Option<f64>,
    #[arg(long)]
    snr_hi: Option<f64>,
    /// Measurement noise standard deviation, watts
    #[arg(long)]
    noise: Option<f64>,
    #[arg(long)]
    outlier_prob: Option<f64>,
    #[arg(long)]
    outlier_lo: Option<f64>,
    #[arg(long)]
    outlier_hi: Option<f64>,
    #[arg(long)]
    map_slope: Option<f64>,
    #[arg(long)]
    map_intercept: Option<f64>,
    #[arg(long)]
    map_jitter: Option<f64>,
}

impl GenerateArgs {
    fn overrides(&self) -> GenOverrides {
        GenOverrides {
            snr_lo: self.snr_lo,
            snr_hi: self.snr_hi,
            noise_sigma_w: self.noise,
            outlier_prob: self.outlier_prob,
            outlier_lo: self.outlier_lo,
            outlier_hi: self.outlier_hi,
            map_slope: self.map_slope,
            map_intercept: self.map_intercept,
            map_jitter_sigma: self.map_jitter,
            airtime_grid: None,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FitKind {
    /// The threshold model for default-scheduler data
    DefaultReg,
    /// The polynomial model for custom-scheduler data
    CustomReg,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum VariantArg {
    Continuous,
    Verbatim,
}

#[derive(Args)]
struct FitArgs {
    /// Dataset CSV to fit
    #[arg(long)]
    dataset: PathBuf,
    #[arg(long, value_enum)]
    model_kind: FitKind,
    /// Low-SNR branch convention for the custom-scheduler model
    #[arg(long, value_enum, default_value_t = VariantArg::Continuous)]
    variant: VariantArg,
    /// Scenario tag recorded in the model file
    #[arg(long, default_value = "adhoc")]
    scenario: String,
    /// Seed recorded in the model file (defaults to the dataset's)
    #[arg(long)]
    seed: Option<u64>,
    /// Output path (defaults into the registry's models directory)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
pub struct TrainArgs {
    /// Dataset CSV to train on
    #[arg(long)]
    pub dataset: PathBuf,
    #[arg(long, default_value_t = 220)]
    pub epochs: usize,
    #[arg(long, default_value_t = 32)]
    pub batch: usize,
    #[arg(long, default_value_t = 0.001)]
    pub lr: f64,
    /// L1 activity-regularization coefficient
    #[arg(long, default_value_t = 1e-4)]
    pub l1: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Warm-start from an existing mlp model file
    #[arg(long)]
    pub warm_start: Option<PathBuf>,
    /// Scenario tag recorded in the model file
    #[arg(long, default_value = "adhoc")]
    pub scenario: String,
    /// Output path (defaults into the registry's models directory)
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    /// Scenario: A (default->default), B (whole default->custom test),
    /// C (custom->custom test) or D (fine-tune transfer, nn only)
    #[arg(long)]
    scenario: String,
    #[arg(long)]
    platform: String,
    /// Single seed, inclusive range `a..b`, or comma list
    #[arg(long, default_value = "0")]
    seeds: String,
    /// Comma list of `regression`, `nn`
    #[arg(long)]
    model_kinds: Option<String>,
}

#[derive(Args)]
pub struct PredictArgs {
    /// Model file to load
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub airtime: f64,
    /// SNR in dB
    #[arg(long)]
    pub snr: f64,
    #[arg(long)]
    pub mcs: u8,
}

#[derive(Args)]
struct RegistryArgs {
    #[command(subcommand)]
    action: RegistryAction,
}

#[derive(Subcommand)]
enum RegistryAction {
    /// Print the index
    List,
    /// Rescan the artifact directories and rewrite the index
    Rebuild,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };

    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Data(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(CliError::Infeasible(msg)) => {
            eprintln!("infeasible: {msg}");
            ExitCode::from(3)
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let root = cli
        .registry
        .or_else(|| std::env::var_os("VBSPOWER_REGISTRY").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("registry"));
    let reg = Registry::open(root).map_err(CliError::Data)?;

    match cli.command {
        Command::Generate(args) => commands::cmd_generate(&reg, &args),
        Command::Fit(args) => {
            let variant = match args.variant {
                VariantArg::Continuous => Variant::Continuous,
                VariantArg::Verbatim => Variant::Verbatim,
            };
            commands::cmd_fit(
                &reg,
                &args.dataset,
                args.model_kind,
                variant,
                &args.scenario,
                args.seed,
                args.out.as_deref(),
            )
        }
        Command::Train(args) => commands::cmd_train(&reg, &args),
        Command::Eval(args) => {
            let scenario = Scenario::parse(&args.scenario).ok_or_else(|| {
                CliError::Usage(format!(
                    "unknown scenario `{}` (expected A, B, C or D)",
                    args.scenario
                ))
            })?;
            let seeds = commands::parse_seeds(&args.seeds)?;
            let kinds = match &args.model_kinds {
                Some(spec) => commands::parse_kinds(spec)?,
                None if scenario == Scenario::TransferFineTune => {
                    vec![vbspower::eval::ModelChoice::Nn]
                }
                None => vec![
                    vbspower::eval::ModelChoice::Regression,
                    vbspower::eval::ModelChoice::Nn,
                ],
            };
            commands::cmd_eval(&reg, scenario, &args.platform, &seeds, &kinds)
        }
        Command::Predict(args) => commands::cmd_predict(&args),
        Command::Registry(args) => match args.action {
            RegistryAction::List => commands::cmd_registry_list(&reg),
            RegistryAction::Rebuild => commands::cmd_registry_rebuild(&reg),
        },
    }
}
