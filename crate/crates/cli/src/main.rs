use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use seirah_cli::{cmd_export_fixtures, cmd_generate, cmd_infer, cmd_simulate, cmd_sweep, CliError, Overrides, RunConfig};

#[derive(Parser, Debug)]
#[command(name = "seirah", version, about = "Interconnected SEIRAH simulation and daily infectivity inference")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// TOML run configuration; defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed (overrides the config).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for replicates and sweep cells [default: all cores].
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Output directory (overrides the config).
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Only warnings and errors.
    #[arg(long, short, global = true)]
    quiet: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build the networks; write edge lists and a summary.
    Generate,
    /// Run the epidemic forward under a given beta.
    Simulate {
        #[arg(long)]
        days: Option<usize>,
        /// Constant beta.
        #[arg(long, conflicts_with = "beta_file")]
        beta: Option<f64>,
        /// CSV with a `beta` column, e.g. the output of `infer`.
        #[arg(long)]
        beta_file: Option<PathBuf>,
        #[arg(long)]
        indicator: Option<PathBuf>,
        /// Skip the per-node history file.
        #[arg(long)]
        no_node_history: bool,
    },
    /// Infer the daily beta series from observed admissions.
    Infer {
        #[arg(long)]
        observed: Option<PathBuf>,
        #[arg(long)]
        indicator: Option<PathBuf>,
    },
    /// Score a grid of shortcut probabilities against observed admissions.
    Sweep {
        #[arg(long)]
        observed: Option<PathBuf>,
        #[arg(long)]
        indicator: Option<PathBuf>,
        /// Comma-separated residence shortcut probabilities.
        #[arg(long, value_delimiter = ',')]
        p_residence: Option<Vec<f64>>,
        /// Comma-separated work shortcut probabilities.
        #[arg(long, value_delimiter = ',')]
        p_work: Option<Vec<f64>>,
        #[arg(long)]
        rmse_threshold: Option<f64>,
    },
    /// Write synthetic observed/indicator files from a known beta profile.
    ExportFixtures {
        #[arg(long)]
        days: Option<usize>,
        /// Constant ground-truth beta.
        #[arg(long)]
        beta: Option<f64>,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Generate => "generate",
            Command::Simulate { .. } => "simulate",
            Command::Infer { .. } => "infer",
            Command::Sweep { .. } => "sweep",
            Command::ExportFixtures { .. } => "export-fixtures",
        }
    }

    fn overrides(&self, common: &Common) -> Overrides {
        let mut o = Overrides {
            seed: common.seed,
            out_dir: common.out_dir.clone(),
            ..Overrides::default()
        };
        match self {
            Command::Generate => {}
            Command::Simulate {
                days,
                beta,
                beta_file,
                indicator,
                no_node_history,
            } => {
                o.days = *days;
                o.beta = *beta;
                o.beta_file = beta_file.clone();
                o.indicator = indicator.clone();
                o.no_node_history = *no_node_history;
            }
            Command::Infer { observed, indicator } => {
                o.observed = observed.clone();
                o.indicator = indicator.clone();
            }
            Command::Sweep {
                observed,
                indicator,
                p_residence,
                p_work,
                rmse_threshold,
            } => {
                o.observed = observed.clone();
                o.indicator = indicator.clone();
                o.p_residence = p_residence.clone();
                o.p_work = p_work.clone();
                o.rmse_threshold = *rmse_threshold;
            }
            Command::ExportFixtures { days, beta } => {
                o.days = *days;
                o.beta = *beta;
            }
        }
        o
    }
}

fn init_logging(quiet: bool, command: &str) {
    let level = if quiet {
        log::LevelFilter::Warn
    } else {
        log::LevelFilter::Info
    };
    let mut builder = env_logger::Builder::new();
    builder.filter_level(level).format_timestamp(None);
    if command == "sweep" {
        // per-day lines of every cell would drown the output
        builder.filter_module("seirah::progress", log::LevelFilter::Warn);
    }
    builder.parse_default_env().init();
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(w) = cli.common.workers {
        if w == 0 {
            return Err(CliError::Validation("--workers: must be >= 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build_global()
            .map_err(|e| CliError::Runtime(format!("cannot start worker pool: {e}")))?;
    }
    let mut config = match &cli.common.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    let name = cli.command.name();
    cli.command.overrides(&cli.common).apply(&mut config, name);
    let manifest = match cli.command {
        Command::Generate => cmd_generate(&config)?,
        Command::Simulate { .. } => cmd_simulate(&config)?,
        Command::Infer { .. } => cmd_infer(&config)?,
        Command::Sweep { .. } => cmd_sweep(&config)?,
        Command::ExportFixtures { .. } => cmd_export_fixtures(&config)?,
    };
    log::info!(
        "{name} finished: {} files in {} (config {})",
        manifest.outputs.len(),
        config.output.dir.display(),
        &manifest.config_hash[..12]
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    init_logging(cli.common.quiet, cli.command.name());
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            log::error!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
