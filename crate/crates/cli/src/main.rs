use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod output;

/// Exit code when every run completed.
pub const EXIT_OK: u8 = 0;
/// Exit code when the command could not run (bad input, synthesis failure).
pub const EXIT_FAILED: u8 = 1;
/// Exit code for invalid arguments.
pub const EXIT_USAGE: u8 = 2;
/// Exit code when simulations ran but at least one diverged.
pub const EXIT_DIVERGED: u8 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Run(String),
    #[error(transparent)]
    Core(#[from] indi_hinf::error::Error),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Parser, Debug)]
#[command(name = "indi-hinf", version, about = "INDI / H-infinity quadcopter control workbench")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Vehicle preset name or parameter file.
    #[arg(long)]
    pub preset: Option<String>,
    /// Seed for synthesis starts and simulation noise.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory; defaults to $INDI_HINF_OUT/<command> or runs/<command>.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct DesignArgs {
    /// Design profile name (sim, exp) or weight file.
    #[arg(long)]
    pub weights: Option<String>,
    /// Structured controller orders as "outer,inner".
    #[arg(long)]
    pub structure: Option<String>,
    /// Comma-separated controller kinds: pd, hinf-structured, hinf-full.
    /// Defaults to all three; `simulate` defaults to the scenario's choice.
    #[arg(long)]
    pub controllers: Option<String>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Design controllers for one loop and write them with their reports.
    Synth {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        design: DesignArgs,
        #[arg(long = "loop", default_value = "attitude")]
        loop_kind: String,
    },
    /// Sensitivities, margins and template checks for designed controllers.
    Analyze {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        design: DesignArgs,
        #[arg(long = "loop", default_value = "attitude")]
        loop_kind: String,
    },
    /// Run one scenario with one controller family.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        design: DesignArgs,
        /// Scenario name or file.
        #[arg(long)]
        scenario: String,
    },
    /// Run scenarios with several controller families and compare them.
    Compare {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        design: DesignArgs,
        /// Comma-separated scenario names or files.
        #[arg(long)]
        scenario: String,
    },
    /// Estimate motor lag and control effectiveness from a flight log.
    Estimate {
        #[command(flatten)]
        common: Common,
        /// Flight log CSV; a synthetic log is generated when omitted.
        #[arg(long)]
        log: Option<PathBuf>,
        /// Noise fraction of the synthetic log.
        #[arg(long, default_value_t = 0.0)]
        noise: f64,
    },
}

/// Output root from the environment, for commands without `--out`.
pub const OUT_ENV: &str = "INDI_HINF_OUT";

pub fn out_dir(common: &Common, command: &str) -> PathBuf {
    match &common.out {
        Some(p) => p.clone(),
        None => {
            let root = std::env::var_os(OUT_ENV).map(PathBuf::from).unwrap_or_else(|| Path::new("runs").to_path_buf());
            root.join(command)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { EXIT_OK });
        }
    };
    let args: Vec<String> = std::env::args().skip(1).collect();
    let res = match cli.command {
        Command::Synth { common, design, loop_kind } => commands::synth(&common, &design, &loop_kind, &args),
        Command::Analyze { common, design, loop_kind } => commands::analyze(&common, &design, &loop_kind, &args),
        Command::Simulate { common, design, scenario } => commands::simulate(&common, &design, &scenario, &args),
        Command::Compare { common, design, scenario } => commands::compare(&common, &design, &scenario, &args),
        Command::Estimate { common, log, noise } => commands::estimate(&common, log.as_deref(), noise, &args),
    };
    match res {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                CliError::Usage(_) => EXIT_USAGE,
                _ => EXIT_FAILED,
            })
        }
    }
}
