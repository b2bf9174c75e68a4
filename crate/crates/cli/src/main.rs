use std::io;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use tracbf::commands::{self, SweepParam};
use tracbf::config;
use tracbf::error::{CliError, EXIT_USAGE};
use tracbf::presets;

/// Adaptive safety-critical control scenarios.
///
/// CONFIG is a scenario file or the name of a preset.
#[derive(Parser)]
#[command(name = "tracbf", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check the start conditions, simulate and monitor one scenario.
    Run {
        config: String,
        #[arg(short, long, default_value = "out")]
        out: PathBuf,
        /// Simulate even when the condition gate fails.
        #[arg(long)]
        force: bool,
    },
    /// Print the condition report without simulating.
    Check { config: String },
    /// Run a double-integrator scenario under RaCBF and T-RaCBF.
    Compare {
        config: String,
        #[arg(short, long, default_value = "out")]
        out: PathBuf,
    },
    /// Run a scenario once per value of one gain.
    Sweep {
        config: String,
        #[arg(long, value_enum)]
        param: Param,
        /// Comma-separated values.
        #[arg(long, allow_hyphen_values = true)]
        values: String,
        #[arg(short, long, default_value = "out")]
        out: PathBuf,
    },
    /// Print a scenario with every key filled in.
    Show { config: String },
    /// List the built-in presets.
    Presets,
}

#[derive(Clone, Copy, ValueEnum)]
enum Param {
    Beta,
    Gamma,
    #[value(name = "K", alias = "k")]
    K,
}

impl From<Param> for SweepParam {
    fn from(p: Param) -> Self {
        match p {
            Param::Beta => SweepParam::Beta,
            Param::Gamma => SweepParam::Gamma,
            Param::K => SweepParam::K,
        }
    }
}

fn execute(cmd: Command) -> tracbf::Result<u8> {
    let mut stdout = io::stdout().lock();
    match cmd {
        Command::Run { config, out, force } => commands::cmd_run(&commands::load(&config)?, &out, force, &mut stdout),
        Command::Check { config } => commands::cmd_check(&commands::load(&config)?, &mut stdout),
        Command::Compare { config, out } => commands::cmd_compare(&commands::load(&config)?, &out, &mut stdout),
        Command::Sweep { config, param, values, out } => {
            let sc = commands::load(&config)?;
            let values = config::vector(&values).map_err(|e| CliError::Usage(format!("--values: {e}")))?;
            commands::cmd_sweep(&sc, param.into(), &values, &out, &mut stdout)
        }
        Command::Show { config } => {
            print!("{}", config::serialize(&commands::load(&config)?));
            Ok(commands::EXIT_OK)
        }
        Command::Presets => {
            for name in presets::names() {
                println!("{name}");
            }
            Ok(commands::EXIT_OK)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(EXIT_USAGE);
        }
    };
    match execute(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
