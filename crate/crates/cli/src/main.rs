use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use estimator::commands;

/// Guaranteed interval state estimation from scenario files.
#[derive(Parser)]
#[command(name = "estimator", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the scenario's observer and write bounds and truth to a CSV file.
    Run {
        scenario: String,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Synthesize an observer gain from the scenario's [linear] block.
    Gain {
        scenario: String,
        #[arg(long, allow_hyphen_values = true)]
        s_min: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        l_bound: Option<f64>,
    },
    /// Run several variants on one measurement realization.
    Compare {
        scenario: String,
        /// Comma-separated list such as `gmac@gain2,no_measurements,no_constraints@gain1`.
        #[arg(long, value_delimiter = ',', required = true)]
        variants: Vec<String>,
        #[arg(short, long)]
        output: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (mut out, mut err) = (std::io::stdout(), std::io::stderr());
    let code = match cli.command {
        Command::Run { scenario, output } => commands::cmd_run(&scenario, &output, &mut out, &mut err),
        Command::Gain { scenario, s_min, l_bound } => {
            commands::cmd_gain(&scenario, s_min, l_bound, &mut out, &mut err)
        }
        Command::Compare { scenario, variants, output } => {
            commands::cmd_compare(&scenario, &variants, &output, &mut out, &mut err)
        }
    };
    ExitCode::from(code as u8)
}
