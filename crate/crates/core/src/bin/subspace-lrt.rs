use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use subspace_lrt::experiments::{figure2_config, figure3_config, run_to_csv, ExperimentRecord};
use subspace_lrt::signalgen::ScenarioConfig;

#[derive(Parser)]
#[command(version, about = "Broadband subspace detection experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the scenario described by a TOML file.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output CSV path.
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// J = 10, transient 10 dB below the stationary sources.
    Figure3 {
        /// Output CSV path [default: figure3.csv]
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// J = 20, transient 20 dB below the stationary sources.
    Figure2 {
        /// Output CSV path [default: figure2.csv]
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args)]
struct Common {
    /// Overrides the scenario seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the number of trials per hypothesis.
    #[arg(long)]
    trials: Option<usize>,
}

fn execute(mut config: ScenarioConfig, common: Common, out: PathBuf) -> subspace_lrt::Result<()> {
    if let Some(seed) = common.seed {
        config.seed = seed;
    }
    if let Some(trials) = common.trials {
        config.num_trials = trials;
    }
    config.validate()?;
    let records = run_to_csv(&config, &out)?;
    print_summary(&records);
    eprintln!("wrote {}", out.display());
    Ok(())
}

fn print_summary(records: &[ExperimentRecord]) {
    for r in records {
        println!(
            "{:<8} T={:<3} delta={:<9.4} cond_H0={:<11.4e} cond_H1={:<11.4e} {}",
            r.method.as_str(),
            r.t,
            r.delta,
            r.cond_h0,
            r.cond_h1,
            r.status.as_str()
        );
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config, out, common } => {
            ScenarioConfig::from_path(&config).and_then(|cfg| execute(cfg, common, out))
        }
        Command::Figure3 { out, common } => {
            execute(figure3_config(), common, out.unwrap_or_else(|| "figure3.csv".into()))
        }
        Command::Figure2 { out, common } => {
            execute(figure2_config(), common, out.unwrap_or_else(|| "figure2.csv".into()))
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
