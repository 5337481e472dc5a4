use std::io;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use cvoa_cli::report::write_sweep;
use cvoa_cli::{run_command, sweep_command, CliError, Overrides, RunConfig};

#[derive(Parser)]
#[command(name = "cvoa", version, about = "Epidemic-propagation metaheuristic runner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    /// TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Base seed; overrides `epidemic.seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory; overrides `output`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Number of seeded runs; overrides `repeat`.
    #[arg(long)]
    repeat: Option<u32>,
}

impl Common {
    fn overrides(&self) -> Overrides {
        Overrides { seed: self.seed, out: self.out.clone(), repeat: self.repeat }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run a configuration and write traces and a summary.
    Run(Common),
    /// Repeat a binary configuration over several bit lengths.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Comma-separated bit lengths, e.g. 10,20,30.
        #[arg(long, value_delimiter = ',', required = true)]
        lengths: Vec<u32>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(common) => RunConfig::load(&common.config)
            .and_then(|config| run_command(config, &common.overrides()))
            .map(|summary| {
                let a = &summary.aggregates;
                println!(
                    "{} run(s), optimum reached in {}, mean iterations to optimum {}",
                    a.runs,
                    a.successes,
                    a.mean_iterations_to_optimum.map_or("-".to_string(), |m| format!("{m:.2}"))
                );
            }),
        Command::Sweep { common, lengths } => RunConfig::load(&common.config)
            .and_then(|config| sweep_command(config, lengths, &common.overrides()))
            .and_then(|rows| {
                write_sweep(io::stdout().lock(), &rows)
                    .map_err(|e| CliError::Io { path: "<stdout>".into(), source: e.into() })
            }),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
