use std::path::PathBuf;
use std::process::ExitCode;

use catpump_cli::commands::{convergence, CONVERGENCE_DIMS};
use catpump_cli::{run, CliError, Command, RunConfig};
use clap::Parser;

#[derive(Parser)]
#[command(name = "catpump", version, about = "Synchronous-pump cat-state sweeps")]
struct Cli {
    #[arg(value_enum)]
    command: Command,

    /// TOML configuration file
    #[arg(long)]
    config: PathBuf,

    /// Output CSV path (stdout when absent)
    #[arg(long)]
    out: Option<PathBuf>,

    /// Worker threads for independent grid points
    #[arg(long, default_value_t = 1)]
    workers: usize,

    /// Rerun at a (60, 30) truncation and report the largest deviation
    #[arg(long)]
    convergence: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.diagnostic());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn execute(cli: &Cli) -> Result<(), CliError> {
    let path = cli.config.display().to_string();
    let text = std::fs::read_to_string(&cli.config).map_err(|e| CliError::io(&path, e))?;
    let cfg = RunConfig::from_toml(&text)?;
    let out = run(cli.command, &cfg, cli.workers)?;
    let csv = out.to_csv();
    match &cli.out {
        Some(p) => std::fs::write(p, csv).map_err(|e| CliError::io(p.display().to_string(), e))?,
        None => print!("{csv}"),
    }
    if cli.convergence {
        let (ds, dp) = CONVERGENCE_DIMS;
        match convergence(cli.command, &cfg, cli.workers, &out, CONVERGENCE_DIMS)? {
            Some((dev, column)) => {
                eprintln!("convergence signal_dim={ds} pump_dim={dp} max_deviation={dev:.3e} column={column}")
            }
            None => eprintln!("convergence not_applicable command={}", cli.command.name()),
        }
    }
    Ok(())
}
