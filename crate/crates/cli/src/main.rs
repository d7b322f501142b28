use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use hypflow_cli::{
    cmd_compare_ode, cmd_run, cmd_sweep, cmd_validate_speed, thread_cap, CliError, Outcome, RunConfig,
    SweepConfig,
};

#[derive(Parser)]
#[command(name = "hypflow", version, about = "Curvature flows of star-shaped hypersurfaces in hyperbolic spaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a speed function against the structural conditions.
    ValidateSpeed {
        /// `imcf`, `log1p`, `power:p`, `powersum:c,p;c,p` or `expm1:s`.
        spec: String,
    },
    /// Run one flow and write its time series and summary.
    Run {
        config: PathBuf,
        /// Overrides `output.dir`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the cross product of the `sweep.<key>` lists.
    Sweep {
        config: PathBuf,
        /// Parent directory of the run directories (default `output.dir` or `sweep`).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare a constant-data run with the geodesic-sphere ODE.
    CompareOde { config: PathBuf },
}

fn read(path: &PathBuf) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::config(format!("cannot read `{}`: {e}", path.display())))
}

fn dispatch(cli: Cli) -> Result<Outcome, CliError> {
    match cli.command {
        Command::ValidateSpeed { spec } => cmd_validate_speed(&spec),
        Command::Run { config, out } => {
            let mut cfg = RunConfig::from_text(&read(&config)?)?;
            if let Some(dir) = out {
                cfg.out_dir = dir;
            }
            cmd_run(&cfg)
        }
        Command::Sweep { config, out } => {
            let sweep = SweepConfig::from_text(&read(&config)?)?;
            let dir = out
                .or_else(|| sweep.base.iter().find(|(k, _)| k == "output.dir").map(|(_, v)| PathBuf::from(v)))
                .unwrap_or_else(|| PathBuf::from("sweep"));
            cmd_sweep(&sweep, &dir, thread_cap()?)
        }
        Command::CompareOde { config } => cmd_compare_ode(&RunConfig::from_text(&read(&config)?)?),
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(outcome) => {
            print!("{}", outcome.text);
            ExitCode::from(outcome.code)
        }
        Err(e) => {
            eprintln!("hypflow: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

