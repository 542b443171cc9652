use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use contractlab::harness::{exit_code, fit_csv, resolve_workers, run, ExperimentConfig};
use contractlab::rates::{contraction_exponent_exact, parse_rational};
use contractlab::{Error, Result};

#[derive(Parser)]
#[command(
    name = "contractlab",
    version,
    about = "Posterior contraction experiments in L^r"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by an INI config.
    Run {
        config: PathBuf,
        /// Worker threads (overrides CONTRACTLAB_WORKERS and the config).
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Refit log-log slopes from a contraction-curve CSV.
    Fit { csv: PathBuf },
    /// Print exact contraction exponents.
    Exponents {
        /// Smoothness, as a decimal or fraction.
        #[arg(long)]
        alpha: String,
        /// Norm indices (`inf` allowed).
        #[arg(long = "r", num_args = 1.., default_values = ["1", "2", "4", "inf"])]
        r: Vec<String>,
    },
}

fn main() -> ExitCode {
    match dispatch(Cli::parse().command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}

fn dispatch(cmd: Command) -> Result<()> {
    match cmd {
        Command::Run { config, workers } => {
            let cfg = ExperimentConfig::from_path(&config)?;
            for w in cfg.warnings() {
                eprintln!("warning: {w}");
            }
            let workers = resolve_workers(workers, &cfg)?;
            let files = run(&cfg, workers)?;
            println!(
                "wrote {} rows to {} and {}",
                files.rows,
                files.csv.display(),
                files.json.display()
            );
        }
        Command::Fit { csv } => {
            println!(
                "{:>6} {:>10} {:>10} {:>8} {:>10}",
                "r", "slope", "intercept", "R^2", "curvature"
            );
            for (r, fit) in fit_csv(&csv)? {
                println!(
                    "{r:>6} {:>10.4} {:>10.4} {:>8.4} {:>10.4}",
                    fit.slope, fit.intercept, fit.r_squared, fit.curvature
                );
            }
        }
        Command::Exponents { alpha, r } => {
            let a = parse_rational(&alpha).map_err(config)?;
            println!("{:>6} {:>10} {:>10}", "r", "exponent", "decimal");
            for token in r {
                let ri = match token.trim() {
                    "inf" | "infinity" => None,
                    t => Some(parse_rational(t).map_err(config)?),
                };
                let e = contraction_exponent_exact(a, ri).map_err(config)?;
                println!(
                    "{token:>6} {:>10} {:>10.6}",
                    e.to_string(),
                    *e.numer() as f64 / *e.denom() as f64
                );
            }
        }
    }
    Ok(())
}

fn config(e: Error) -> Error {
    Error::Config(e.to_string())
}
