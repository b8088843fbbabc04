use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use legfol::scenario::{bundled, bundled_source, parse_scenario, run_scenario, RunOptions};

/// Numerical checks for Legendrian foliations and contact germs.
#[derive(Parser)]
#[command(name = "legfol", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file and print a summary.
    Check {
        file: PathBuf,
        /// Also write the full report as JSON.
        #[arg(long, value_name = "PATH")]
        json: Option<PathBuf>,
        /// Override every check's tolerance.
        #[arg(long, value_name = "T")]
        tol: Option<f64>,
        /// Override the point count of random grids.
        #[arg(long, value_name = "N")]
        samples: Option<usize>,
        /// Override the scenario seed.
        #[arg(long, value_name = "S")]
        seed: Option<u64>,
    },
    /// Run a bundled scenario; `list` prints the available names.
    Demo { name: String },
}

fn main() -> ExitCode {
    legfol::par::init_thread_pool();
    match Cli::parse().command {
        Command::Check {
            file,
            json,
            tol,
            samples,
            seed,
        } => {
            let text = match std::fs::read_to_string(&file) {
                Ok(t) => t,
                Err(e) => {
                    eprintln!("error: cannot read {}: {e}", file.display());
                    return ExitCode::from(2);
                }
            };
            run(
                &file.display().to_string(),
                &text,
                json,
                RunOptions { tol, samples, seed },
            )
        }
        Command::Demo { name } if name == "list" => {
            for (n, _) in bundled() {
                println!("{n}");
            }
            ExitCode::SUCCESS
        }
        Command::Demo { name } => match bundled_source(&name) {
            Some(src) => run(&name, src, None, RunOptions::default()),
            None => {
                let names: Vec<_> = bundled().iter().map(|(n, _)| *n).collect();
                eprintln!(
                    "error: no bundled scenario `{name}`; available: {}",
                    names.join(", ")
                );
                ExitCode::from(2)
            }
        },
    }
}

fn run(origin: &str, text: &str, json: Option<PathBuf>, opts: RunOptions) -> ExitCode {
    let scenario = match parse_scenario(text) {
        Ok(s) => s,
        Err(errors) => {
            for e in errors {
                eprintln!("{origin}:{e}");
            }
            return ExitCode::from(2);
        }
    };
    let report = run_scenario(&scenario, &opts);
    print!("{}", report.summary_table());
    if let Some(path) = json {
        if let Err(e) = std::fs::write(&path, report.to_json()) {
            eprintln!("error: cannot write {}: {e}", path.display());
            return ExitCode::from(2);
        }
    }
    if report.passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
