use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use holocert::{list_builtins, run_scenario, write_outputs, CliError, Overrides, EXIT_INTERNAL};

#[derive(Parser)]
#[command(version, about = "Certificates for minimal Lagrangian tori in Kähler manifolds")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file and write report.json, timing.json and CSV tables
    Run {
        config: PathBuf,
        /// Output directory (default: the scenario's output.dir, else holocert-out)
        #[arg(long)]
        out: Option<PathBuf>,
        /// Grid resolution per axis, overriding the scenario
        #[arg(long)]
        resolution: Option<usize>,
        /// Verdict tolerance of the task, overriding the scenario
        #[arg(long)]
        tolerance: Option<f64>,
    },
    /// Print models, families, field bases and tasks
    List,
}

fn run(config: PathBuf, out: Option<PathBuf>, overrides: Overrides) -> Result<i32, CliError> {
    let text = std::fs::read_to_string(&config)
        .map_err(|source| CliError::Io { path: config.display().to_string(), source })?;
    let outcome = run_scenario(&text, &overrides)?;
    let dir = out
        .or_else(|| outcome.report.scenario.output.as_ref().and_then(|o| o.dir.clone()).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("holocert-out"));
    write_outputs(&outcome, &dir)?;
    let verdict = &outcome.report.verdict;
    println!("{}: {}", if verdict.passed { "PASS" } else { "FAIL" }, verdict.summary);
    println!("wrote {}", dir.display());
    Ok(outcome.exit_code())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::List => {
            print!("{}", list_builtins());
            0
        }
        Command::Run { config, out, resolution, tolerance } => {
            match run(config, out, Overrides { resolution, tolerance }) {
                Ok(code) => code,
                Err(e) => {
                    eprintln!("error: {e}");
                    e.exit_code()
                }
            }
        }
    };
    ExitCode::from(u8::try_from(code).unwrap_or(EXIT_INTERNAL as u8))
}
