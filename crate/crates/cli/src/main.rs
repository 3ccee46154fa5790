use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use stam_harness::commands::{cmd_compare, cmd_run, render_table};
use stam_harness::verify::{run_suite, SUITES};
use stam_harness::CliError;

#[derive(Parser)]
#[command(name = "stam", version, about = "Quantized training with STAM and its baselines")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a single algorithm section and write its trace and summary.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run every algorithm section and write a comparison table.
    Compare {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run a fixed-seed verification suite.
    Verify {
        /// One of projection, unbiasedness, es, threshold, gradients.
        suite: String,
    },
}

fn execute(cli: Cli) -> Result<ExitCode, CliError> {
    match cli.command {
        Command::Run { config } => {
            let rep = cmd_run(&config)?;
            println!(
                "{}: {} iterations, best combined {}",
                rep.label,
                rep.summary.iterations,
                rep.best_combined.map_or("-".into(), |v| format!("{v:.6e}"))
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Compare { config } => {
            let rows = cmd_compare(&config)?;
            print!("{}", render_table(&rows));
            Ok(if rows.iter().any(|r| r.failed()) {
                ExitCode::from(3)
            } else {
                ExitCode::SUCCESS
            })
        }
        Command::Verify { suite } => {
            let checks = run_suite(&suite)?;
            let mut ok = true;
            for c in &checks {
                println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
                ok &= c.passed;
            }
            Ok(if ok { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            if let CliError::UnknownSuite(_) = e {
                eprintln!("error: {e} (available: {})", SUITES.join(", "));
            } else {
                eprintln!("error: {e}");
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
