//! `iparts`: seeded experiment runner for the two-stage crowdsensing
//! simulator.
//!
//! Exit codes: 0 success, 1 usage error, 2 configuration error, 3 runtime
//! failure (including failed runs and failed verification).

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use iparts_core::error::Error;
use iparts_core::harness::{self, ExperimentConfig};

#[derive(Parser)]
#[command(name = "iparts", version, about = "Two-stage crowdsensing market simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every configured (variant, seed) pair and write the metrics
    /// ledger plus per-run artifacts.
    Simulate {
        /// Experiment config (JSON).
        #[arg(long)]
        config: PathBuf,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
        /// Worker threads (0 = all cores).
        #[arg(long, default_value_t = 0)]
        jobs: usize,
        /// Added to every seed, for splitting sweeps across invocations.
        #[arg(long, default_value_t = 0)]
        seed_offset: u64,
    },
    /// Evaluate the inference attackers over the configured snapshot grid.
    Attack {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        jobs: usize,
    },
    /// Replay audits and equilibrium checks over a stored run directory.
    Verify {
        /// Directory previously produced by `simulate`.
        run_dir: PathBuf,
    },
    /// Generate a scenario (synthetic or trace-backed) and write its JSON.
    GenScenario {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn exit_code_for(err: &Error) -> ExitCode {
    match err {
        Error::Config(_) | Error::Json(_) => ExitCode::from(2),
        _ => ExitCode::from(3),
    }
}

fn run(cli: Cli) -> Result<ExitCode, Error> {
    match cli.command {
        Command::Simulate { config, out, jobs, seed_offset } => {
            let cfg = ExperimentConfig::load(&config)?;
            let summary = harness::run_simulate(&cfg, &out, jobs, seed_offset)?;
            println!("{} runs complete; ledger at {}", summary.runs, summary.ledger_path.display());
            if summary.failed.is_empty() {
                Ok(ExitCode::SUCCESS)
            } else {
                for f in &summary.failed {
                    eprintln!("failed: {f}");
                }
                eprintln!("{} of {} runs failed", summary.failed.len(), summary.runs + summary.failed.len());
                Ok(ExitCode::from(3))
            }
        }
        Command::Attack { config, out, jobs } => {
            let cfg = ExperimentConfig::load(&config)?;
            let path = harness::run_attack(&cfg, &out, jobs)?;
            println!("attack study at {}", path.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify { run_dir } => {
            let summary = harness::run_verify(&run_dir)?;
            for v in &summary.verdicts {
                let ne = |flag: Option<bool>| match flag {
                    Some(true) => "pass",
                    Some(false) => "FAIL",
                    None => "n/a",
                };
                println!(
                    "{}: audit {} | feasibility {} | offline-equilibrium {} | online-equilibrium {}",
                    v.run,
                    if v.audit_ok { "pass" } else { "FAIL" },
                    if v.feasibility_ok { "pass" } else { "FAIL" },
                    ne(v.offline_ne),
                    ne(v.online_ne),
                );
                for violation in &v.audit_violations {
                    println!("    {violation}");
                }
            }
            if summary.all_ok {
                println!("all {} runs verified", summary.verdicts.len());
                Ok(ExitCode::SUCCESS)
            } else {
                eprintln!("verification failed");
                Ok(ExitCode::from(3))
            }
        }
        Command::GenScenario { config, out, seed } => {
            let cfg = ExperimentConfig::load(&config)?;
            harness::run_gen_scenario(&cfg, seed, &out)?;
            println!("scenario written to {}", out.display());
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap prints its own message; keep its distinction between
            // --help/--version (success) and real usage errors
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code_for(&e)
        }
    }
}
