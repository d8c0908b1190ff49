use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use polarmem_cli::config::{ExperimentConfig, EXPERIMENT_KINDS};
use polarmem_cli::error::CliError;
use polarmem_cli::{print_checks, run_config, verify_dir, EXIT_FAILURE, EXIT_OK};

#[derive(Parser)]
#[command(name = "polarmem", version, about = "Polarization experiments for channels with Markov noise")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment configuration and write its artifacts.
    Run {
        config: PathBuf,
        /// Output directory, overriding the configuration.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List experiment kinds, and the configurations found in a directory.
    ListExperiments {
        #[arg(long)]
        configs: Option<PathBuf>,
    },
    /// Re-check the predicates of a finished run from its CSV files.
    Verify { output_dir: PathBuf },
}

fn list(configs: Option<PathBuf>) -> Result<i32, CliError> {
    for (kind, what) in EXPERIMENT_KINDS {
        println!("{kind:<10} {what}");
    }
    if let Some(dir) = configs {
        let mut paths: Vec<PathBuf> = std::fs::read_dir(&dir)
            .map_err(|e| CliError::io(&dir, e))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "toml"))
            .collect();
        paths.sort();
        println!();
        for p in paths {
            match ExperimentConfig::load(&p) {
                Ok(cfg) => println!("{:<28} {:<10} {}", cfg.name, cfg.experiment.kind(), p.display()),
                Err(e) => println!("{:<28} {:<10} {}", "<invalid>", "-", e),
            }
        }
    }
    Ok(EXIT_OK)
}

fn dispatch(cli: Cli) -> Result<i32, CliError> {
    match cli.command {
        Command::Run { config, out } => {
            let report = run_config(&config, out.as_deref())?;
            print_checks(&report.summary.checks);
            for f in &report.summary.flagged {
                eprintln!("not converged: {f}");
            }
            println!("artifacts written to {}", report.output_dir.display());
            Ok(report.exit_code())
        }
        Command::ListExperiments { configs } => list(configs),
        Command::Verify { output_dir } => {
            let (kind, checks) = verify_dir(&output_dir)?;
            println!("{kind} run at {}", output_dir.display());
            print_checks(&checks);
            Ok(if checks.iter().all(|c| c.pass) { EXIT_OK } else { EXIT_FAILURE })
        }
    }
}

fn main() -> ExitCode {
    let code = match dispatch(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    ExitCode::from(code as u8)
}
