use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use grounding_cli::commands::{cmd_audit, cmd_classify, cmd_train, cmd_verify, Format};
use grounding_cli::config::Config;
use grounding_cli::verify::Suite;
use grounding_cli::CliError;
use log::error;

/// Grounding-profile audits: train the grid-world agent, audit
/// architectures, verify the modulus and homomorphism results, classify
/// profiles.
///
/// Exit codes: 0 success, 1 configuration or input error, 2 diverged
/// training, 3 failed verification, 4 other runtime errors. Log verbosity is
/// read from GROUNDING_LOG (error, warn, info, debug, trace).
#[derive(Debug, Parser)]
#[command(name = "grounding", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML config (for `classify`: a profile or report document).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the config's seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Overrides the config's output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// What `audit` writes.
    #[arg(long, global = true, value_enum, default_value = "report")]
    format: Format,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Train the grid-world agent; writes weights.toml and train_log.csv.
    Train,
    /// Run an audit; writes report.toml or tables/*.csv.
    Audit,
    /// Run a property suite and print its checks.
    Verify {
        #[arg(value_enum)]
        suite: Suite,
    },
    /// Classify a profile; prints the verdict as TOML.
    Classify,
}

fn load(cli: &Cli, required: bool) -> Result<Config, CliError> {
    let mut cfg = match &cli.config {
        Some(p) => Config::load(p)?,
        None if required => {
            return Err(CliError::Config {
                path: PathBuf::from("<none>"),
                message: "--config is required for this command".into(),
            })
        }
        None => Config::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &cli.out {
        cfg.output.dir = std::env::current_dir().map(|d| d.join(out)).unwrap_or_else(|_| out.clone());
    }
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Train => {
            let outcome = cmd_train(&load(cli, false)?)?;
            println!("weights   {}", outcome.weights.display());
            println!("log       {}", outcome.log_csv.display());
            println!("final mean distance {:.6}", outcome.final_loss);
        }
        Command::Audit => {
            for path in cmd_audit(&load(cli, true)?, cli.format)? {
                println!("{}", path.display());
            }
        }
        Command::Verify { suite } => {
            let report = cmd_verify(&load(cli, false)?, *suite)?;
            for line in &report.lines {
                println!("{line}");
            }
        }
        Command::Classify => {
            let input = cli.config.clone().ok_or_else(|| CliError::Config {
                path: PathBuf::from("<none>"),
                message: "--config must name a profile or report".into(),
            })?;
            let out = cmd_classify(&input)?;
            let text = toml::to_string(&out).map_err(|e| CliError::Runtime(e.to_string()))?;
            if let Some(dir) = &cli.out {
                std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
                let path = dir.join("verdict.toml");
                std::fs::write(&path, &text).map_err(|e| CliError::io(&path, e))?;
            }
            print!("{text}");
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("GROUNDING_LOG", "warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            if let CliError::VerifyFailed(_) = &e {
                error!("verification failed");
            }
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
