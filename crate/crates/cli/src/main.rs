//! `sccp`: command-line front end.
//!
//! Exit codes: 0 success, 1 invalid model or failed run, 2 usage or I/O
//! error.

mod cli;
mod commands;
mod error;
mod manifest;
mod model;

use std::process::ExitCode;

use clap::Parser;

use cli::{Cli, Command, ReplayArgs};
use error::CliError;

fn replay(a: &ReplayArgs) -> Result<(), CliError> {
    let rec = manifest::read(&a.manifest)?;
    let mut argv = vec!["sccp".to_string()];
    argv.extend(rec.command.iter().cloned());
    let out = match &a.out {
        Some(d) => d.clone(),
        None => a
            .manifest
            .parent()
            .map(|p| p.to_path_buf())
            .unwrap_or_default(),
    };
    argv.push("--out".into());
    argv.push(out.display().to_string());
    let cli = Cli::try_parse_from(&argv)
        .map_err(|e| CliError::Usage(format!("manifest command does not parse: {e}")))?;
    match &cli.command {
        Command::Simulate(s) => commands::simulate(s, Some(&rec.sha256)),
        Command::Ensemble(e) => commands::ensemble(e, Some(&rec.sha256)),
        _ => Err(CliError::Usage(
            "manifest records no replayable command".into(),
        )),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut logger =
        env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"));
    if let Some(level) = &cli.log_level {
        logger.parse_filters(level);
    }
    logger.init();

    let result = match &cli.command {
        Command::Parse(a) => commands::parse(a),
        Command::Compile(a) => commands::compile(a),
        Command::Simulate(a) => commands::simulate(a, None),
        Command::Ensemble(a) => commands::ensemble(a, None),
        Command::Replay(a) => replay(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("sccp: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
