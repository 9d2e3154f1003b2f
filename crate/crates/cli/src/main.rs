use std::io::Write;
use std::process::ExitCode;

use clap::Parser;

mod commands;
mod config;
mod output;

use config::{Cli, RunConfig};

/// Exit status 2: bad flags, specs or inputs.
const EXIT_VALIDATION: u8 = 2;
/// Exit status 1: a computation failed.
const EXIT_RUNTIME: u8 = 1;

#[derive(Debug)]
pub struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    pub fn validation(message: impl Into<String>) -> Self {
        CliError { code: EXIT_VALIDATION, message: message.into() }
    }

    pub fn runtime(message: impl Into<String>) -> Self {
        CliError { code: EXIT_RUNTIME, message: message.into() }
    }
}

impl From<crofton_core::Error> for CliError {
    fn from(e: crofton_core::Error) -> Self {
        use crofton_core::Error as E;
        match e {
            E::Solver { .. } | E::Json(_) => CliError::runtime(e.to_string()),
            _ => CliError::validation(e.to_string()),
        }
    }
}

fn main() -> ExitCode {
    // clap exits with status 2 on usage errors, matching EXIT_VALIDATION.
    let cli = Cli::parse();
    let result = RunConfig::from_cli(cli).and_then(|cfg| {
        let report = commands::run(&cfg)?;
        output::render(&report, cfg.format)
    });
    match result {
        Ok(text) => {
            let mut out = std::io::stdout().lock();
            if writeln!(out, "{text}").is_err() {
                return ExitCode::from(EXIT_RUNTIME);
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
