//! `fpps` command-line front end.
//!
//! Exit codes: 0 success, 1 comparison outside tolerance, 2 input error,
//! 3 numerical failure. Every failure prints one line to standard error of
//! the form `error[<Tag>]: <message>`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use thiserror::Error;

use fpps::{Error as CoreError, ErrorClass};

mod args;
mod commands;
mod units;

use args::{Cli, Command, OracleCommand, SynthCommand};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Core(#[from] CoreError),
}

macro_rules! core_from {
    ($($t:ty),*) => {$(
        impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                CliError::Core(e.into())
            }
        }
    )*};
}

core_from!(
    fpps::ExtractError,
    fpps::OracleError,
    fpps::TraceError,
    fpps::synth::SynthError,
    fpps::trace_io::TraceIoError,
    fpps::sweep::SweepError
);

impl CliError {
    fn tag(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "UsageError",
            CliError::Io { .. } => "IoError",
            CliError::Core(e) => e.tag(),
        }
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) if e.class() == ErrorClass::Numerical => 3,
            _ => 2,
        }
    }
}

fn run(cli: &Cli) -> Result<bool, CliError> {
    match &cli.command {
        Command::Synth(SynthCommand::Uniform(a)) => commands::synth_uniform(a).map(|_| true),
        Command::Synth(SynthCommand::Periodic(a)) => commands::synth_periodic(a).map(|_| true),
        Command::Import(a) => commands::import(a).map(|_| true),
        Command::Extract(a) => commands::extract(a).map(|_| true),
        Command::Oracle(OracleCommand::Te10(a)) => commands::oracle_te10(a).map(|_| true),
        Command::Oracle(OracleCommand::Bloch(a)) => commands::oracle_bloch(a).map(|_| true),
        Command::Compare(a) => commands::compare(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("error[ToleranceExceeded]: comparison exceeds --tol");
            ExitCode::from(1)
        }
        Err(e) => {
            let message = e.to_string().replace('\n', " ");
            eprintln!("error[{}]: {message}", e.tag());
            ExitCode::from(e.exit_code())
        }
    }
}
