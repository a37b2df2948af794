mod args;
mod commands;

use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use gausspulse::{Error, PulseParams, TruncationPolicy};

use crate::args::{Cli, Command, RunArgs};

/// How a run ended; maps onto the process exit status.
#[derive(Debug)]
pub enum Failure {
    /// A check or bound did not hold (exit 1).
    Verification(String),
    /// Bad flags or parameters (exit 2).
    Usage(String),
    /// A numeric routine failed (exit 3).
    Numeric(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Verification(_) => 1,
            Failure::Usage(_) => 2,
            Failure::Numeric(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Verification(m) | Failure::Usage(m) | Failure::Numeric(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParameter(_) | Error::Domain(_) => Failure::Usage(e.to_string()),
            _ => Failure::Numeric(e.to_string()),
        }
    }
}

pub struct Context {
    pub params: PulseParams,
    pub policy: TruncationPolicy,
}

fn context(run: &RunArgs) -> Result<Context, Failure> {
    let policy = TruncationPolicy::new(run.rel_tol, run.max_terms)?;
    let params = match run.inject_q {
        Some(q) => PulseParams::with_nome(run.beta, run.lambda, q)?,
        None => PulseParams::with_policy(run.beta, run.lambda, &policy)?,
    };
    if !params.is_supported() {
        let msg = format!(
            "lambda*beta = {} is outside the supported region [0.2, 5]",
            params.time_bandwidth()
        );
        if !run.allow_unsupported {
            return Err(Failure::Usage(format!("{msg}; pass --allow-unsupported to run anyway")));
        }
        eprintln!("warning: {msg}");
    }
    Ok(Context { params, policy })
}

fn emit(run: &RunArgs, text: &str) -> Result<(), Failure> {
    match &run.output {
        Some(path) => {
            std::fs::write(path, text).map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display())))
        }
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| Failure::Numeric(format!("cannot write to stdout: {e}"))),
    }
}

fn run(cli: &Cli) -> Result<(), Failure> {
    let ctx = context(&cli.run)?;
    let outcome = match &cli.command {
        Command::Pulse(a) => commands::pulse(&ctx, &cli.run, a)?,
        Command::Filter(a) => commands::filter(&ctx, &cli.run, a)?,
        Command::Verify(a) => commands::verify(&ctx, &cli.run, a)?,
        Command::Reconstruct(a) => commands::reconstruct(&ctx, &cli.run, a)?,
    };
    emit(&cli.run, &outcome.text)?;
    match outcome.failure {
        Some(f) => Err(f),
        None => Ok(()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
