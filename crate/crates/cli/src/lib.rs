//! Command-line driver for `selectrelax`.
//!
//! Exit codes: 0 on success, 1 on usage errors (bad flags, bad job files,
//! lattices too small), 2 when a computation did not converge.

// `!(x > y)` is used on purpose: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod args;
pub mod commands;
pub mod error;
pub mod job;
pub mod report;

use std::ffi::OsString;
use std::io::Write;

use clap::error::ErrorKind;
use clap::Parser;

use args::{Cli, Command, OutputArgs};
use commands::Outcome;
use error::CliError;
use job::JobFile;

/// Environment variable giving the default worker count for scans and sweeps.
pub const JOBS_ENV: &str = "SELECTRELAX_JOBS";

/// Parses `argv`, runs the command and returns the process exit code.
pub fn run<I, S>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => return clap_exit(e, stdout, stderr),
    };
    let cli = match cli.command {
        Command::Run(run_args) => {
            let parsed = JobFile::load(&run_args.job)
                .and_then(|job| job.to_args().map_err(|message| CliError::Job { path: run_args.job.clone(), message }));
            let argv = match parsed {
                Ok(argv) => argv,
                Err(e) => return report_error(&e, stderr),
            };
            match Cli::try_parse_from(argv) {
                Ok(cli) => cli,
                Err(e) => {
                    let _ = writeln!(stderr, "job file {}:", run_args.job.display());
                    return clap_exit(e, stdout, stderr);
                }
            }
        }
        _ => cli,
    };
    match execute(&cli.command).and_then(|(outcome, output)| emit(outcome, output, stdout, stderr)) {
        Ok(code) => code,
        Err(e) => report_error(&e, stderr),
    }
}

fn clap_exit(e: clap::Error, stdout: &mut dyn Write, stderr: &mut dyn Write) -> u8 {
    match e.kind() {
        ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
            let _ = write!(stdout, "{}", e.render());
            0
        }
        _ => {
            let _ = write!(stderr, "{}", e.render());
            1
        }
    }
}

fn report_error(e: &CliError, stderr: &mut dyn Write) -> u8 {
    let _ = writeln!(stderr, "error: {e}");
    e.exit_code()
}

fn worker_count(flag: Option<usize>) -> Result<Option<usize>, CliError> {
    let n = match flag {
        Some(n) => Some(n),
        None => match std::env::var(JOBS_ENV) {
            Ok(v) => Some(v.trim().parse().map_err(|_| CliError::Usage(format!("{JOBS_ENV}={v} is not a thread count")))?),
            Err(_) => None,
        },
    };
    if n == Some(0) {
        return Err(CliError::Usage("the worker count must be at least 1".into()));
    }
    Ok(n)
}

fn in_pool<R: Send>(jobs: Option<usize>, f: impl FnOnce() -> Result<R, CliError> + Send) -> Result<R, CliError> {
    match worker_count(jobs)? {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Usage(format!("cannot start {n} workers: {e}")))?
            .install(f),
        None => f(),
    }
}

/// Runs one parsed command.
pub fn execute(command: &Command) -> Result<(Outcome, &OutputArgs), CliError> {
    match command {
        Command::Solve(a) => Ok((commands::solve(a)?, &a.output)),
        Command::Split(a) => Ok((in_pool(a.jobs, || commands::split(a))?, &a.output)),
        Command::Scan(a) => Ok((in_pool(a.jobs, || commands::scan(a))?, &a.output)),
        Command::Sweep(a) => Ok((in_pool(a.jobs, || commands::sweep(a))?, &a.output)),
        Command::Run(_) => Err(CliError::Usage("job files cannot run other job files".into())),
    }
}

fn emit(outcome: Outcome, output: &OutputArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<u8, CliError> {
    for w in &outcome.warnings {
        let _ = writeln!(stderr, "warning: {w}");
    }
    let text = outcome.report.render(output.format);
    match &output.out {
        Some(path) => commands::write_file(path, &text)?,
        None => stdout.write_all(text.as_bytes()).map_err(|source| CliError::Io { path: "<stdout>".into(), source })?,
    }
    Ok(if outcome.converged { 0 } else { 2 })
}
