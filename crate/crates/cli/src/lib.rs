//! Command-line front end: configuration, subcommand dispatch, CSV output and
//! the built-in verification suite.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod args;
pub mod commands;
pub mod config;
pub mod error;
pub mod render;
pub mod verify;

use clap::Parser;

pub use args::Cli;
pub use config::{load_config, ConfigFile, RunConfig};
pub use error::{CliError, CliResult, EXIT_FAILURE, EXIT_IO, EXIT_OK, EXIT_USAGE};

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "THERMOLINE_THREADS";

/// Worker cap from [`THREADS_ENV`], if set.
pub fn thread_cap() -> CliResult<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Err(std::env::VarError::NotPresent) => Ok(None),
        Err(e) => Err(CliError::Usage(format!("{THREADS_ENV}: {e}"))),
        Ok(s) => match s.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(Some(n)),
            _ => Err(CliError::Usage(format!(
                "{THREADS_ENV} must be a positive integer (got '{s}')"
            ))),
        },
    }
}

fn configure_threads() -> CliResult<()> {
    if let Some(n) = thread_cap()? {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(format!("{THREADS_ENV}: {e}")))?;
    }
    Ok(())
}

/// Parse `args`, run, and return the exit code. Diagnostics go to stderr.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let result = configure_threads()
        .and_then(|_| load_config(&cli))
        .and_then(|cfg| commands::run(&cfg));
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("thermoline: {e}");
            e.exit_code()
        }
    }
}
