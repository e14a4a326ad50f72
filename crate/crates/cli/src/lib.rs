//! Command-line front end: reproducible CSV/JSON reports from the `mu2amp`
//! library.

pub mod args;
pub mod commands;
pub mod report;
pub mod settings;
pub mod verify;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::Parser;

use crate::args::{Cli, Command};
use crate::report::{Format, Table};
use crate::settings::Resolver;

pub const DEFAULT_PRECISION: usize = 9;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Numerical(mu2amp::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl From<mu2amp::Error> for CliError {
    fn from(e: mu2amp::Error) -> Self {
        use mu2amp::Error as E;
        match e {
            E::InvalidSpec(_) | E::InvalidGrid(_) | E::InvalidOrdering(_) => {
                CliError::Usage(e.to_string())
            }
            other => CliError::Numerical(other),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Numerical(_) | CliError::Io(_) => 2,
        }
    }
}

/// A finished command: the table plus how to write it.
#[derive(Debug)]
pub struct Outcome {
    pub table: Table,
    pub format: Format,
    pub precision: usize,
    pub output: Option<PathBuf>,
    /// Set by `verify` when any check failed.
    pub failed: bool,
}

impl Outcome {
    pub fn render(&self) -> Vec<u8> {
        let mut buf = Vec::new();
        self.table
            .write(&mut buf, self.format, self.precision)
            .expect("writing to memory");
        buf
    }
}

/// Output settings shared by every command.
pub(crate) struct Common {
    pub format: Format,
    pub precision: usize,
    pub output: Option<PathBuf>,
}

impl Common {
    fn resolve(cli: &Cli, r: &mut Resolver) -> Result<Self, CliError> {
        let format = r.get("format", cli.format, Format::Csv)?;
        let precision = r.get("precision", cli.precision, DEFAULT_PRECISION)?;
        if !(1..=17).contains(&precision) {
            return Err(CliError::Usage(format!("--precision {precision} must be in 1..=17")));
        }
        let output = r.unrecorded::<PathBuf>("output", cli.output.clone())?;
        Ok(Self { format, precision, output })
    }
}

/// Parses `argv` (program name first) and runs the command without writing
/// anything.
pub fn execute<I, T>(argv: I) -> Result<Outcome, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv).map_err(|e| CliError::Usage(e.to_string()))?;
    let config = match &cli.config {
        Some(path) => settings::load_config(path)?,
        None => Default::default(),
    };
    let name = match &cli.command {
        Command::Design(_) => "design",
        Command::Table1(_) => "table1",
        Command::Sweep(_) => "sweep",
        Command::Contour(_) => "contour",
        Command::Qgrid(_) => "qgrid",
        Command::Snr(_) => "snr",
        Command::Verify(_) => "verify",
    };
    let mut r = Resolver::new(name, config);
    let job = commands::resolve(&cli.command, &mut r)?;
    let common = Common::resolve(&cli, &mut r)?;
    let provenance = r.finish()?;
    let (table, failed) = job.run(provenance)?;
    Ok(Outcome {
        table,
        format: common.format,
        precision: common.precision,
        output: common.output,
        failed,
    })
}

fn configure_threads() {
    let Ok(value) = std::env::var("MU2AMP_THREADS") else {
        return;
    };
    match value.trim().parse::<usize>() {
        Ok(n) if n > 0 => {
            if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
                log::warn!("could not size the thread pool: {e}");
            }
        }
        _ => log::warn!("ignoring MU2AMP_THREADS={value}: expected a positive integer"),
    }
}

/// Entry point for the binary; returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    // Help and version requests are not errors.
    if let Err(e) = Cli::try_parse_from(&argv) {
        use clap::error::ErrorKind;
        if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
            let _ = e.print();
            return 0;
        }
    }
    configure_threads();
    let outcome = match execute(&argv) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("mu2amp: {e}");
            return e.exit_code();
        }
    };
    let bytes = outcome.render();
    let written = match &outcome.output {
        Some(path) => std::fs::write(path, &bytes),
        None => std::io::stdout().lock().write_all(&bytes),
    };
    if let Err(e) = written {
        eprintln!("mu2amp: i/o error: {e}");
        return 2;
    }
    if outcome.failed {
        eprintln!("mu2amp: verification failed");
        return 3;
    }
    0
}
