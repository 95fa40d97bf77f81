//! Command-line driver: argument parsing, configuration loading and the
//! mapping from library errors to exit codes.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 configuration error, 3 numerical
//! failure. Errors are printed to stderr as a single JSON object.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde::Serialize;

mod commands;
pub mod output;

pub use commands::{CompareArgs, ErosionArgs, KernelArgs, NonlocalArgs, SimulateArgs, SymbolArgs};
pub use output::{RunManifest, OUTPUT_DIR_ENV};

#[derive(Debug, Parser)]
#[command(name = "fowler", version, about = "Numerics for the Fowler dune equation")]
pub struct Cli {
    /// Output directory; defaults to $FOWLER_OUTPUT_DIR, then ./fowler-output.
    #[arg(long, global = true)]
    pub output_dir: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tabulate the symbol against the quadrature oracle.
    Symbol(SymbolArgs),
    /// Apply the nonlocal operator to a profile by several routes.
    Nonlocal(NonlocalArgs),
    /// Evaluate the heat kernel and its diagnostics.
    Kernel(KernelArgs),
    /// Run the spectral or finite-difference solver.
    Simulate(SimulateArgs),
    /// Check the predicted erosion rate at a flat point.
    Erosion(ErosionArgs),
    /// Run Burgers and Fowler from the same data and compare their minima.
    Compare(CompareArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Symbol(_) => "symbol",
            Command::Nonlocal(_) => "nonlocal",
            Command::Kernel(_) => "kernel",
            Command::Simulate(_) => "simulate",
            Command::Erosion(_) => "erosion",
            Command::Compare(_) => "compare",
        }
    }
}

#[derive(Debug, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum CliError {
    Config {
        #[serde(skip_serializing_if = "Option::is_none")]
        key: Option<String>,
        message: String,
    },
    Numerical {
        message: String,
        /// Manifest describing whatever was written before the failure.
        #[serde(skip_serializing_if = "Option::is_none")]
        manifest: Option<PathBuf>,
    },
    Io {
        path: PathBuf,
        message: String,
    },
}

impl CliError {
    pub fn config(key: Option<&str>, message: impl Into<String>) -> Self {
        CliError::Config {
            key: key.map(str::to_string),
            message: message.into(),
        }
    }

    pub fn numerical(message: impl Into<String>) -> Self {
        CliError::Numerical {
            message: message.into(),
            manifest: None,
        }
    }

    pub fn io(path: &Path, e: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            message: e.to_string(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } => 1,
            CliError::Config { .. } => 2,
            CliError::Numerical { .. } => 3,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::json!({ "error": self }).to_string()
    }
}

impl From<fowler::Error> for CliError {
    fn from(e: fowler::Error) -> Self {
        use fowler::Error as E;
        match &e {
            E::InvalidArgument { key, .. } => CliError::config(Some(key), e.to_string()),
            E::UnknownPreset { .. } => CliError::config(Some("preset"), e.to_string()),
            _ if e.is_numerical() => CliError::numerical(e.to_string()),
            _ => CliError::config(None, e.to_string()),
        }
    }
}

/// Parse `argv` (including the program name), execute, and return the exit
/// status. The manifest goes to stdout, errors to stderr.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return 0;
            }
            let err = CliError::config(None, e.render().to_string().trim_end());
            eprintln!("{}", err.to_json());
            return err.exit_code();
        }
    };
    let arguments = argv.iter().skip(1).map(|a| a.to_string_lossy().into_owned()).collect();
    match execute(cli, arguments) {
        Ok(manifest) => {
            let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
            let mut out = std::io::stdout().lock();
            let _ = writeln!(out, "{text}");
            0
        }
        Err(err) => {
            eprintln!("{}", err.to_json());
            err.exit_code()
        }
    }
}

/// Run a parsed command and return its manifest.
pub fn execute(cli: Cli, arguments: Vec<String>) -> Result<RunManifest, CliError> {
    let start = Instant::now();
    let ctx = commands::Context {
        dir: output::output_dir(cli.output_dir),
        subcommand: cli.command.name(),
        arguments,
        start,
    };
    match cli.command {
        Command::Symbol(a) => commands::symbol(&ctx, a),
        Command::Nonlocal(a) => commands::nonlocal(&ctx, a),
        Command::Kernel(a) => commands::kernel(&ctx, a),
        Command::Simulate(a) => commands::simulate(&ctx, a),
        Command::Erosion(a) => commands::erosion(&ctx, a),
        Command::Compare(a) => commands::compare(&ctx, a),
    }
}
