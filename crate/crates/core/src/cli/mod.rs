//! Config-driven command line: runs experiments, writes CSV and JSON
//! artifacts, and executes the verification suites.
//!
//! Exit codes: 0 success, 1 invalid input or I/O failure, 2 integrator
//! non-convergence, 3 verification failure.

mod commands;
pub mod config;
pub mod manifest;
pub mod verify;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::error::Error;
use config::SweepParameter;
use verify::Suite;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_NON_CONVERGENCE: i32 = 2;
pub const EXIT_VERIFY_FAILED: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "hbt", version, about = "Two-electron HBT correlation patterns with a Coulomb-dip estimate")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Worker threads (defaults to all cores). Outputs do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fermionic and bosonic G2 over a phase grid.
    ClosedForm(RunArgs),
    /// Relative-coordinate trajectory and dip width.
    Coulomb(RunArgs),
    /// Screen pattern with the Coulomb-dip envelope.
    Compose(RunArgs),
    /// Derived quantities over a list of parameter values.
    Sweep(SweepArgs),
    /// Brute-force Fock-space correlator next to the closed form.
    Oracle(RunArgs),
    /// Run a verification suite.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Config file, run manifest, or shipped config name (fig2b, fig2c, fig4a, fig4b, sweep_d).
    #[arg(long)]
    pub config: String,

    /// Output CSV; manifests are written next to it. Defaults to stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,

    /// Overrides the config seed.
    #[arg(long)]
    pub seed: Option<u64>,

    /// Record a timestamp in the manifest.
    #[arg(long)]
    pub stamp: bool,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub run: RunArgs,

    /// Parameter to sweep; defaults to the config's [sweep] block.
    #[arg(long, value_enum)]
    pub parameter: Option<SweepParameter>,

    /// Comma-separated values; defaults to the config's [sweep] block.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub values: Option<Vec<f64>>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(value_enum, default_value = "all")]
    pub suite: Suite,

    /// JSON report path.
    #[arg(long)]
    pub out: Option<PathBuf>,

    /// Drop the fermionic exchange sign, to check that the fock suite notices.
    #[arg(long, hide = true)]
    pub inject_sign_flip: bool,
}

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::NonConvergence { .. } => EXIT_NON_CONVERGENCE,
        _ => EXIT_INVALID,
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
        }
    };
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be positive");
            return EXIT_INVALID;
        }
        pool = pool.num_threads(n);
    }
    let pool = match pool.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_INVALID;
        }
    };
    pool.install(|| match dispatch(&cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    })
}

fn dispatch(command: &Command) -> crate::Result<i32> {
    match command {
        Command::ClosedForm(a) => commands::closed_form(a),
        Command::Coulomb(a) => commands::coulomb(a),
        Command::Compose(a) => commands::compose(a),
        Command::Sweep(a) => commands::sweep(a),
        Command::Oracle(a) => commands::oracle(a),
        Command::Verify(a) => verify::run(a),
    }
}
