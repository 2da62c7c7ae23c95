//! Command-line front end: argument parsing, dispatch and the exit-code
//! contract. The binary is a thin wrapper around [`run`].

pub mod commands;
pub mod config;
pub mod output;

use std::path::PathBuf;

use clap::{Parser, Subcommand};
use loewner_core::Error;
use serde_json::{json, Value};

pub use config::RunConfig;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_SMALL_DIVISOR: i32 = 3;
pub const EXIT_NO_CONVERGENCE: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "loewner", version, about = "Normal forms and Loewner chains of dilation evolution families")]
pub struct Cli {
    #[command(flatten)]
    pub config: RunConfig,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Classify the resonances of a spectrum.
    Resonances { spectrum: PathBuf },
    /// Conjugate a family to its triangular normal form.
    Normalize {
        family: PathBuf,
        /// Eliminate through the jet degree instead of the Koenigs degree.
        #[arg(long)]
        full: bool,
    },
    /// Build the Loewner chain of a family or Herglotz field.
    Chain {
        input: PathBuf,
        /// Real times for a Herglotz input, comma separated.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        times: Vec<f64>,
    },
    /// Run a named scenario.
    Scenario {
        name: String,
        /// Parameter overrides as a JSON object.
        #[arg(long)]
        params: Option<String>,
        /// Run the scenario's negative control instead.
        #[arg(long)]
        negative_control: bool,
    },
    /// Re-check a stored chain against a stored family.
    Verify {
        #[arg(long)]
        family: PathBuf,
        #[arg(long)]
        chain: PathBuf,
    },
}

/// Exit code for a core error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::SmallDivisor { .. } => EXIT_SMALL_DIVISOR,
        Error::NonConvergence { .. } => EXIT_NO_CONVERGENCE,
        _ => EXIT_PARSE,
    }
}

/// Machine-readable error document.
pub fn error_json(e: &Error) -> Value {
    let mut v = match e {
        Error::SmallDivisor {
            target,
            index,
            magnitude,
            divisor,
        } => json!({"kind": "small_divisor", "target": target, "index": index, "magnitude": magnitude, "divisor": divisor}),
        Error::NonConvergence {
            entry,
            iterations,
            last,
            history,
        } => json!({"kind": "non_convergence", "entry": entry, "iterations": iterations, "last": last, "history": history}),
        Error::ComplexResonance { target, index } => json!({"kind": "complex_resonance", "target": target, "index": index}),
        Error::Contract(_) => json!({"kind": "contract"}),
        Error::NonInvertible => json!({"kind": "non_invertible"}),
        Error::InvalidSpectrum(_) => json!({"kind": "invalid_spectrum"}),
        Error::Scenario(_) => json!({"kind": "scenario"}),
        Error::Parse(_) => json!({"kind": "parse"}),
    };
    v["message"] = e.to_string().into();
    json!({ "error": v })
}

/// Runs one command. Returns the exit code; output goes to `--out` or
/// stdout, errors to stderr.
pub fn run(cli: &Cli) -> i32 {
    let result = cli.config.validate().and_then(|()| dispatch(cli));
    match result {
        Ok(out) => {
            let written = match &cli.config.out {
                Some(path) => std::fs::write(path, &out.json).map_err(|e| Error::Parse(format!("{}: {e}", path.display()))),
                None => {
                    print!("{}", out.json);
                    Ok(())
                }
            };
            match written {
                Ok(()) => out.code,
                Err(e) => report(&e),
            }
        }
        Err(e) => report(&e),
    }
}

fn report(e: &Error) -> i32 {
    eprintln!("{}", error_json(e));
    exit_code(e)
}

fn dispatch(cli: &Cli) -> loewner_core::Result<commands::Outcome> {
    let cfg = &cli.config;
    match &cli.command {
        Command::Resonances { spectrum } => commands::resonances(spectrum, cfg),
        Command::Normalize { family, full } => commands::normalize(family, *full, cfg),
        Command::Chain { input, times } => commands::chain(input, times, cfg),
        Command::Scenario {
            name,
            params,
            negative_control,
        } => commands::scenario(name, params.as_deref(), *negative_control, cfg),
        Command::Verify { family, chain } => commands::verify(family, chain, cfg),
    }
}
