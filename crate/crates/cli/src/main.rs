//! Command-line driver for the choquard toolkit.

mod commands;
mod config;
mod run;

use anyhow::Result;
use clap::{Parser, Subcommand};
use serde_json::{json, Value};
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use commands::{CheckFailed, InvalidInput};
use config::RunConfig;
use run::Run;

#[derive(Parser)]
#[command(name = "choquard", version, about = "Choquard equation with inverse-square potential")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Inputs {
    /// TOML run configuration.
    config: PathBuf,
    /// `section.key=value` overrides, applied in order.
    #[arg(short = 's', long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Check parameters and grid and report regime and exponents.
    Validate(Inputs),
    /// Compute the ground state and the sharp constant.
    GroundState(Inputs),
    /// Thresholds K and H, or the mass threshold when mass-critical.
    Thresholds(Inputs),
    /// Evolve the configured initial data.
    Evolve(Inputs),
    /// Evolve and compare the variance with the virial identity.
    VirialCheck(Inputs),
    /// Classify and evolve scaled ground states.
    DichotomyScan(Inputs),
    /// Compare the evolution with the exact pseudo-conformal solution.
    ValidateExact(Inputs),
}

impl Command {
    fn parts(&self) -> (&'static str, &Inputs) {
        match self {
            Command::Validate(i) => ("validate", i),
            Command::GroundState(i) => ("ground-state", i),
            Command::Thresholds(i) => ("thresholds", i),
            Command::Evolve(i) => ("evolve", i),
            Command::VirialCheck(i) => ("virial-check", i),
            Command::DichotomyScan(i) => ("dichotomy-scan", i),
            Command::ValidateExact(i) => ("validate-exact", i),
        }
    }
}

fn dispatch(name: &str, run: &mut Run) -> Result<Value> {
    match name {
        "validate" => commands::validate(run),
        "ground-state" => commands::ground_state_cmd(run),
        "thresholds" => commands::thresholds_cmd(run),
        "evolve" => commands::evolve_cmd(run),
        "virial-check" => commands::virial_check(run),
        "dichotomy-scan" => commands::dichotomy_scan(run),
        "validate-exact" => commands::validate_exact(run),
        _ => unreachable!("clap restricts subcommands"),
    }
}

/// 1 for bad inputs, 2 for numerical failure.
fn classify(e: &anyhow::Error) -> (u8, &'static str) {
    for cause in e.chain() {
        if let Some(err) = cause.downcast_ref::<choquard::Error>() {
            return if err.is_validation() {
                (1, "validation")
            } else {
                (2, "numerical")
            };
        }
        if cause.is::<CheckFailed>() {
            return (2, "check-failed");
        }
        if cause.is::<InvalidInput>() {
            return (1, "validation");
        }
    }
    // config parsing and file access
    (1, "input")
}

fn fail(run: Option<&mut Run>, e: &anyhow::Error) -> ExitCode {
    let (code, kind) = classify(e);
    let mut body = json!({
        "error": kind,
        "message": format!("{e:#}"),
        "exit_code": code,
    });
    if let Some(run) = run {
        body["config_hash"] = json!(run.hash);
        // best effort: the original error is what matters
        let _ = run.write_json("error", &body);
        let _ = run.write_manifest("failed");
    }
    eprintln!("{body}");
    ExitCode::from(code)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (name, inputs) = cli.command.parts();
    let cfg = match RunConfig::load(&inputs.config, &inputs.overrides) {
        Ok(c) => c,
        Err(e) => return fail(None, &e),
    };
    let mut run = match Run::new(cfg, name) {
        Ok(r) => r,
        Err(e) => return fail(None, &e),
    };
    match dispatch(name, &mut run) {
        Ok(mut out) => match run.write_manifest("ok") {
            Ok(path) => {
                out["manifest"] = json!(path);
                // a closed pipe is not an error of the run
                let _ = writeln!(std::io::stdout(), "{}", serde_json::to_string_pretty(&out).unwrap_or_default());
                ExitCode::SUCCESS
            }
            Err(e) => fail(Some(&mut run), &e),
        },
        Err(e) => fail(Some(&mut run), &e),
    }
}
