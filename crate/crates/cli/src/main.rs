//! `tempora`: reachability checking for timed multiset rewriting specs.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "tempora", version, about = "Reachability for timed multiset rewriting with dense time")]
struct Cli {
    /// Print a machine-readable JSON report on stdout.
    #[arg(long, global = true)]
    json: bool,
    /// Record wall-clock time in the report (breaks byte-stable output).
    #[arg(long, global = true)]
    timing: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Visited,
    Depth,
}

#[derive(Args)]
pub struct CheckArgs {
    pub(crate) spec: PathBuf,
    #[arg(long, value_enum, default_value = "visited")]
    pub(crate) mode: ModeArg,
    /// Override the time bound; must be at least the computed one.
    #[arg(long)]
    pub(crate) dmax: Option<u64>,
    /// Also produce a concrete witness and re-validate it.
    #[arg(long)]
    pub(crate) witness: bool,
    /// Give up after storing this many states.
    #[arg(long)]
    pub(crate) max_states: Option<u64>,
    #[arg(long, default_value_t = 1)]
    pub(crate) workers: usize,
    /// Accept unbalanced rules; they can only be explored by the concrete
    /// search, which needs --concrete-depth.
    #[arg(long)]
    pub(crate) allow_unbalanced: bool,
    /// Run the bounded concrete search instead of the symbolic one. The
    /// answer is incomplete: "unreachable" means "not within this depth".
    #[arg(long)]
    pub(crate) concrete_depth: Option<usize>,
}

#[derive(Args)]
pub struct AbstractArgs {
    /// A `.tmsr` file, a file holding a configuration literal, or the
    /// literal itself, e.g. "{Time@0, F@1.5}".
    pub(crate) input: String,
    #[arg(long)]
    pub(crate) dmax: Option<u64>,
}

#[derive(Args)]
pub struct BoundArgs {
    /// Take the parameters from this spec; flags below override them.
    pub(crate) spec: Option<PathBuf>,
    /// Number of predicate symbols.
    #[arg(long = "preds")]
    pub(crate) j: Option<u64>,
    /// Number of constant and function symbols.
    #[arg(long = "symbols")]
    pub(crate) e: Option<u64>,
    /// Facts per configuration.
    #[arg(long)]
    pub(crate) m: Option<u64>,
    /// Fact size bound.
    #[arg(long)]
    pub(crate) k: Option<u64>,
    #[arg(long)]
    pub(crate) dmax: Option<u64>,
}

#[derive(Args)]
pub struct ValidateArgs {
    pub(crate) spec: PathBuf,
    /// Trace in the v1 JSON schema.
    pub(crate) trace: PathBuf,
    /// Skip the check that the trace ends in a goal configuration.
    #[arg(long)]
    pub(crate) no_goal: bool,
}

#[derive(Args)]
pub struct FuzzArgs {
    #[arg(long, default_value_t = 100)]
    pub(crate) count: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Decide whether a goal is reachable without passing a critical configuration.
    Check(CheckArgs),
    /// Print the circle-configuration of a configuration.
    Abstract(AbstractArgs),
    /// Print the bound on the number of circle-configurations.
    Bound(BoundArgs),
    /// Replay a concrete trace and report the first violation.
    Validate(ValidateArgs),
    /// Differential fuzzing of the symbolic and concrete searches. Seeded
    /// by TEMPORA_SEED.
    #[command(hide = true)]
    Fuzz(FuzzArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Check(_) => "check",
            Command::Abstract(_) => "abstract",
            Command::Bound(_) => "bound",
            Command::Validate(_) => "validate",
            Command::Fuzz(_) => "fuzz",
        }
    }
}

/// What a command produced: exit code 0 or 1, text for humans and a JSON payload.
pub struct Outcome {
    pub code: u8,
    pub text: String,
    pub payload: serde_json::Value,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    /// Already rendered diagnostics, one per line.
    #[error("{}", .0.join("\n"))]
    Diagnostics(Vec<String>),
    #[error("{0}")]
    Usage(String),
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct RunReport<'a> {
    command: &'a str,
    exit_code: u8,
    duration_millis: u128,
    payload: serde_json::Value,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    let name = cli.command.name();
    let result = match &cli.command {
        Command::Check(a) => commands::check(a),
        Command::Abstract(a) => commands::abstract_cmd(a),
        Command::Bound(a) => commands::bound(a),
        Command::Validate(a) => commands::validate(a),
        Command::Fuzz(a) => commands::fuzz(a),
    };
    let outcome = result.unwrap_or_else(|e| {
        eprintln!("{e}");
        let lines: Vec<String> = e.to_string().lines().map(str::to_string).collect();
        Outcome { code: 2, text: String::new(), payload: serde_json::json!({ "errors": lines }) }
    });
    if cli.json {
        let report = RunReport {
            command: name,
            exit_code: outcome.code,
            duration_millis: if cli.timing { start.elapsed().as_millis() } else { 0 },
            payload: outcome.payload,
        };
        println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
    } else {
        print!("{}", outcome.text);
        if cli.timing {
            println!("time: {} ms", start.elapsed().as_millis());
        }
    }
    ExitCode::from(outcome.code)
}
