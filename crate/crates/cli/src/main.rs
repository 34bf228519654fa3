//! `selmer`: compute Selmer groups for one instance, verify the methods
//! against each other over a sweep, or record a survey as CSV.

mod commands;
mod report;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use report::Method;

#[derive(Parser)]
#[command(name = "selmer", version, about = "Selmer groups of the 2-isogeny families by descent, graphs and a local oracle")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute both Selmer groups, counts and bounds for one instance.
    Compute(ComputeArgs),
    /// Cross-check the methods and the local tables against the oracle.
    Verify(VerifyArgs),
    /// Write one CSV row per instance of a sweep.
    Survey(SurveyArgs),
}

#[derive(Args, Clone)]
pub struct Instance {
    /// Sign, +1 or -1.
    #[arg(long, allow_hyphen_values = true)]
    pub eps: String,
    #[arg(long)]
    pub p: i64,
    #[arg(long)]
    pub q: i64,
    #[arg(long)]
    pub d: i64,
}

#[derive(Clone, Copy, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Args)]
pub struct ComputeArgs {
    #[command(flatten)]
    pub instance: Instance,
    #[arg(long, value_enum, default_value = "both")]
    pub method: Method,
    #[arg(long, value_enum, default_value = "text")]
    pub format: Format,
    /// Write the partition graphs of both families to this file.
    #[arg(long, value_name = "PATH")]
    pub dump_graph: Option<std::path::PathBuf>,
}

#[derive(Args)]
pub struct VerifyArgs {
    /// Sweep as an inline TOML table, e.g. "{p_max = 13, m_set = [1, 2]}", or "default".
    #[arg(long, conflicts_with_all = ["eps", "p", "q", "d"])]
    pub sweep: Option<String>,
    #[arg(long, allow_hyphen_values = true, requires_all = ["p", "q", "d"])]
    pub eps: Option<String>,
    #[arg(long)]
    pub p: Option<i64>,
    #[arg(long)]
    pub q: Option<i64>,
    #[arg(long)]
    pub d: Option<i64>,
    /// Fixed oracle depth; the default derives it per equation.
    #[arg(long)]
    pub oracle_depth: Option<u32>,
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Shift one congruence of the local tables, as CLAUSE#INDEX.
    #[arg(long, value_name = "CLAUSE#INDEX")]
    pub mutate: Option<String>,
}

#[derive(Args)]
pub struct SurveyArgs {
    /// TOML file with the sweep fields.
    #[arg(long, value_name = "FILE")]
    pub spec: std::path::PathBuf,
    #[arg(long, value_name = "PATH")]
    pub out: std::path::PathBuf,
    /// Append to an existing file, skipping instances already present.
    #[arg(long)]
    pub resume: bool,
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Log every skipped parameter combination.
    #[arg(long, short)]
    pub verbose: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Compute(a) => commands::compute(a),
        Command::Verify(a) => commands::verify(a),
        Command::Survey(a) => commands::survey(a),
    };
    match result {
        Ok(code) => code.into(),
        Err(e) => {
            eprintln!("error: {e:#}");
            commands::Code::Invalid.into()
        }
    }
}
