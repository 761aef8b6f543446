//! `tdnet`: build integrated T&D graphs and rank their vertices.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 internal failure.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::error::ErrorKind;
use clap::{ArgGroup, Args, Parser, Subcommand};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] tdnet_core::Error),
    #[error("{0}")]
    Failed(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Config(_) => 2,
            CliError::Core(e) if e.is_data_error() => 2,
            CliError::Core(_) | CliError::Failed(_) => 3,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// Comma-separated triple of counts, e.g. `142,174,41`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Triple(pub usize, pub usize, pub usize);

impl FromStr for Triple {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        let [a, b, c] = parts[..] else {
            return Err(format!("expected three comma-separated counts, got `{s}`"));
        };
        let n = |x: &str| x.parse::<usize>().map_err(|e| format!("`{x}`: {e}"));
        Ok(Triple(n(a)?, n(b)?, n(c)?))
    }
}

#[derive(Parser, Debug)]
#[command(name = "tdnet", version, about = "Cross-layer centrality for integrated T&D power networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Ingest or synthesize the layers, attach feeders and write the graph.
    Build(BuildArgs),
    /// Degree statistics per layer.
    Stats(StatsArgs),
    /// Closeness and betweenness between the transmission layer and feeders.
    Case1(CaseArgs),
    /// Capacity-weighted black-start scenarios with and without GFM inverters.
    Case2(Case2Args),
    /// Run one scenario as per-source shards on a worker pool.
    Run(RunArgs),
    /// Merge a scenario's shards into a table.
    Merge(MergeArgs),
}

#[derive(Args, Debug)]
#[command(group(ArgGroup::new("t_source").required(true).args(["edges", "synth_t"])))]
pub struct BuildArgs {
    /// Edge list of the transmission layer (or of a complete integrated graph).
    #[arg(long, conflicts_with = "synth_t")]
    pub edges: Option<PathBuf>,
    /// Vertex metadata for `--edges`.
    #[arg(long, requires = "edges")]
    pub vertices: Option<PathBuf>,
    /// Synthesize the transmission layer: buses, lines, generators.
    #[arg(long, value_name = "N,L,G")]
    pub synth_t: Option<Triple>,
    /// Edge list of one feeder, replicated for every load bus.
    #[arg(long, conflicts_with = "synth_feeder")]
    pub feeder_edges: Option<PathBuf>,
    #[arg(long, requires = "feeder_edges")]
    pub feeder_vertices: Option<PathBuf>,
    /// Synthesize the feeder: nodes, GFM inverters, GFL inverters.
    #[arg(long, value_name = "N,GFM,GFL")]
    pub synth_feeder: Option<Triple>,
    /// Number of feeder replicas [default: plan length, else 21].
    #[arg(long)]
    pub replicas: Option<usize>,
    /// Load bus to replica assignment (`load_bus,replica`).
    #[arg(long)]
    pub plan: Option<PathBuf>,
    /// Comma-separated generators to flag as black-start capable.
    #[arg(long, value_delimiter = ',')]
    pub black_start: Option<Vec<String>>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct GraphArgs {
    #[arg(long)]
    pub edges: PathBuf,
    #[arg(long)]
    pub vertices: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct StatsArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct ExecArgs {
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    pub workers: u64,
    /// Execute through per-source shards in this directory.
    #[arg(long)]
    pub shard_dir: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct CaseArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    #[command(flatten)]
    pub exec: ExecArgs,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 10)]
    pub top_k: usize,
    /// Divide each table by its maximum.
    #[arg(long)]
    pub normalize: bool,
}

#[derive(Args, Debug)]
pub struct Case2Args {
    #[command(flatten)]
    pub graph: GraphArgs,
    #[command(flatten)]
    pub exec: ExecArgs,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 10)]
    pub top_k: usize,
    /// Black-start generators [default: those flagged in the vertex file].
    #[arg(long, value_delimiter = ',')]
    pub black_start: Option<Vec<String>>,
    /// Betweenness level counted as high importance.
    #[arg(long, default_value_t = 0.2)]
    pub threshold: f64,
    #[arg(long, default_value_t = 512)]
    pub grid_points: usize,
}

#[derive(Args, Debug)]
pub struct ScenarioArgs {
    /// Built-in scenario or one defined in `--config`.
    #[arg(long)]
    pub scenario: String,
    /// TOML file with `[[scenario]]` tables.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    pub black_start: Option<Vec<String>>,
}

#[derive(Args, Debug)]
pub struct RunArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    pub workers: u64,
    #[arg(long)]
    pub shard_dir: PathBuf,
}

#[derive(Args, Debug)]
pub struct MergeArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    #[arg(long)]
    pub shard_dir: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Normalize even if the scenario does not.
    #[arg(long)]
    pub normalize: bool,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    let res = match cli.command {
        Command::Build(a) => commands::build(&a),
        Command::Stats(a) => commands::stats(&a),
        Command::Case1(a) => commands::case1(&a),
        Command::Case2(a) => commands::case2(&a),
        Command::Run(a) => commands::run(&a),
        Command::Merge(a) => commands::merge(&a),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
