//! `armplan`: world generation, oracle data collection, training, planning and
//! benchmarking from the command line.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use armplan_core::planners::PlannerKind;
use armplan_core::world::Profile;
use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(
    name = "armplan",
    version,
    about = "Motion planning toolkit for 6-DOF arms"
)]
pub struct Cli {
    /// Master seed; every random stream is derived from it.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Robot description file (defaults to the bundled UR5e-like arm).
    #[arg(long, global = true)]
    pub robot: Option<PathBuf>,
    /// Settings file (TOML, or JSON when the extension is .json).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Root directory for worlds, paths and pairs.
    #[arg(long, global = true, env = "ARMPLAN_DATA", default_value = "data")]
    pub data_root: PathBuf,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a suite of random worlds.
    GenWorlds(GenWorldsArgs),
    /// Collect oracle paths in every world of a suite and build training pairs.
    Collect(CollectArgs),
    /// Train a heuristic on the pairs of a suite.
    Train(TrainArgs),
    /// Plan a single query.
    Plan(PlanArgs),
    /// Run several planners on benchmark suites, or re-run a saved bundle.
    Bench(BenchArgs),
    /// Print the table of a finished benchmark.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct GenWorldsArgs {
    #[arg(long)]
    pub suite: String,
    #[arg(long)]
    pub profile: Profile,
    #[arg(long, default_value_t = 10)]
    pub count: usize,
}

#[derive(Debug, Args)]
pub struct CollectArgs {
    #[arg(long)]
    pub suite: String,
    /// Oracle paths per world.
    #[arg(long, default_value_t = 200)]
    pub paths: usize,
    /// Only collect in this world; pairs are still rebuilt from the whole suite.
    #[arg(long)]
    pub world: Option<String>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub suite: String,
    /// Output weight file; checkpoints go to `<out>.ckpt` and the report to `<out>.report.json`.
    #[arg(long)]
    pub out: PathBuf,
    /// Continue from `<out>.ckpt`.
    #[arg(long)]
    pub resume: bool,
    #[arg(long)]
    pub epochs: Option<usize>,
    /// Train the heuristic on joint angles only, without forward kinematics.
    #[arg(long)]
    pub relaxed: bool,
    #[arg(long, default_value_t = 10)]
    pub checkpoint_every: usize,
}

#[derive(Debug, Args)]
pub struct PlanArgs {
    /// Workspace file.
    #[arg(long)]
    pub world: PathBuf,
    /// Start configuration, six comma-separated angles; sampled when omitted.
    #[arg(long)]
    pub start: Option<String>,
    #[arg(long)]
    pub goal: Option<String>,
    #[arg(long, default_value = "neural")]
    pub planner: PlannerKind,
    /// Heuristic weights, required by the neural planner.
    #[arg(long)]
    pub weights: Option<PathBuf>,
    /// Where to write the path file.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// World suite to benchmark (repeatable).
    #[arg(long = "suite")]
    pub suites: Vec<String>,
    /// Heuristic weight file; its obstacle capacity selects the profile (repeatable).
    #[arg(long = "weights")]
    pub weights: Vec<PathBuf>,
    /// Comma-separated planner list; overrides the config.
    #[arg(long, value_delimiter = ',')]
    pub planners: Option<Vec<PlannerKind>>,
    /// Queries per world; overrides the config.
    #[arg(long)]
    pub queries: Option<usize>,
    /// Re-run a saved bundle instead of building one.
    #[arg(long, conflicts_with_all = ["suites", "weights", "planners", "queries"])]
    pub bundle: Option<PathBuf>,
    /// Output directory for the bundle, CSV files and report.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Benchmark output directory.
    #[arg(long)]
    pub dir: PathBuf,
}

/// Exit codes: 2 usage, 3 missing or unreadable file, 4 malformed file,
/// 5 invalid argument or query, 6 resource exhausted, 7 missing weights,
/// 8 no path found, 1 anything else.
fn exit_code(err: &anyhow::Error) -> u8 {
    use armplan_core::Error as E;
    for cause in err.chain() {
        if cause.downcast_ref::<commands::NoPath>().is_some() {
            return 8;
        }
        if let Some(e) = cause.downcast_ref::<E>() {
            return match e {
                E::Io { .. } => 3,
                E::Format { .. } => 4,
                E::InvalidArgument(_) | E::InvalidQuery(_) | E::ShapeMismatch { .. } => 5,
                E::ResourceExhausted(_) => 6,
                E::MissingWeights(_) => 7,
                E::NonFinite(_) => 1,
            };
        }
    }
    1
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
