use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

pub const EXIT_CODES: &str = "\
Exit codes:
  0   success
  2   bad command line
  3   invalid parameter combination
  4   config file unreadable or malformed
  5   input matrix unreadable or malformed
  6   output could not be written
  7   invariant violation in a simulation
  8   solver did not converge within the iteration limit
  9   numerical failure (singular pivot, zero diagonal, breakdown)
  10  problem exceeds a size bound

Environment:
  PG_PARALLEL_SEED  overrides every generator seed";

#[derive(Debug, Parser)]
#[command(name = "pgcomp", version, about = "Projective geometry data distributions and schedules", after_help = EXIT_CODES)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Dump the points, lines and planes of P(d, GF(q)).
    Geometry(GeometryArgs),
    /// Build a block distribution and its communication profile.
    Distribute(DistributeArgs),
    /// Solve A x = b with Jacobi-preconditioned CG on a simulated distribution.
    Pcg(PcgArgs),
    /// Compare SpMV message counts and volumes across distributions.
    SpmvBench(SpmvBenchArgs),
    /// Simulate a blocked LU schedule cycle by cycle.
    LuSim(LuSimArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Geometry(_) => "geometry",
            Command::Distribute(_) => "distribute",
            Command::Pcg(_) => "pcg",
            Command::SpmvBench(_) => "spmv-bench",
            Command::LuSim(_) => "lu-sim",
        }
    }

    pub fn output(&self) -> &OutputArgs {
        match self {
            Command::Geometry(a) => &a.out,
            Command::Distribute(a) => &a.out,
            Command::Pcg(a) => &a.out,
            Command::SpmvBench(a) => &a.out,
            Command::LuSim(a) => &a.out,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum DistKind {
    Projective,
    Rowwise,
    Random,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum SchemeKind {
    Pg1,
    Pg2,
    Mesh,
}

#[derive(Debug, Default, Args)]
pub struct OutputArgs {
    /// TOML file with default parameters; flags win on conflict.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Write the CSV table here.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// What to print on stdout.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Args)]
pub struct GeometryArgs {
    /// Projective dimension.
    #[arg(long)]
    pub d: Option<u32>,
    /// Field order, a prime power.
    #[arg(long)]
    pub q: Option<u64>,
    /// Include the seven plane-to-line matchings (d = 4 only).
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub matchings: Option<bool>,
    /// Write the line-plane incidences here, one `<line-id> <plane-id>` per line.
    #[arg(long)]
    pub edges: Option<PathBuf>,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct DistributeArgs {
    #[arg(long, value_enum)]
    pub dist: Option<DistKind>,
    /// Plane order; the process count is p² + p + 1.
    #[arg(long)]
    pub p: Option<u64>,
    /// Process count for row-wise and random maps.
    #[arg(long)]
    pub n: Option<usize>,
    /// Seed of the random map.
    #[arg(long)]
    pub seed: Option<u64>,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Default, Args)]
pub struct MatrixArgs {
    /// Matrix Market coordinate file.
    #[arg(long, conflicts_with = "gen")]
    pub matrix: Option<PathBuf>,
    /// Built-in generator: poisson2d:<side> or diagdom:<n>:<density>:<seed>.
    #[arg(long)]
    pub gen: Option<String>,
}

#[derive(Debug, Args)]
pub struct PcgArgs {
    #[command(flatten)]
    pub source: MatrixArgs,
    #[arg(long, value_enum)]
    pub dist: Option<DistKind>,
    #[arg(long)]
    pub p: Option<u64>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Relative tolerance on the preconditioned residual.
    #[arg(long)]
    pub eps: Option<f64>,
    /// Iteration limit.
    #[arg(long)]
    pub imax: Option<usize>,
    /// Pack vector blocks to their nonzero structure.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub packing: Option<bool>,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SpmvBenchArgs {
    #[command(flatten)]
    pub source: MatrixArgs,
    /// Plane order of the projective map; row-wise uses the same process count.
    #[arg(long)]
    pub p: Option<u64>,
    /// Products timed per configuration; timings go to stderr only.
    #[arg(long)]
    pub repeat: Option<usize>,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct LuSimArgs {
    #[arg(long, value_enum)]
    pub scheme: Option<SchemeKind>,
    /// Matrix order.
    #[arg(long)]
    pub n: Option<usize>,
    /// Block size.
    #[arg(long)]
    pub block: Option<usize>,
    /// Mesh side length.
    #[arg(long)]
    pub q: Option<u32>,
    /// Seed of the random test matrix.
    #[arg(long)]
    pub seed: Option<u64>,
    #[command(flatten)]
    pub out: OutputArgs,
}
