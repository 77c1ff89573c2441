//! `pgsim`: batch front end for sampling, chains, density tables and the
//! identity suite.

mod commands;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "pgsim", version, about = "Poisson-Dirichlet, PG and EPG simulation and verification")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Stick-breaking weights of a PD, PG or EPG stream
    SampleSticks(SticksArgs),
    /// Random bridges (atoms and dust)
    SampleBridge(BridgeArgs),
    /// Exchangeable partitions of [n]
    SamplePartition(PartitionArgs),
    /// V, W, q or bridge chains
    RunChain(ChainArgs),
    /// Tabulate a density on a grid
    DensityTable(DensityArgs),
    /// Run the identity suite and write a JSON report
    Verify(VerifyArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    Pd,
    Pg,
    Epg,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    #[arg(long)]
    pub alpha: f64,
    #[arg(long)]
    pub theta: Option<f64>,
    /// zero | const:<v> | gamma:<a>
    #[arg(long, default_value = "zero")]
    pub zeta: String,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Write here instead of stdout
    #[arg(long)]
    pub output: Option<std::path::PathBuf>,
}

#[derive(Args, Debug)]
pub struct SticksArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_enum, default_value = "pg")]
    pub kind: Kind,
    /// Sticks per stream
    #[arg(long, default_value_t = 10)]
    pub n: usize,
    #[arg(long, default_value_t = 1)]
    pub reps: usize,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum BridgeKind {
    Pd,
    Pg,
    Epg,
    /// composition of `--steps` simple bridges from the q-chain
    Flow,
}

#[derive(Args, Debug)]
pub struct BridgeArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_enum, default_value = "pg")]
    pub kind: BridgeKind,
    #[arg(long, default_value_t = 1e-6)]
    pub trunc: f64,
    #[arg(long, default_value_t = 50)]
    pub steps: usize,
    #[arg(long, default_value_t = 1)]
    pub reps: usize,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
}

#[derive(Args, Debug)]
pub struct PartitionArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_enum, default_value = "pd")]
    pub kind: Kind,
    /// Size of the partitioned set
    #[arg(long, default_value_t = 10)]
    pub n: usize,
    #[arg(long, default_value_t = 1)]
    pub reps: usize,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum ChainChoice {
    V,
    W,
    Q,
    Bdgm,
}

#[derive(Args, Debug)]
pub struct ChainArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_enum, default_value = "v")]
    pub chain: ChainChoice,
    #[arg(long, default_value_t = 10)]
    pub steps: usize,
    #[arg(long, default_value_t = 1)]
    pub reps: usize,
    /// Truncation for the bridge chain
    #[arg(long, default_value_t = 1e-4)]
    pub trunc: f64,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Which {
    Delta,
    Stable,
    Tilted,
    Omega,
    Rho,
    E,
    ExpOverTau,
    Q1,
    TransitionV,
    TransitionW,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum EFormArg {
    I,
    Ii,
    Iii,
}

#[derive(Args, Debug)]
pub struct DensityArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_enum)]
    pub which: Which,
    /// start:stop:step
    #[arg(long)]
    pub grid: String,
    /// Evaluation point q for omega
    #[arg(long)]
    pub q: Option<f64>,
    /// Conditioning value t for the transition densities
    #[arg(long)]
    pub t: Option<f64>,
    #[arg(long, value_enum, default_value = "i")]
    pub form: EFormArg,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub common: Common,
    /// Samples per side
    #[arg(long, default_value_t = 100_000)]
    pub n: usize,
    #[arg(long, default_value_t = pgsim::verify::DEFAULT_SIGNIFICANCE)]
    pub significance: f64,
    /// Run a single identity instead of the whole registry
    #[arg(long)]
    pub identity: Option<String>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match commands::run(cli.command) {
        Ok(outcome) => {
            eprintln!("{}", outcome.summary);
            ExitCode::from(outcome.code)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
