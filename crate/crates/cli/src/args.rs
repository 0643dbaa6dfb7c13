use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use sosps::experiment::CutoffSpec;
use sosps::sdp::SdpOptions;

#[derive(Debug, Parser)]
#[command(name = "sosps", version, about = "SOS and Positivstellensatz refutations over the Boolean hypercube")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate an instance file.
    Gen(GenArgs),
    /// Check a proof against a system and report its measures.
    Verify(VerifyArgs),
    /// Least degree at which the relaxation refutes an instance.
    Degree(DegreeArgs),
    /// Best degree-d bound on a polynomial and the matching pseudo-expectation.
    Bound(BoundArgs),
    /// Extract a pseudo-expectation, or check one with --check.
    Pexp(PexpArgs),
    /// Degree reduction of a refutation: bound, trace and, if asked, the proof.
    Reduce(ReduceArgs),
    /// Run a batch study from a JSON config.
    Experiment(ExperimentArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Family {
    Tseitin,
    Knapsack,
    Xor,
    Sat,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long, value_enum)]
    pub family: Family,
    /// Variables (xor, sat, knapsack) or vertices (tseitin).
    #[arg(long)]
    pub n: u32,
    /// Number of constraints (xor, sat).
    #[arg(long)]
    pub m: Option<usize>,
    /// Right-hand side (knapsack) or arity (xor, sat; default 3).
    #[arg(long)]
    pub k: Option<i64>,
    /// Regular degree of a random Tseitin graph; without it the graph is a cycle.
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Vertex charges for Tseitin, e.g. `1,1,0`; default all 1.
    #[arg(long, value_delimiter = ',')]
    pub charges: Vec<u8>,
    /// Output file; stdout if absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Instance or bare system JSON.
    pub system: PathBuf,
    /// Proof in the exchange format.
    pub proof: PathBuf,
    /// Cut-off for the degree modulo c: kw, degsum, degsum+N or a constant.
    #[arg(long, default_value = "degsum")]
    pub cutoff: CutoffSpec,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Relaxation and rounding parameters shared by the SDP subcommands.
#[derive(Debug, Clone, Args)]
pub struct SolveArgs {
    /// Product width.
    #[arg(long, default_value_t = 1)]
    pub w: u32,
    #[arg(long, default_value = "kw")]
    pub cutoff: CutoffSpec,
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    /// Round certificates to exact proofs.
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    pub rationalize: bool,
    #[arg(long, default_value_t = 1_000_000)]
    pub denom_cap: u64,
}

impl SolveArgs {
    pub fn options(&self) -> SdpOptions {
        SdpOptions { max_denominator: self.denom_cap, rationalize: self.rationalize, ..SdpOptions::with_tol(self.tol) }
    }
}

#[derive(Debug, Args)]
pub struct DegreeArgs {
    pub instance: PathBuf,
    /// Largest degree tried.
    #[arg(long, default_value_t = 8)]
    pub dmax: u32,
    #[command(flatten)]
    pub solve: SolveArgs,
    /// Where to write the exact refutation, if one is found.
    #[arg(long)]
    pub proof_out: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BoundArgs {
    pub instance: PathBuf,
    /// The polynomial to bound from below, over the instance's variables.
    #[arg(long)]
    pub objective: String,
    /// Bound the objective from above instead.
    #[arg(long)]
    pub maximize: bool,
    #[arg(long, default_value_t = 2)]
    pub d: u32,
    #[command(flatten)]
    pub solve: SolveArgs,
    /// Where to write the exact certificate of the bound.
    #[arg(long)]
    pub proof_out: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PexpArgs {
    pub instance: PathBuf,
    #[arg(long, default_value_t = 2)]
    pub d: u32,
    /// Check this pseudo-expectation instead of extracting one.
    #[arg(long)]
    pub check: Option<PathBuf>,
    /// Tolerance on `E(1) = 1` and the equality moments when checking.
    #[arg(long, default_value_t = 1e-6)]
    pub check_tol: f64,
    #[command(flatten)]
    pub solve: SolveArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    BoundOnly,
    Constructive,
}

#[derive(Debug, Args)]
pub struct ReduceArgs {
    pub instance: PathBuf,
    /// A refutation of the instance in the exchange format.
    pub proof: PathBuf,
    #[arg(long, value_enum, default_value_t = Mode::BoundOnly)]
    pub mode: Mode,
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    #[arg(long, default_value = "kw")]
    pub cutoff: CutoffSpec,
    /// Largest number of variables accepted in constructive mode.
    #[arg(long, default_value_t = 8)]
    pub max_pairs: u32,
    /// Where to write the constructed refutation.
    #[arg(long)]
    pub proof_out: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    /// The study as one JSON document; the flags below override it.
    pub config: PathBuf,
    /// Worker threads; 0 means one per core.
    /// Defaults to the config, then to the SOSPS_JOBS environment variable.
    #[arg(long)]
    pub jobs: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    pub seeds: Option<Vec<u64>>,
    #[arg(long, value_delimiter = ',')]
    pub degrees: Option<Vec<u32>>,
    #[arg(long, value_delimiter = ',')]
    pub widths: Option<Vec<u32>>,
    #[arg(long)]
    pub cutoff: Option<CutoffSpec>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub csv: Option<PathBuf>,
    #[arg(long)]
    pub json: Option<PathBuf>,
    #[arg(long)]
    pub timings: Option<PathBuf>,
}
