//! `amplify`: build, certify, encode and decode cascaded direct-sum codes.

mod commands;
mod config;
mod error;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use amplify_core::rpp::DEFAULT_WALK_CAP;
use amplify_core::spectra::DEFAULT_DIM_CAP;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Parser, Debug, Serialize)]
#[command(name = "amplify", version, about = "Cascaded direct-sum codes on wide replacement products")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct Global {
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Largest walk collection any command may enumerate.
    #[arg(long, global = true, default_value_t = DEFAULT_WALK_CAP)]
    pub cap_walks: usize,
    /// Largest operator dimension any spectral computation may touch.
    #[arg(long, global = true, default_value_t = DEFAULT_DIM_CAP)]
    pub cap_dim: usize,
    /// Output directory for artifacts and the run manifest.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Evaluate the parameter engine and its certificates.
    Params(ParamsArgs),
    /// Build a cascade from a TOML config into --out.
    Build(BuildArgs),
    /// Encode a message through a built cascade.
    Encode(EncodeArgs),
    /// Decode a top-level word through a built cascade.
    Decode(DecodeArgs),
    /// σ₂ of a graph, or the zig-zag checks of a configured product.
    Spectra(SpectraArgs),
    /// Splittability τ of a walk collection or of product walks.
    CertifySplittability(SplitArgs),
    /// Exhaustive parity-sampling measure of a walk collection.
    ParitySampler(ParityArgs),
    /// Prune a list to a ζ-cover and optionally check it covers a reference list.
    CoverPrune(CoverArgs),
    /// Run the acceptance criteria.
    Selftest(SelftestArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModeArg {
    Paper,
    Desk,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Round {
    /// Γ(D, ε, α, Q) with its bias and rate certificates.
    One,
    /// The adjusted Round II schedule.
    Two,
    /// Width chosen from ε.
    Three,
    /// The final list-decoding radius.
    Four,
    /// List-decoding thresholds at radius 1/2 − √η and arity k.
    Thresholds,
}

#[derive(Args, Debug, Serialize)]
pub struct ParamsArgs {
    #[arg(long, value_enum, default_value_t = Round::One)]
    pub round: Round,
    /// s = 1/α.
    #[arg(long, default_value_t = 128)]
    pub alpha_inv: u64,
    /// x with ε = 2^{−x}.
    #[arg(long, default_value_t = 1e13)]
    pub log2_inv_eps: f64,
    #[arg(long, default_value_t = 20.0)]
    pub log2_dim: f64,
    #[arg(long, default_value_t = 1)]
    pub q: u64,
    #[arg(long, value_enum, default_value_t = ModeArg::Paper)]
    pub mode: ModeArg,
    /// Constant in s = c3·x^{1/6} (round three).
    #[arg(long, default_value_t = 1.0)]
    pub c3: f64,
    /// Constants c and κ of the final radius (round four).
    #[arg(long, default_value_t = 1.0)]
    pub c: f64,
    #[arg(long, default_value_t = 8.0)]
    pub kappa: f64,
    /// log₂ η and arity k for the thresholds.
    #[arg(long, default_value_t = -8.0, allow_negative_numbers = true)]
    pub log2_eta: f64,
    #[arg(long, default_value_t = 16)]
    pub k: u64,
}

#[derive(Args, Debug, Serialize)]
pub struct BuildArgs {
    pub config: PathBuf,
}

#[derive(Args, Debug, Serialize)]
pub struct EncodeArgs {
    #[arg(long)]
    pub cascade: PathBuf,
    /// Message bits, e.g. 101.
    #[arg(long)]
    pub message: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DecoderKind {
    Unique,
    FixedPoly,
}

#[derive(Args, Debug, Serialize)]
pub struct DecodeArgs {
    #[arg(long)]
    pub cascade: PathBuf,
    /// File whose first line is the received top-level word.
    #[arg(long)]
    pub word: PathBuf,
    #[arg(long, value_enum, default_value_t = DecoderKind::Unique)]
    pub decoder: DecoderKind,
    /// List radius parameter; defaults to the bias of the top code.
    #[arg(long)]
    pub eta: Option<String>,
    /// Cover parameter of the fixed-poly decoder; defaults to the midpoint of η and 1/4.
    #[arg(long)]
    pub eta0: Option<String>,
}

#[derive(Args, Debug, Serialize)]
pub struct SpectraArgs {
    #[arg(long, conflicts_with = "graph", required_unless_present = "graph")]
    pub config: Option<PathBuf>,
    /// Graph file, or a shorthand such as "cayley z8 1,7".
    #[arg(long)]
    pub graph: Option<String>,
}

#[derive(Args, Debug, Serialize)]
pub struct SplitArgs {
    #[arg(long, conflicts_with = "walks", required_unless_present = "walks")]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub walks: Option<PathBuf>,
    /// Product vertices per tree leaf (with --config).
    #[arg(long, default_value_t = 1)]
    pub block: usize,
    /// Number of leaves (with --config); ignored when --tree is given.
    #[arg(long, default_value_t = 2)]
    pub arity: usize,
    /// Splitting tree file; defaults to the balanced tree.
    #[arg(long)]
    pub tree: Option<PathBuf>,
    /// Fail (exit 3) when τ exceeds this.
    #[arg(long)]
    pub tau_max: Option<f64>,
}

#[derive(Args, Debug, Serialize)]
pub struct ParityArgs {
    #[arg(long)]
    pub walks: PathBuf,
    #[arg(long)]
    pub eps0: String,
    /// Fail (exit 3) when the measure exceeds this.
    #[arg(long)]
    pub eta: Option<String>,
}

#[derive(Args, Debug, Serialize)]
pub struct CoverArgs {
    /// Word file with the list to prune.
    #[arg(long)]
    pub list: PathBuf,
    #[arg(long, conflicts_with = "eta0", required_unless_present = "eta0")]
    pub zeta: Option<String>,
    /// Sets ζ = 1/8 − η0/8.
    #[arg(long)]
    pub eta0: Option<String>,
    /// Collection the list entries are lifted through; the identity when absent.
    #[arg(long)]
    pub walks: Option<PathBuf>,
    /// Reference list the pruned list must ζ-cover.
    #[arg(long)]
    pub truth: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct SelftestArgs {
    /// Criterion id, name substring, or tag.
    #[arg(long)]
    pub filter: Option<String>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("amplify: {e}");
            e.exit_code()
        }
    }
}
