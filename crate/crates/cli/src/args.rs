use std::path::PathBuf;

use aen_shaping::{DEFAULT_NODES, DEFAULT_SAMPLES, GOLDEN_LAMBDA};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(
    name = "aen",
    version,
    about = "Shaped constellations and mutual information for the additive exponential noise channel"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write the symbols (and Gray labels under BICM) of one constellation.
    Constellation {
        #[command(flatten)]
        set: SetArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Estimate mutual information at one SNR.
    Mi {
        #[command(flatten)]
        set: SetArgs,
        #[arg(long, allow_hyphen_values = true)]
        snr_db: f64,
        #[command(flatten)]
        est: EstimatorArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Estimate mutual information over an SNR grid.
    Sweep {
        #[command(flatten)]
        set: SetArgs,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        est: EstimatorArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// SNR needed for a target rate and its dB gap to capacity.
    Gap {
        #[command(flatten)]
        set: SetArgs,
        /// Target rates in bits per channel use; repeat or comma-separate.
        #[arg(long = "target", required = true, value_delimiter = ',')]
        targets: Vec<f64>,
        #[command(flatten)]
        search: SearchArgs,
        #[command(flatten)]
        est: EstimatorArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Best log against best Martinez set over the sizes of a recipe.
    Compare {
        #[arg(long, value_enum)]
        recipe: Recipe,
        /// Target rates; defaults to the recipe's own.
        #[arg(long = "target", value_delimiter = ',')]
        targets: Vec<f64>,
        #[arg(long, default_value_t = GOLDEN_LAMBDA)]
        lambda: f64,
        /// Emit the recipe's MI curves over the SNR grid instead.
        #[arg(long)]
        curves: bool,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        search: SearchArgs,
        #[command(flatten)]
        est: EstimatorArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Reduced-scale invariant and oracle checks.
    Selftest {
        #[arg(long, value_enum)]
        format: Option<Format>,
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long, env = "AEN_SHARDS")]
        shards: Option<usize>,
        /// Swap two labels of the 8-ary Gray labeling.
        #[arg(long, hide = true)]
        inject_non_gray: bool,
        /// Relative offset added to the closed-form 8-ary log symbols.
        #[arg(long, hide = true, default_value_t = 0.0)]
        perturb_log: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FamilyArg {
    Uniform,
    Martinez,
    Log,
    /// The capacity curve log2(1+γ); no constellation.
    Capacity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SchemeArg {
    Cm,
    Bicm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodArg {
    #[value(alias = "monte-carlo")]
    Mc,
    Quadrature,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Recipe {
    /// CM, M in {4..256}.
    Fig1,
    /// CM, M in {256..2048}.
    Fig2,
    /// BICM, M in {4..256}.
    Fig3,
}

#[derive(Debug, Args)]
pub struct SetArgs {
    #[arg(long, value_enum)]
    pub family: FamilyArg,
    /// Number of symbols.
    #[arg(long)]
    pub m: Option<usize>,
    /// Martinez exponent.
    #[arg(long, default_value_t = GOLDEN_LAMBDA)]
    pub lambda: f64,
    #[arg(long, value_enum, default_value_t = SchemeArg::Cm)]
    pub scheme: SchemeArg,
}

#[derive(Debug, Args)]
pub struct GridArgs {
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub start: f64,
    #[arg(long, default_value_t = 30.0, allow_hyphen_values = true)]
    pub stop: f64,
    #[arg(long, default_value_t = 0.25)]
    pub step: f64,
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    /// Bisection stops once the SNR bracket is this narrow.
    #[arg(long, default_value_t = 0.01)]
    pub tol_db: f64,
}

#[derive(Debug, Args)]
pub struct EstimatorArgs {
    #[arg(long, value_enum, default_value_t = MethodArg::Mc)]
    pub method: MethodArg,
    #[arg(long, default_value_t = DEFAULT_SAMPLES)]
    pub n_samples: u64,
    #[arg(long, default_value_t = DEFAULT_NODES)]
    pub n_nodes: usize,
    #[arg(long, env = "AEN_SEED", default_value_t = 1)]
    pub seed: u64,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long, env = "AEN_SHARDS")]
    pub shards: Option<usize>,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub output: Option<PathBuf>,
}
