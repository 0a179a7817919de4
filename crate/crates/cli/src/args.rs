//! Command-line surface. Every option mirrors a key of the command's JSON
//! config (dashes for underscores); given options override the config file.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use sparsepath::experiments::Varied;
use sparsepath::{Lambda0, MatrixKind, Penalty};

use crate::config::{LambdaStarArg, Rule, SignalChoice};

#[derive(Debug, Parser)]
#[command(
    name = "sparsepath",
    version,
    about = "Sparse recovery by iterative soft/hard thresholding with continuation"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a problem instance into a directory.
    Gen(GenArgs),
    /// Solve a generated problem with ISTC/IHTC.
    Solve(SolveArgs),
    /// Run the full lambda path on a problem and select a point.
    Path(PathArgs),
    /// Support-recovery probability as s, sigma or nu varies.
    Sweep(SweepArgs),
    /// Phase-transition grid and fitted 90% success curve.
    Phase(PhaseArgs),
    /// Accuracy and cost table over problem sizes.
    Bench(BenchArgs),
    /// 1D reconstruction from partial Fourier samples in a Haar basis.
    Haar1d(Haar1dArgs),
}

#[derive(Debug, Args)]
pub struct Common {
    /// JSON config file (a bare config object or a previous run_manifest.json).
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, env = "SPARSEPATH_OUT", default_value = "sparsepath-out", value_name = "DIR")]
    pub out: PathBuf,
    /// Worker threads for experiments (results do not depend on it).
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub workers: Option<u64>,
}

#[derive(Debug, Args, Serialize)]
pub struct PathFlags {
    /// Path decrease factor, in (0, 1).
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Inner iterations per path step.
    #[arg(long)]
    pub kmax: Option<usize>,
    /// Maximum number of path steps (`path_len_N`).
    #[arg(long = "path-len")]
    #[serde(rename = "path_len_N")]
    pub path_len: Option<usize>,
    /// Selection rule on the full path: bic or extended_bic.
    #[arg(long)]
    pub criterion: Option<Rule>,
    /// Extended-BIC weight on ln p.
    #[arg(long)]
    pub ebic_gamma: Option<f64>,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub flags: GenFlags,
}

#[derive(Debug, Args, Serialize)]
pub struct GenFlags {
    /// gaussian, bernoulli, correlated_gaussian or partial_fft_haar.
    #[arg(long)]
    pub kind: Option<MatrixKind>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub p: Option<usize>,
    /// Sparsity of the true signal.
    #[arg(long)]
    pub s: Option<usize>,
    /// Dynamic range of the nonzero magnitudes.
    #[arg(long)]
    pub dr: Option<f64>,
    /// Noise standard deviation.
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Column correlation for correlated_gaussian.
    #[arg(long)]
    pub nu: Option<f64>,
    /// Haar depth for partial_fft_haar.
    #[arg(long)]
    pub levels: Option<usize>,
    /// sparse or piecewise_linear.
    #[arg(long)]
    pub signal: Option<SignalChoice>,
    /// Segments of a piecewise-linear signal.
    #[arg(long)]
    pub segments: Option<usize>,
    /// Segments carrying a ramp.
    #[arg(long)]
    pub active: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Also compute the mutual coherence and store it in the manifest.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub compute_mu: Option<bool>,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub flags: SolveFlags,
}

#[derive(Debug, Args, Serialize)]
pub struct SolveFlags {
    /// Problem directory written by `gen`.
    #[arg(long, value_name = "DIR")]
    pub problem: Option<PathBuf>,
    /// l1 (ISTC) or l0 (IHTC).
    #[arg(long)]
    pub penalty: Option<Penalty>,
    /// Initial lambda: a number or auto.
    #[arg(long, value_parser = parse_lambda0)]
    pub lambda0: Option<Lambda0>,
    /// auto (theory rule, needs --mu-s and --c1/--c0), full_path, or a number.
    #[arg(long)]
    pub lambda_star: Option<LambdaStarArg>,
    /// Coherence times sparsity of the instance.
    #[arg(long)]
    pub mu_s: Option<f64>,
    /// Constant C1 of the l1 rule lambda* = C1 eps.
    #[arg(long)]
    pub c1: Option<f64>,
    /// Constant C0 of the l0 rule lambda* = C0 eps^2.
    #[arg(long)]
    pub c0: Option<f64>,
    /// Noise level ||eta||; defaults to the one recorded with the problem.
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[command(flatten)]
    #[serde(flatten)]
    pub path: PathFlags,
}

#[derive(Debug, Args)]
pub struct PathArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub flags: PathCmdFlags,
}

#[derive(Debug, Args, Serialize)]
pub struct PathCmdFlags {
    /// Problem directory written by `gen`.
    #[arg(long, value_name = "DIR")]
    pub problem: Option<PathBuf>,
    /// l1 (ISTC) or l0 (IHTC).
    #[arg(long)]
    pub penalty: Option<Penalty>,
    #[command(flatten)]
    #[serde(flatten)]
    pub path: PathFlags,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub flags: SweepFlags,
}

#[derive(Debug, Args, Serialize)]
pub struct SweepFlags {
    /// Varied parameter: s, sigma or nu. Selects the preset defaults.
    #[arg(long)]
    pub varied: Option<Varied>,
    /// Grid values, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub values: Option<Vec<f64>>,
    #[arg(long)]
    pub kind: Option<MatrixKind>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub p: Option<usize>,
    #[arg(long)]
    pub s: Option<usize>,
    #[arg(long)]
    pub dr: Option<f64>,
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long)]
    pub nu: Option<f64>,
    #[arg(long)]
    pub replications: Option<usize>,
    #[arg(long)]
    pub base_seed: Option<u64>,
    #[arg(long)]
    pub penalty: Option<Penalty>,
    #[command(flatten)]
    #[serde(flatten)]
    pub path: PathFlags,
}

#[derive(Debug, Args)]
pub struct PhaseArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub flags: PhaseFlags,
    /// Also write one (rho, rate) series per delta under series/.
    #[arg(long)]
    pub series: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct PhaseFlags {
    #[arg(long)]
    pub p: Option<usize>,
    /// Points per axis when the grids are not given explicitly.
    #[arg(long)]
    pub grid_size: Option<usize>,
    /// Explicit delta = n/p grid, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub delta_grid: Option<Vec<f64>>,
    /// Explicit rho = s/n grid, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub rho_grid: Option<Vec<f64>>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Relative l2 error at or below which a trial succeeds.
    #[arg(long)]
    pub success_threshold: Option<f64>,
    #[arg(long)]
    pub base_seed: Option<u64>,
    #[arg(long)]
    pub penalty: Option<Penalty>,
    #[command(flatten)]
    #[serde(flatten)]
    pub path: PathFlags,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub flags: BenchFlags,
}

#[derive(Debug, Args, Serialize)]
pub struct BenchFlags {
    /// Signal lengths p, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub sizes: Option<Vec<usize>>,
    #[arg(long)]
    pub kind: Option<MatrixKind>,
    /// n = p / n_divisor.
    #[arg(long)]
    pub n_divisor: Option<usize>,
    /// s = p / s_divisor.
    #[arg(long)]
    pub s_divisor: Option<usize>,
    #[arg(long)]
    pub dr: Option<f64>,
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long)]
    pub replications: Option<usize>,
    #[arg(long)]
    pub base_seed: Option<u64>,
    #[arg(long)]
    pub penalty: Option<Penalty>,
    #[command(flatten)]
    #[serde(flatten)]
    pub path: PathFlags,
}

#[derive(Debug, Args)]
pub struct Haar1dArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub flags: Haar1dFlags,
}

#[derive(Debug, Args, Serialize)]
pub struct Haar1dFlags {
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub p: Option<usize>,
    #[arg(long)]
    pub levels: Option<usize>,
    #[arg(long)]
    pub segments: Option<usize>,
    #[arg(long)]
    pub active: Option<usize>,
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub penalty: Option<Penalty>,
    #[command(flatten)]
    #[serde(flatten)]
    pub path: PathFlags,
}

fn parse_lambda0(s: &str) -> Result<Lambda0, String> {
    if s == "auto" {
        return Ok(Lambda0::Auto);
    }
    s.parse::<f64>()
        .map(Lambda0::Value)
        .map_err(|_| format!("expected a number or auto, got {s:?}"))
}
