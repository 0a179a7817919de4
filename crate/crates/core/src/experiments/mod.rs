//! Experiment drivers: support-recovery sweeps, phase-transition grids with
//! fitted 90% curves, the benchmark table and the 1D Fourier–Haar
//! reconstruction.
//!
//! Every driver is a pure function of its spec. Replications run on a rayon
//! pool of `workers` threads and are gathered in index order, so the worker
//! count never changes a result.

mod bench;
mod haar1d;
mod logistic;
mod phase;
mod sweep;

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linop::SensingOperator;
use crate::modelselect::{run_full_path, select, Criterion};
use crate::solver::{DEFAULT_GAMMA, DEFAULT_KMAX, DEFAULT_PATH_LEN};
use crate::thresholding::Penalty;

pub use bench::{benchmark_table, BenchRow, BenchSpec};
pub use haar1d::{haar1d_reconstruction, Haar1dResult, Haar1dSpec};
pub use logistic::{fit_90pct_curve, fit_logistic, rho90_for_column, FitMethod, Rho90, TARGET_RATE};
pub use phase::{cell_dims, linspace, phase_cell, phase_transition_grid, PhaseCell, PhaseGrid, PhaseSpec};
pub use sweep::{support_probability_sweep, SweepRow, SweepSpec, SweepTable, Varied};

/// Path settings shared by every experiment: the full path is run and a
/// point is picked by `criterion`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathParams {
    pub gamma: f64,
    pub kmax: usize,
    #[serde(rename = "path_len_N")]
    pub path_len: usize,
    pub criterion: Criterion,
}

impl Default for PathParams {
    fn default() -> Self {
        Self {
            gamma: DEFAULT_GAMMA,
            kmax: DEFAULT_KMAX,
            path_len: DEFAULT_PATH_LEN,
            criterion: Criterion::default(),
        }
    }
}

/// Outcome of a full-path solve followed by selection.
#[derive(Debug, Clone, PartialEq)]
pub struct Selected {
    pub x: Vec<f64>,
    pub lambda: f64,
    pub n_matvec: u64,
}

impl PathParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return Err(Error::InvalidConfig(format!("gamma must lie in (0, 1), got {}", self.gamma)));
        }
        if self.kmax == 0 {
            return Err(Error::InvalidConfig("kmax must be >= 1".into()));
        }
        self.criterion.validate()
    }

    pub fn solve(&self, op: &SensingOperator, y: &[f64], penalty: Penalty) -> Result<Selected> {
        let path = run_full_path(op, y, penalty, self.gamma, self.kmax, self.path_len)?;
        let sel = select(&path, op.nrows(), self.criterion)?;
        Ok(Selected {
            x: sel.x,
            lambda: sel.lambda,
            n_matvec: path.n_matvec,
        })
    }
}

/// `f(0), ..., f(count - 1)` on a pool of `workers` threads, in index order.
pub fn run_indexed<T, F>(workers: usize, count: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    if workers == 0 {
        return Err(Error::InvalidExperiment("workers must be >= 1".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidExperiment(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(|| (0..count).into_par_iter().map(&f).collect()))
}

/// How a replication ended. Divergence counts as a failure, not an abort.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Outcome {
    Success,
    Failure,
    Diverged,
}

pub(crate) fn classify(result: Result<bool>) -> Result<Outcome> {
    match result {
        Ok(true) => Ok(Outcome::Success),
        Ok(false) => Ok(Outcome::Failure),
        Err(Error::Divergence { .. }) => Ok(Outcome::Diverged),
        Err(e) => Err(e),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HostInfo {
    pub os: String,
    pub arch: String,
    pub available_parallelism: usize,
}

impl HostInfo {
    pub fn current() -> Self {
        Self {
            os: std::env::consts::OS.to_string(),
            arch: std::env::consts::ARCH.to_string(),
            available_parallelism: std::thread::available_parallelism().map_or(1, |n| n.get()),
        }
    }
}

/// JSON record written next to every experiment's tables. Everything except
/// `wall_time_s` and `host` is a function of the inputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    pub config: serde_json::Value,
    pub outputs: Vec<String>,
    pub workers: usize,
    pub wall_time_s: f64,
    pub host: HostInfo,
}

impl RunManifest {
    pub fn new(
        command: &str,
        config: &impl Serialize,
        outputs: Vec<String>,
        workers: usize,
        wall_time_s: f64,
    ) -> Result<Self> {
        Ok(Self {
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            config: serde_json::to_value(config)?,
            outputs,
            workers,
            wall_time_s,
            host: HostInfo::current(),
        })
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
    }
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, count) = values.fold((0.0, 0usize), |(s, c), v| (s + v, c + 1));
    if count == 0 {
        f64::NAN
    } else {
        sum / count as f64
    }
}
