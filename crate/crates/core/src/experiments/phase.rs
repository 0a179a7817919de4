//! Phase-transition grids over `delta = n/p` and `rho = s/n`.

use serde::{Deserialize, Serialize};

use super::logistic::{fit_90pct_curve, Rho90};
use super::{classify, run_indexed, Outcome, PathParams};
use crate::error::{Error, Result};
use crate::metrics::reconstruction_metrics;
use crate::probgen::{gen_problem, MatrixKind, ProblemSpec};
use crate::seed;
use crate::thresholding::Penalty;

/// `k` equally spaced points from `a` to `b` inclusive.
pub fn linspace(a: f64, b: f64, k: usize) -> Vec<f64> {
    match k {
        0 => vec![],
        1 => vec![a],
        _ => (0..k)
            .map(|i| {
                let t = i as f64 / (k - 1) as f64;
                a * (1.0 - t) + b * t
            })
            .collect(),
    }
}

/// `n = round(delta p)`, `s = round(rho n)`, both at least 1.
pub fn cell_dims(p: usize, delta: f64, rho: f64) -> (usize, usize) {
    let n = ((delta * p as f64).round() as usize).clamp(1, p);
    let s = ((rho * n as f64).round() as usize).clamp(1, n);
    (n, s)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhaseSpec {
    pub p: usize,
    pub delta_grid: Vec<f64>,
    pub rho_grid: Vec<f64>,
    pub trials: usize,
    /// Instance noise level.
    pub sigma: f64,
    /// A trial succeeds when the relative l2 error is at most this.
    pub success_threshold: f64,
    pub base_seed: u64,
    pub path: PathParams,
}

impl Default for PhaseSpec {
    fn default() -> Self {
        Self {
            p: 1000,
            delta_grid: linspace(0.1, 1.0, 30),
            rho_grid: linspace(0.1, 1.0, 30),
            trials: 100,
            sigma: 1e-6,
            success_threshold: 1e-2,
            base_seed: 0,
            path: PathParams::default(),
        }
    }
}

impl PhaseSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidExperiment(msg));
        if self.p < 2 {
            return bad(format!("p = {} is too small for a phase grid", self.p));
        }
        if self.delta_grid.is_empty() || self.rho_grid.is_empty() {
            return bad("delta and rho grids must be nonempty".into());
        }
        let in_unit = |v: &f64| (0.1 - 1e-12..=1.0 + 1e-12).contains(v);
        if !self.delta_grid.iter().all(in_unit) || !self.rho_grid.iter().all(in_unit) {
            return bad("grid values must lie in [0.1, 1]".into());
        }
        if self.trials == 0 {
            return bad("trials must be >= 1".into());
        }
        if !(self.sigma >= 0.0 && self.success_threshold > 0.0) {
            return bad("sigma must be >= 0 and success_threshold > 0".into());
        }
        self.path.validate()
    }

    fn trial_succeeds(&self, penalty: Penalty, delta: f64, rho: f64, seed: u64) -> Result<Outcome> {
        let (n, s) = cell_dims(self.p, delta, rho);
        classify((|| {
            // Equal-magnitude (+-1) nonzeros: dynamic range 1.
            let spec = ProblemSpec::new(MatrixKind::Gaussian, n, self.p, s, 1.0, self.sigma, seed);
            let problem = gen_problem(&spec)?;
            let sel = self.path.solve(&problem.op, &problem.y, penalty)?;
            Ok(reconstruction_metrics(&sel.x, &problem.x_true)?.rel_l2 <= self.success_threshold)
        })())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseCell {
    pub delta: f64,
    pub rho: f64,
    pub n: usize,
    pub s: usize,
    pub successes: usize,
    pub trials: usize,
}

impl PhaseCell {
    pub fn rate(&self) -> f64 {
        self.successes as f64 / self.trials as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseGrid {
    pub penalty: Penalty,
    pub p: usize,
    pub delta_grid: Vec<f64>,
    pub rho_grid: Vec<f64>,
    pub trials: usize,
    pub sigma: f64,
    pub success_threshold: f64,
    /// Cells in delta-major order: `cells[i * rho_grid.len() + j]`.
    pub cells: Vec<PhaseCell>,
    pub curve90: Vec<Rho90>,
}

impl PhaseGrid {
    pub const CSV_HEADER: &'static str = "delta,rho,n,s,successes,trials,rate";

    pub fn cell(&self, i: usize, j: usize) -> &PhaseCell {
        &self.cells[i * self.rho_grid.len() + j]
    }

    /// Cells of the `i`-th delta column, in rho order.
    pub fn column(&self, i: usize) -> &[PhaseCell] {
        let m = self.rho_grid.len();
        &self.cells[i * m..(i + 1) * m]
    }

    pub fn to_csv(&self) -> String {
        let mut out = format!("{}\n", Self::CSV_HEADER);
        for c in &self.cells {
            out.push_str(&format!(
                "{:e},{:e},{},{},{},{},{:e}\n",
                c.delta,
                c.rho,
                c.n,
                c.s,
                c.successes,
                c.trials,
                c.rate()
            ));
        }
        out
    }

    pub fn curve_csv(&self) -> String {
        let mut out = String::from("delta,rho90,method\n");
        for r in &self.curve90 {
            out.push_str(&format!("{:e},{:e},{}\n", r.delta, r.rho90, r.method.as_str()));
        }
        out
    }

    /// `(rho, rate)` series of the `i`-th delta column.
    pub fn series_csv(&self, i: usize) -> String {
        let mut out = String::from("rho,rate\n");
        for c in self.column(i) {
            out.push_str(&format!("{:e},{:e}\n", c.rho, c.rate()));
        }
        out
    }
}

/// Success counts over the grid and the fitted 90% curve. The seed of trial
/// `t` in cell `(i, j)` is `derive(base_seed, [i, j, t])`.
pub fn phase_transition_grid(spec: &PhaseSpec, penalty: Penalty, workers: usize) -> Result<PhaseGrid> {
    spec.validate()?;
    let (nd, nr, nt) = (spec.delta_grid.len(), spec.rho_grid.len(), spec.trials);
    let outcomes = run_indexed(workers, nd * nr * nt, |task| {
        let (cell, t) = (task / nt, task % nt);
        let (i, j) = (cell / nr, cell % nr);
        let seed = seed::derive(spec.base_seed, &[i as u64, j as u64, t as u64]);
        spec.trial_succeeds(penalty, spec.delta_grid[i], spec.rho_grid[j], seed)
    })?
    .into_iter()
    .collect::<Result<Vec<_>>>()?;

    let cells = outcomes
        .chunks(nt)
        .enumerate()
        .map(|(cell, chunk)| {
            let (delta, rho) = (spec.delta_grid[cell / nr], spec.rho_grid[cell % nr]);
            let (n, s) = cell_dims(spec.p, delta, rho);
            PhaseCell {
                delta,
                rho,
                n,
                s,
                successes: chunk.iter().filter(|o| **o == Outcome::Success).count(),
                trials: nt,
            }
        })
        .collect();

    let mut grid = PhaseGrid {
        penalty,
        p: spec.p,
        delta_grid: spec.delta_grid.clone(),
        rho_grid: spec.rho_grid.clone(),
        trials: nt,
        sigma: spec.sigma,
        success_threshold: spec.success_threshold,
        cells,
        curve90: Vec::new(),
    };
    grid.curve90 = fit_90pct_curve(&grid);
    Ok(grid)
}

/// A single cell at arbitrary `(delta, rho)`, e.g. off the grid. Trial seeds
/// are `derive(base_seed, [delta bits, rho bits, t])`.
pub fn phase_cell(spec: &PhaseSpec, penalty: Penalty, delta: f64, rho: f64, workers: usize) -> Result<PhaseCell> {
    let single = PhaseSpec {
        delta_grid: vec![delta],
        rho_grid: vec![rho],
        ..spec.clone()
    };
    single.validate()?;
    let outcomes = run_indexed(workers, spec.trials, |t| {
        let seed = seed::derive(spec.base_seed, &[delta.to_bits(), rho.to_bits(), t as u64]);
        single.trial_succeeds(penalty, delta, rho, seed)
    })?
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let (n, s) = cell_dims(spec.p, delta, rho);
    Ok(PhaseCell {
        delta,
        rho,
        n,
        s,
        successes: outcomes.iter().filter(|o| **o == Outcome::Success).count(),
        trials: spec.trials,
    })
}
