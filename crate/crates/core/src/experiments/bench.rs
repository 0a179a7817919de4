//! Benchmark table: mean cost and error per problem size.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::{mean, run_indexed, PathParams};
use crate::error::{Error, Result};
use crate::metrics::reconstruction_metrics;
use crate::probgen::{gen_problem, MatrixKind, ProblemSpec};
use crate::seed;
use crate::thresholding::Penalty;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchSpec {
    /// Signal lengths `p`; `n = floor(p / n_divisor)`, `s = floor(n / s_divisor)`.
    pub sizes: Vec<usize>,
    pub kind: MatrixKind,
    pub n_divisor: usize,
    pub s_divisor: usize,
    pub dr: f64,
    pub sigma: f64,
    pub replications: usize,
    pub base_seed: u64,
    pub path: PathParams,
}

impl Default for BenchSpec {
    fn default() -> Self {
        Self {
            sizes: vec![2000],
            kind: MatrixKind::Bernoulli,
            n_divisor: 4,
            s_divisor: 40,
            dr: 100.0,
            sigma: 5e-2,
            replications: 10,
            base_seed: 0,
            path: PathParams::default(),
        }
    }
}

impl BenchSpec {
    pub fn dims(&self, p: usize) -> (usize, usize) {
        let n = p / self.n_divisor;
        (n, n / self.s_divisor)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidExperiment(msg));
        if self.sizes.is_empty() || self.replications == 0 {
            return bad("sizes must be nonempty and replications >= 1".into());
        }
        if self.n_divisor == 0 || self.s_divisor == 0 {
            return bad("divisors must be >= 1".into());
        }
        for &p in &self.sizes {
            let (n, s) = self.dims(p);
            if n == 0 || s == 0 {
                return bad(format!("p = {p} gives n = {n}, s = {s}; both must be >= 1"));
            }
        }
        self.path.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub p: usize,
    pub n: usize,
    pub s: usize,
    pub replications: usize,
    pub n_matvec: f64,
    pub rel_l2: f64,
    pub abs_linf: f64,
    /// Mean wall time per replication; the only nondeterministic field.
    pub time_s: f64,
}

impl BenchRow {
    pub const CSV_HEADER: &'static str = "p,n,s,replications,n_matvec,rel_l2,abs_linf";
    pub const TIMING_HEADER: &'static str = "p,n,s,replications,time_s";

    /// Deterministic columns; timing goes to [`BenchRow::timing_csv`].
    pub fn to_csv(rows: &[BenchRow]) -> String {
        let mut out = format!("{}\n", Self::CSV_HEADER);
        for r in rows {
            out.push_str(&format!(
                "{},{},{},{},{},{:e},{:e}\n",
                r.p, r.n, r.s, r.replications, r.n_matvec, r.rel_l2, r.abs_linf
            ));
        }
        out
    }

    pub fn timing_csv(rows: &[BenchRow]) -> String {
        let mut out = format!("{}\n", Self::TIMING_HEADER);
        for r in rows {
            out.push_str(&format!("{},{},{},{},{:e}\n", r.p, r.n, r.s, r.replications, r.time_s));
        }
        out
    }
}

/// Per size, the mean matvec count, relative l2 error, absolute linf error
/// and wall time of the full-path solve with selection.
pub fn benchmark_table(spec: &BenchSpec, penalty: Penalty, workers: usize) -> Result<Vec<BenchRow>> {
    spec.validate()?;
    let reps = spec.replications;
    let runs = run_indexed(workers, spec.sizes.len() * reps, |task| -> Result<(u64, f64, f64, f64)> {
        let (k, rep) = (task / reps, task % reps);
        let p = spec.sizes[k];
        let (n, s) = spec.dims(p);
        let seed = seed::derive(spec.base_seed, &[p as u64, rep as u64]);
        let problem = gen_problem(&ProblemSpec::new(spec.kind, n, p, s, spec.dr, spec.sigma, seed))?;
        let start = Instant::now();
        let sel = spec.path.solve(&problem.op, &problem.y, penalty)?;
        let elapsed = start.elapsed().as_secs_f64();
        let m = reconstruction_metrics(&sel.x, &problem.x_true)?;
        Ok((sel.n_matvec, m.rel_l2, m.abs_linf, elapsed))
    })?
    .into_iter()
    .collect::<Result<Vec<_>>>()?;

    Ok(spec
        .sizes
        .iter()
        .zip(runs.chunks(reps))
        .map(|(&p, chunk)| {
            let (n, s) = spec.dims(p);
            BenchRow {
                p,
                n,
                s,
                replications: reps,
                n_matvec: mean(chunk.iter().map(|r| r.0 as f64)),
                rel_l2: mean(chunk.iter().map(|r| r.1)),
                abs_linf: mean(chunk.iter().map(|r| r.2)),
                time_s: mean(chunk.iter().map(|r| r.3)),
            }
        })
        .collect())
}
