//! Exact-support recovery probability as one parameter varies.

use serde::{Deserialize, Serialize};

use super::{classify, run_indexed, Outcome, PathParams};
use crate::error::{Error, Result};
use crate::probgen::{gen_problem, MatrixKind, ProblemSpec};
use crate::seed;
use crate::thresholding::{support, Penalty};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Varied {
    S,
    Sigma,
    Nu,
}

impl std::str::FromStr for Varied {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "s" => Ok(Varied::S),
            "sigma" => Ok(Varied::Sigma),
            "nu" => Ok(Varied::Nu),
            other => Err(format!("unknown sweep parameter {other:?} (expected s, sigma or nu)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub varied: Varied,
    pub values: Vec<f64>,
    pub kind: MatrixKind,
    pub n: usize,
    pub p: usize,
    pub s: usize,
    pub dr: f64,
    pub sigma: f64,
    pub nu: f64,
    pub replications: usize,
    pub base_seed: u64,
    pub path: PathParams,
}

impl SweepSpec {
    fn base(varied: Varied, values: Vec<f64>) -> Self {
        Self {
            varied,
            values,
            kind: MatrixKind::Gaussian,
            n: 500,
            p: 1000,
            s: 10,
            dr: 100.0,
            sigma: 1e-2,
            nu: 0.0,
            replications: 100,
            base_seed: 0,
            path: PathParams::default(),
        }
    }

    /// Sparsity sweep `s = 10, 20, ..., 100` at `sigma = 1e-2`.
    pub fn vary_s() -> Self {
        Self::base(Varied::S, (1..=10).map(|k| 10.0 * k as f64).collect())
    }

    /// Noise sweep `sigma = 1e-4, ..., 1` at `s = 50`.
    pub fn vary_sigma() -> Self {
        Self {
            s: 50,
            ..Self::base(Varied::Sigma, vec![1e-4, 1e-3, 1e-2, 1e-1, 1.0])
        }
    }

    /// Correlation sweep `nu = 0, 0.05, ..., 1` at `s = 10`, `sigma = 1e-3`.
    pub fn vary_nu() -> Self {
        Self {
            kind: MatrixKind::CorrelatedGaussian,
            sigma: 1e-3,
            ..Self::base(Varied::Nu, (0..=20).map(|k| k as f64 * 0.05).collect())
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidExperiment(msg));
        if self.values.is_empty() {
            return bad("sweep values must be nonempty".into());
        }
        if self.replications == 0 {
            return bad("replications must be >= 1".into());
        }
        if self.varied == Varied::Nu && self.kind != MatrixKind::CorrelatedGaussian {
            return bad("a nu sweep needs kind = correlated_gaussian".into());
        }
        for &v in &self.values {
            let ok = match self.varied {
                Varied::S => v >= 1.0 && v.fract() == 0.0 && v <= self.p as f64,
                Varied::Sigma | Varied::Nu => v >= 0.0 && v.is_finite(),
            };
            if !ok {
                return bad(format!("invalid {:?} value {v}", self.varied));
            }
        }
        self.path.validate()
    }

    /// Instance for grid value `value` and replication `rep`. The seed depends
    /// only on `rep`, so every grid value sees the same draws (matrix, support
    /// pattern, noise direction) where the parameters allow.
    pub fn problem_spec(&self, value: f64, rep: usize) -> ProblemSpec {
        let mut spec = ProblemSpec::new(
            self.kind,
            self.n,
            self.p,
            self.s,
            self.dr,
            self.sigma,
            seed::derive(self.base_seed, &[rep as u64]),
        );
        spec.nu = self.nu;
        match self.varied {
            Varied::S => spec.s = value as usize,
            Varied::Sigma => spec.sigma = value,
            Varied::Nu => spec.nu = value,
        }
        spec
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub value: f64,
    pub successes: usize,
    pub diverged: usize,
    pub replications: usize,
    pub probability: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub varied: Varied,
    pub penalty: Penalty,
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    pub const CSV_HEADER: &'static str = "value,successes,diverged,replications,probability";

    pub fn to_csv(&self) -> String {
        let mut out = format!("{}\n", Self::CSV_HEADER);
        for r in &self.rows {
            out.push_str(&format!(
                "{:e},{},{},{},{:e}\n",
                r.value, r.successes, r.diverged, r.replications, r.probability
            ));
        }
        out
    }

    pub fn probability_at(&self, value: f64) -> Option<f64> {
        self.rows.iter().find(|r| r.value == value).map(|r| r.probability)
    }
}

/// Fraction of replications whose selected solution has exactly the true
/// support, per grid value.
pub fn support_probability_sweep(spec: &SweepSpec, penalty: Penalty, workers: usize) -> Result<SweepTable> {
    spec.validate()?;
    let reps = spec.replications;
    let outcomes = run_indexed(workers, spec.values.len() * reps, |task| {
        let (vi, rep) = (task / reps, task % reps);
        let problem_spec = spec.problem_spec(spec.values[vi], rep);
        classify((|| {
            let problem = gen_problem(&problem_spec)?;
            let sel = spec.path.solve(&problem.op, &problem.y, penalty)?;
            Ok(support(&sel.x) == problem.true_support())
        })())
    })?
    .into_iter()
    .collect::<Result<Vec<_>>>()?;

    let mut rows = Vec::with_capacity(spec.values.len());
    for (vi, chunk) in outcomes.chunks(reps).enumerate() {
        let mut successes = 0;
        let mut diverged = 0;
        for outcome in chunk {
            match outcome {
                Outcome::Success => successes += 1,
                Outcome::Diverged => diverged += 1,
                Outcome::Failure => {}
            }
        }
        rows.push(SweepRow {
            value: spec.values[vi],
            successes,
            diverged,
            replications: reps,
            probability: successes as f64 / reps as f64,
        });
    }
    Ok(SweepTable {
        varied: spec.varied,
        penalty,
        rows,
    })
}
