//! 1D reconstruction from partial Fourier samples in a Haar basis.

use serde::{Deserialize, Serialize};

use super::PathParams;
use crate::error::{Error, Result};
use crate::linop::SensingOperator;
use crate::metrics::{psnr, reconstruction_metrics};
use crate::probgen::{gen_problem, MatrixKind, ProblemSpec, SignalKind};
use crate::thresholding::Penalty;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Haar1dSpec {
    pub n: usize,
    pub p: usize,
    pub levels: usize,
    pub segments: usize,
    pub active: usize,
    pub sigma: f64,
    pub seed: u64,
    pub path: PathParams,
}

impl Default for Haar1dSpec {
    fn default() -> Self {
        // Seed 2 realizes 246 Haar nonzeros.
        Self {
            n: 665,
            p: 1024,
            levels: 2,
            segments: 64,
            active: 15,
            sigma: 1e-4,
            seed: 2,
            path: PathParams::default(),
        }
    }
}

impl Haar1dSpec {
    pub fn problem_spec(&self) -> ProblemSpec {
        let mut spec = ProblemSpec::new(MatrixKind::PartialFftHaar, self.n, self.p, 0, 1.0, self.sigma, self.seed);
        spec.levels = self.levels;
        spec.signal = SignalKind::PiecewiseLinear {
            segments: self.segments,
            active: self.active,
        };
        spec
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Haar1dResult {
    /// Realized number of nonzero coefficients.
    pub s: usize,
    pub psnr_db: f64,
    /// Relative l2 error of the recovered signal.
    pub rel_l2: f64,
    pub lambda: f64,
    pub n_matvec: u64,
    pub signal: Vec<f64>,
    pub recovered: Vec<f64>,
}

impl Haar1dResult {
    pub fn signal_csv(&self) -> String {
        let mut out = String::from("index,true,recovered\n");
        for (i, (t, r)) in self.signal.iter().zip(&self.recovered).enumerate() {
            out.push_str(&format!("{i},{t:e},{r:e}\n"));
        }
        out
    }
}

pub fn haar1d_reconstruction(spec: &Haar1dSpec, penalty: Penalty) -> Result<Haar1dResult> {
    spec.path.validate()?;
    let problem = gen_problem(&spec.problem_spec())?;
    let SensingOperator::PartialFourierHaar(op) = &problem.op else {
        return Err(Error::InvalidExperiment("expected a partial FFT-Haar operator".into()));
    };
    let sel = spec.path.solve(&problem.op, &problem.y, penalty)?;
    let signal = op.synthesize(&problem.x_true)?;
    let recovered = op.synthesize(&sel.x)?;
    Ok(Haar1dResult {
        s: problem.sparsity(),
        psnr_db: psnr(&recovered, &signal),
        rel_l2: reconstruction_metrics(&recovered, &signal)?.rel_l2,
        lambda: sel.lambda,
        n_matvec: sel.n_matvec,
        signal,
        recovered,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_instance_reconstructs() {
        let spec = Haar1dSpec {
            n: 90,
            p: 128,
            segments: 8,
            active: 2,
            seed: 1,
            ..Haar1dSpec::default()
        };
        let result = haar1d_reconstruction(&spec, Penalty::L0).unwrap();
        assert!(result.s > 0);
        assert!(result.psnr_db > 40.0, "{}", result.psnr_db);
        assert_eq!(result.signal_csv().lines().count(), 129);
    }
}
