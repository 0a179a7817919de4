use serde::{Deserialize, Serialize};

use super::Workspace;
use crate::error::{Error, Result};
use crate::linop::{MatvecCounter, SensingOperator};
use crate::thresholding::Penalty;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineResult {
    pub x: Vec<f64>,
    pub iterations: usize,
    pub n_matvec: u64,
    pub converged: bool,
}

/// Plain IST/IHT at a fixed `lambda`:
/// `x <- T_{tau lambda}(x + tau Psi^t (y - Psi x))` from `x = 0` until the
/// sup-norm change is at most `tol` or `max_iter` iterations have run.
///
/// `tau` must lie in `(0, 2 / ||Psi||^2)`; the spectral norm is estimated by
/// power iteration (its products are not counted).
pub fn baseline_solve(
    op: &SensingOperator,
    y: &[f64],
    lambda: f64,
    tau: f64,
    penalty: Penalty,
    max_iter: usize,
    tol: f64,
) -> Result<BaselineResult> {
    super::check_dims(op, y, None)?;
    if lambda < 0.0 {
        return Err(Error::NegativeLambda(lambda));
    }
    let sigma = op.spectral_norm(1000, 1e-12);
    let limit = 2.0 / (sigma * sigma);
    if !(tau > 0.0 && tau < limit) {
        return Err(Error::StepsizeOutOfRange { tau, limit });
    }

    let mut ws = Workspace::new(op);
    let mut counter = MatvecCounter::new();
    let mut x = vec![0.0; op.ncols()];
    let mut prev = x.clone();
    let mut converged = false;
    let mut iterations = 0;
    while iterations < max_iter {
        ws.step(op, y, &mut x, tau, lambda, penalty, &mut counter)?;
        iterations += 1;
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Divergence {
                lambda,
                k: iterations - 1,
            });
        }
        let change = x
            .iter()
            .zip(&prev)
            .fold(0.0f64, |acc, (a, b)| acc.max((a - b).abs()));
        if change <= tol {
            converged = true;
            break;
        }
        prev.copy_from_slice(&x);
    }
    Ok(BaselineResult {
        x,
        iterations,
        n_matvec: counter.count(),
        converged,
    })
}
