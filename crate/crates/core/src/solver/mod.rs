//! Iterative soft/hard thresholding with homotopy continuation (ISTC/IHTC),
//! the fixed-stepsize IST/IHT baseline, and the theory helpers.

mod baseline;
mod config;
mod theory;

pub use baseline::{baseline_solve, BaselineResult};
pub use config::{Lambda0, LambdaStar, SolverConfig, DEFAULT_GAMMA, DEFAULT_KMAX, DEFAULT_PATH_LEN};
pub use theory::{gamma_lower_bound, lambda_star, theoretical_error_bound, TheoryParams};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linop::{norm2, MatvecCounter, SensingOperator};
use crate::thresholding::{support, threshold_in_place, Penalty};

/// Why the continuation loop ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    /// The next path value fell below `lambda*`.
    BelowLambdaStar,
    /// `path_len_N` steps were executed.
    PathLength,
    /// `lambda0 = 0` (zero data with automatic `lambda0`); the zero vector is returned.
    ZeroLambda0,
    /// Full-path mode only: an iterate blew up, the path ends at the last
    /// completed step.
    Diverged,
}

/// An iterate whose residual exceeds this multiple of `||y||` is treated as
/// diverging (the zero vector already achieves `||y||`).
pub const DIVERGENCE_FACTOR: f64 = 1e4;

/// Per-lambda record of a continuation run. Entry 0 is `x(lambda0) = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathResult {
    pub penalty: Penalty,
    pub lambdas: Vec<f64>,
    pub solutions: Vec<Vec<f64>>,
    pub supports: Vec<Vec<usize>>,
    /// Matrix-vector products consumed by the algorithm itself.
    pub n_matvec: u64,
    /// Cumulative `n_matvec` after each entry.
    pub cumulative_matvec: Vec<u64>,
    pub residual_norms: Vec<f64>,
    pub objective_values: Vec<f64>,
    pub inner_iterations: usize,
    pub auto_lambda0: bool,
    pub stop: StopReason,
}

impl PathResult {
    /// Number of executed path steps (entries after `lambda0`).
    pub fn steps(&self) -> usize {
        self.lambdas.len() - 1
    }

    pub fn len(&self) -> usize {
        self.lambdas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambdas.is_empty()
    }

    /// CSV with one row per path entry.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("index,lambda,support_size,residual_norm,objective,cumulative_nmv\n");
        for i in 0..self.lambdas.len() {
            out.push_str(&format!(
                "{},{:e},{},{:e},{:e},{}\n",
                i,
                self.lambdas[i],
                self.supports[i].len(),
                self.residual_norms[i],
                self.objective_values[i],
                self.cumulative_matvec[i]
            ));
        }
        out
    }
}

/// `0.5 ||Psi x - y||^2 + lambda ||x||_t` given the residual norm.
fn objective_from_residual(residual_norm: f64, x: &[f64], lambda: f64, penalty: Penalty) -> f64 {
    0.5 * residual_norm * residual_norm + penalty.penalty_value(x, lambda)
}

/// Penalized least-squares objective `0.5 ||Psi x - y||^2 + lambda ||x||_t`.
pub fn objective(
    op: &SensingOperator,
    y: &[f64],
    x: &[f64],
    lambda: f64,
    penalty: Penalty,
) -> Result<f64> {
    let r = residual(op, y, x)?;
    Ok(objective_from_residual(norm2(&r), x, lambda, penalty))
}

fn residual(op: &SensingOperator, y: &[f64], x: &[f64]) -> Result<Vec<f64>> {
    let mut r = op.apply(x)?;
    r.iter_mut().zip(y).for_each(|(ri, yi)| *ri = yi - *ri);
    Ok(r)
}

/// Scratch buffers for the thresholded gradient step.
struct Workspace {
    residual: Vec<f64>,
    grad: Vec<f64>,
}

impl Workspace {
    fn new(op: &SensingOperator) -> Self {
        Self {
            residual: vec![0.0; op.nrows()],
            grad: vec![0.0; op.ncols()],
        }
    }

    /// `x <- T_{tau lambda}(x + tau Psi^t (y - Psi x))`, two products.
    fn step(
        &mut self,
        op: &SensingOperator,
        y: &[f64],
        x: &mut [f64],
        tau: f64,
        lambda: f64,
        penalty: Penalty,
        counter: &mut MatvecCounter,
    ) -> Result<()> {
        op.apply_into(x, &mut self.residual)?;
        counter.bump();
        self.residual
            .iter_mut()
            .zip(y)
            .for_each(|(r, yi)| *r = yi - *r);
        op.apply_adjoint_into(&self.residual, &mut self.grad)?;
        counter.bump();
        if tau == 1.0 {
            x.iter_mut().zip(&self.grad).for_each(|(xi, g)| *xi += g);
        } else {
            x.iter_mut().zip(&self.grad).for_each(|(xi, g)| *xi += tau * g);
        }
        threshold_in_place(x, tau * lambda, penalty);
        Ok(())
    }
}

fn check_dims(op: &SensingOperator, y: &[f64], x: Option<&[f64]>) -> Result<()> {
    if y.len() != op.nrows() {
        return Err(Error::DimensionMismatch {
            context: "data vector",
            expected: op.nrows(),
            actual: y.len(),
        });
    }
    if let Some(x) = x {
        if x.len() != op.ncols() {
            return Err(Error::DimensionMismatch {
                context: "iterate",
                expected: op.ncols(),
                actual: x.len(),
            });
        }
    }
    Ok(())
}

/// One thresholded gradient step with unit stepsize:
/// `T_lambda(x + Psi^t (y - Psi x))`.
pub fn inner_iterate(
    op: &SensingOperator,
    y: &[f64],
    x: &[f64],
    lambda: f64,
    penalty: Penalty,
) -> Result<Vec<f64>> {
    check_dims(op, y, Some(x))?;
    if lambda < 0.0 {
        return Err(Error::NegativeLambda(lambda));
    }
    let mut next = x.to_vec();
    Workspace::new(op).step(op, y, &mut next, 1.0, lambda, penalty, &mut MatvecCounter::new())?;
    Ok(next)
}

/// Automatic initial parameter from `Psi^t y`: large enough that `x = 0`
/// is the exact minimizer at `lambda0`.
pub fn auto_lambda0(penalty: Penalty, adjoint_data: &[f64]) -> f64 {
    let m = adjoint_data.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    match penalty {
        Penalty::L1 => m,
        Penalty::L0 => 0.5 * m * m,
    }
}

/// Runs ISTC/IHTC.
///
/// Starting from `x(lambda0) = 0`, each path step sets `lambda_l = gamma lambda_{l-1}`,
/// stops (returning the previous solution) if `lambda_l < lambda*`, and otherwise
/// runs `kmax` unit-stepsize thresholded gradient iterations warm-started from
/// `x(lambda_{l-1})`. The loop also ends after `path_len_N` steps.
///
/// Residuals and objectives are recorded for diagnostics; those extra forward
/// products are not counted in `n_matvec`.
pub fn continuation_solve(
    op: &SensingOperator,
    y: &[f64],
    config: &SolverConfig,
) -> Result<(Vec<f64>, PathResult)> {
    config.validate()?;
    check_dims(op, y, None)?;
    let penalty = config.penalty;
    let lambda_star = config.resolve_lambda_star()?;

    let mut counter = MatvecCounter::new();
    let lambda0 = match config.lambda0 {
        Lambda0::Value(v) => v,
        Lambda0::Auto => auto_lambda0(penalty, &op.apply_adjoint_counted(y, &mut counter)?),
    };

    let p = op.ncols();
    let mut x = vec![0.0; p];
    let y_norm = norm2(y);
    let mut path = PathResult {
        penalty,
        lambdas: vec![lambda0],
        solutions: vec![x.clone()],
        supports: vec![Vec::new()],
        n_matvec: counter.count(),
        cumulative_matvec: vec![counter.count()],
        residual_norms: vec![y_norm],
        objective_values: vec![0.5 * y_norm * y_norm],
        inner_iterations: 0,
        auto_lambda0: matches!(config.lambda0, Lambda0::Auto),
        stop: StopReason::PathLength,
    };
    if lambda0 <= 0.0 {
        path.stop = StopReason::ZeroLambda0;
        return Ok((x, path));
    }

    let mut ws = Workspace::new(op);
    let mut lambda = lambda0;
    let mut step = 0usize;
    path.stop = loop {
        lambda *= config.gamma;
        if lambda_star.is_some_and(|star| lambda < star) {
            break StopReason::BelowLambdaStar;
        }
        if step == config.path_len {
            break StopReason::PathLength;
        }
        let mut diverged = None;
        for k in 0..config.kmax {
            ws.step(op, y, &mut x, 1.0, lambda, penalty, &mut counter)?;
            path.inner_iterations += 1;
            // `ws.residual` is the residual of the iterate before this step.
            let blown_up = norm2(&ws.residual) > DIVERGENCE_FACTOR * y_norm;
            if blown_up || x.iter().any(|v| !v.is_finite()) {
                diverged = Some(k);
                break;
            }
        }
        if let Some(k) = diverged {
            if matches!(config.lambda_star, LambdaStar::FullPath) {
                x.copy_from_slice(path.solutions.last().expect("path starts with x(lambda0)"));
                break StopReason::Diverged;
            }
            return Err(Error::Divergence { lambda, k });
        }
        step += 1;
        let res = norm2(&residual(op, y, &x)?);
        path.lambdas.push(lambda);
        path.supports.push(support(&x));
        path.residual_norms.push(res);
        path.objective_values
            .push(objective_from_residual(res, &x, lambda, penalty));
        path.cumulative_matvec.push(counter.count());
        path.solutions.push(x.clone());
    };
    path.n_matvec = counter.count();
    Ok((x, path))
}
