//! Logistic fit of success rate against `rho` and the 90% level crossing.

use serde::{Deserialize, Serialize};

use super::phase::PhaseGrid;

pub const TARGET_RATE: f64 = 0.9;

const MAX_NEWTON: usize = 100;
/// A slope this steep means the data are (quasi-)separated and the
/// likelihood has no finite maximizer.
const MAX_SLOPE: f64 = 1e4;

/// How a column's `rho90` was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitMethod {
    Logistic,
    /// The fit failed; linear interpolation of the empirical rates.
    Interpolated,
    /// Rates never fall below 90% (or the estimate ran past the grid): top of the grid.
    ClampedHigh,
    /// Rates never reach 90% (or the estimate ran below the grid): bottom of the grid.
    ClampedLow,
}

impl FitMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            FitMethod::Logistic => "logistic",
            FitMethod::Interpolated => "interpolated",
            FitMethod::ClampedHigh => "clamped_high",
            FitMethod::ClampedLow => "clamped_low",
        }
    }

    /// Anything but a clean logistic fit.
    pub fn is_flagged(self) -> bool {
        self != FitMethod::Logistic
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rho90 {
    pub delta: f64,
    pub rho90: f64,
    pub method: FitMethod,
    /// `(a, b)` of `P = 1 / (1 + exp(-(a + b rho)))` when the fit converged.
    pub coefficients: Option<(f64, f64)>,
}

/// Maximum-likelihood `(a, b)` for binomial counts by Newton's method (which
/// is IRLS for this model). `None` when it does not converge.
pub fn fit_logistic(x: &[f64], successes: &[usize], trials: &[usize]) -> Option<(f64, f64)> {
    let loglik = |a: f64, b: f64| -> f64 {
        x.iter()
            .zip(successes.iter().zip(trials))
            .map(|(&xi, (&s, &t))| {
                let z = a + b * xi;
                // log sigmoid(z) and log(1 - sigmoid(z)), stable for large |z|.
                let log_p = -softplus(-z);
                let log_q = -softplus(z);
                s as f64 * log_p + (t - s) as f64 * log_q
            })
            .sum()
    };

    let (mut a, mut b) = (0.0, 0.0);
    let mut current = loglik(a, b);
    for _ in 0..MAX_NEWTON {
        let (mut g0, mut g1, mut h00, mut h01, mut h11) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for (&xi, (&s, &t)) in x.iter().zip(successes.iter().zip(trials)) {
            let prob = sigmoid(a + b * xi);
            let t = t as f64;
            let r = s as f64 - t * prob;
            let w = t * prob * (1.0 - prob);
            g0 += r;
            g1 += r * xi;
            h00 += w;
            h01 += w * xi;
            h11 += w * xi * xi;
        }
        let det = h00 * h11 - h01 * h01;
        if !(det > 1e-300) {
            return None;
        }
        let da = (h11 * g0 - h01 * g1) / det;
        let db = (h00 * g1 - h01 * g0) / det;

        let mut step = 1.0;
        let (mut na, mut nb, mut next) = (a, b, current);
        while step > 1e-10 {
            na = a + step * da;
            nb = b + step * db;
            next = loglik(na, nb);
            if next >= current - 1e-12 * current.abs() {
                break;
            }
            step *= 0.5;
        }
        if !(na.is_finite() && nb.is_finite()) || nb.abs() > MAX_SLOPE {
            return None;
        }
        let moved = (na - a).abs() + (nb - b).abs();
        (a, b, current) = (na, nb, next);
        if moved <= 1e-10 * (1.0 + a.abs() + b.abs()) {
            return Some((a, b));
        }
    }
    None
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

/// `rho` where the success rate of one delta column crosses 90%.
///
/// Columns that are all-success or all-failure are clamped to the grid edge.
/// Otherwise the logistic fit is used; if it fails, or its curve does not
/// decrease in `rho`, the empirical rates are linearly interpolated.
/// Estimates outside the grid are clamped to its edge.
pub fn rho90_for_column(rho: &[f64], successes: &[usize], trials: &[usize]) -> (f64, FitMethod, Option<(f64, f64)>) {
    let lo = rho.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = rho.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if successes.iter().zip(trials).all(|(s, t)| s == t) {
        return (hi, FitMethod::ClampedHigh, None);
    }
    if successes.iter().all(|&s| s == 0) {
        return (lo, FitMethod::ClampedLow, None);
    }
    let clamp = |r: f64, method: FitMethod, coef| {
        if r > hi {
            (hi, FitMethod::ClampedHigh, coef)
        } else if r < lo {
            (lo, FitMethod::ClampedLow, coef)
        } else {
            (r, method, coef)
        }
    };
    match fit_logistic(rho, successes, trials) {
        Some((a, b)) if b < 0.0 => {
            let logit = (TARGET_RATE / (1.0 - TARGET_RATE)).ln();
            clamp((logit - a) / b, FitMethod::Logistic, Some((a, b)))
        }
        _ => {
            let rates: Vec<f64> = successes
                .iter()
                .zip(trials)
                .map(|(&s, &t)| s as f64 / t as f64)
                .collect();
            clamp(interpolate_crossing(rho, &rates, lo), FitMethod::Interpolated, None)
        }
    }
}

/// First downward crossing of 90% along increasing `rho`.
fn interpolate_crossing(rho: &[f64], rates: &[f64], lo: f64) -> f64 {
    let mut order: Vec<usize> = (0..rho.len()).collect();
    order.sort_by(|&i, &j| rho[i].total_cmp(&rho[j]));
    if rates[order[0]] < TARGET_RATE {
        return lo;
    }
    for w in order.windows(2) {
        let (i, j) = (w[0], w[1]);
        if rates[i] >= TARGET_RATE && rates[j] < TARGET_RATE {
            let frac = (rates[i] - TARGET_RATE) / (rates[i] - rates[j]);
            return rho[i] + frac * (rho[j] - rho[i]);
        }
    }
    rho[*order.last().unwrap()]
}

/// `rho90` for every delta column of `grid`.
pub fn fit_90pct_curve(grid: &PhaseGrid) -> Vec<Rho90> {
    (0..grid.delta_grid.len())
        .map(|i| {
            let column = grid.column(i);
            let rho: Vec<f64> = column.iter().map(|c| c.rho).collect();
            let successes: Vec<usize> = column.iter().map(|c| c.successes).collect();
            let trials: Vec<usize> = column.iter().map(|c| c.trials).collect();
            let (rho90, method, coefficients) = rho90_for_column(&rho, &successes, &trials);
            Rho90 {
                delta: grid.delta_grid[i],
                rho90,
                method,
                coefficients,
            }
        })
        .collect()
}
