//! Reconstruction quality and cost metrics.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Reported in place of +inf when the reconstruction is exact.
pub const PSNR_CAP_DB: f64 = 310.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub rel_l2: f64,
    pub abs_linf: f64,
    pub psnr_db: f64,
    pub exact_support: bool,
    pub support_precision: f64,
    pub support_recall: f64,
    pub n_matvec: u64,
    pub wall_time_s: f64,
}

impl Metrics {
    pub const CSV_HEADER: &'static str =
        "rel_l2,abs_linf,psnr_db,exact_support,support_precision,support_recall,n_matvec,wall_time_s";

    pub fn csv_row(&self) -> String {
        format!(
            "{:e},{:e},{:.6},{},{:.6},{:.6},{},{:.6}",
            self.rel_l2,
            self.abs_linf,
            self.psnr_db,
            self.exact_support,
            self.support_precision,
            self.support_recall,
            self.n_matvec,
            self.wall_time_s
        )
    }

    pub fn with_cost(mut self, n_matvec: u64, wall_time_s: f64) -> Self {
        self.n_matvec = n_matvec;
        self.wall_time_s = wall_time_s;
        self
    }
}

/// Quality metrics of `x_hat` against `x_true`; cost fields are left at zero.
///
/// Supports are exact nonzero sets. Precision of an empty estimate is 1 when
/// the true support is empty too and 0 otherwise; recall likewise.
pub fn reconstruction_metrics(x_hat: &[f64], x_true: &[f64]) -> Result<Metrics> {
    if x_hat.len() != x_true.len() {
        return Err(Error::DimensionMismatch {
            context: "reconstruction metrics",
            expected: x_true.len(),
            actual: x_hat.len(),
        });
    }
    let true_norm = x_true.iter().map(|v| v * v).sum::<f64>().sqrt();
    if true_norm == 0.0 {
        return Err(Error::ZeroReference);
    }
    let mut err_sq = 0.0;
    let mut linf = 0.0f64;
    let (mut hits, mut est, mut truth) = (0usize, 0usize, 0usize);
    for (a, b) in x_hat.iter().zip(x_true) {
        let d = a - b;
        err_sq += d * d;
        linf = linf.max(d.abs());
        let (ia, ib) = (*a != 0.0, *b != 0.0);
        est += ia as usize;
        truth += ib as usize;
        hits += (ia && ib) as usize;
    }
    let ratio = |num: usize, den: usize, empty: bool| {
        if den == 0 {
            if empty {
                1.0
            } else {
                0.0
            }
        } else {
            num as f64 / den as f64
        }
    };
    let precision = ratio(hits, est, truth == 0);
    let recall = ratio(hits, truth, est == 0);
    Ok(Metrics {
        rel_l2: err_sq.sqrt() / true_norm,
        abs_linf: linf,
        psnr_db: psnr(x_hat, x_true),
        exact_support: hits == est && hits == truth,
        support_precision: precision,
        support_recall: recall,
        n_matvec: 0,
        wall_time_s: 0.0,
    })
}

/// `10 log10(V^2 / MSE)` with `V = max |x_true|`; capped at [`PSNR_CAP_DB`].
pub fn psnr(x_hat: &[f64], x_true: &[f64]) -> f64 {
    let n = x_true.len().max(1) as f64;
    let mse = x_hat
        .iter()
        .zip(x_true)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        / n;
    let peak = x_true.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if mse == 0.0 {
        return PSNR_CAP_DB;
    }
    (10.0 * (peak * peak / mse).log10()).min(PSNR_CAP_DB)
}
