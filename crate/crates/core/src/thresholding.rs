//! Componentwise soft (l1) and hard (l0) thresholding.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Sparsity penalty: `L1` uses soft thresholding, `L0` hard thresholding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Penalty {
    L1,
    L0,
}

impl Penalty {
    /// Scalar threshold without the `lambda >= 0` check.
    #[inline]
    pub fn apply(self, t: f64, lambda: f64) -> f64 {
        match self {
            Penalty::L1 => soft(t, lambda),
            Penalty::L0 => hard(t, lambda),
        }
    }

    /// Value of the penalty term `lambda * ||x||_t`.
    pub fn penalty_value(self, x: &[f64], lambda: f64) -> f64 {
        match self {
            Penalty::L1 => lambda * x.iter().map(|v| v.abs()).sum::<f64>(),
            Penalty::L0 => lambda * x.iter().filter(|v| **v != 0.0).count() as f64,
        }
    }

    /// Short solver name (ISTC / IHTC).
    pub fn solver_name(self) -> &'static str {
        match self {
            Penalty::L1 => "ISTC",
            Penalty::L0 => "IHTC",
        }
    }
}

impl std::str::FromStr for Penalty {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "l1" | "soft" => Ok(Penalty::L1),
            "l0" | "hard" => Ok(Penalty::L0),
            other => Err(format!("unknown penalty {other:?} (expected l1 or l0)")),
        }
    }
}

#[inline]
fn soft(t: f64, lambda: f64) -> f64 {
    let mag = t.abs() - lambda;
    if mag > 0.0 {
        mag.copysign(t)
    } else {
        0.0
    }
}

#[inline]
fn hard(t: f64, lambda: f64) -> f64 {
    // Ties at |t| = sqrt(2 lambda) go to zero.
    if t.abs() > (2.0 * lambda).sqrt() {
        t
    } else {
        0.0
    }
}

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda >= 0.0 {
        Ok(())
    } else {
        Err(Error::NegativeLambda(lambda))
    }
}

/// `max(|t| - lambda, 0) * sgn(t)`.
pub fn soft_threshold(t: f64, lambda: f64) -> Result<f64> {
    check_lambda(lambda)?;
    Ok(soft(t, lambda))
}

/// `t` if `|t| > sqrt(2 lambda)`, else 0.
pub fn hard_threshold(t: f64, lambda: f64) -> Result<f64> {
    check_lambda(lambda)?;
    Ok(hard(t, lambda))
}

pub fn threshold_vector(v: &[f64], lambda: f64, penalty: Penalty) -> Result<Vec<f64>> {
    check_lambda(lambda)?;
    Ok(v.iter().map(|&t| penalty.apply(t, lambda)).collect())
}

pub(crate) fn threshold_in_place(v: &mut [f64], lambda: f64, penalty: Penalty) {
    match penalty {
        Penalty::L1 => v.iter_mut().for_each(|t| *t = soft(*t, lambda)),
        Penalty::L0 => {
            let cut = (2.0 * lambda).sqrt();
            v.iter_mut().for_each(|t| {
                if t.abs() <= cut {
                    *t = 0.0
                }
            });
        }
    }
}

/// Indices of nonzero entries.
pub fn support(x: &[f64]) -> Vec<usize> {
    x.iter()
        .enumerate()
        .filter_map(|(i, v)| (*v != 0.0).then_some(i))
        .collect()
}
