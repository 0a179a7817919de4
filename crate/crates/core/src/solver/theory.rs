//! Constants and bounds of the convergence guarantee for ISTC/IHTC.
//!
//! Under `mu * s < 1/2` with `lambda* = C1 eps` (l1, `C1 > 1/(1 - 2 mu s)`) or
//! `lambda* = C0 eps^2` (l0, `C0 > 1/(2 (1 - 2 mu s)^2)`), and a decrease factor
//! `gamma` at least [`gamma_lower_bound`], the continuation output satisfies
//! `supp(x*) ⊆ supp(x†)` and `||x* - x†||_inf <= `[`theoretical_error_bound`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::thresholding::Penalty;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TheoryParams {
    /// Mutual coherence of the operator.
    pub mu: f64,
    /// Sparsity of the true signal.
    pub s: usize,
    /// `C1` for l1, `C0` for l0.
    pub c: f64,
    /// Noise level `||eta||`.
    pub epsilon: f64,
}

impl TheoryParams {
    pub fn mu_s(&self) -> f64 {
        self.mu * self.s as f64
    }

    /// Smallest admissible constant; `c` must exceed it strictly.
    pub fn min_c(&self, penalty: Penalty) -> f64 {
        let gap = 1.0 - 2.0 * self.mu_s();
        match penalty {
            Penalty::L1 => 1.0 / gap,
            Penalty::L0 => 1.0 / (2.0 * gap * gap),
        }
    }

    /// Theory parameters with `c = factor * min_c` (`factor > 1`).
    pub fn with_c_factor(mu: f64, s: usize, epsilon: f64, penalty: Penalty, factor: f64) -> Self {
        let mut t = Self {
            mu,
            s,
            c: 0.0,
            epsilon,
        };
        t.c = factor * t.min_c(penalty);
        t
    }

    /// `(1 - 1/C1) / (mu s)` for l1, `(1 - 1/sqrt(2 C0)) / (mu s)` for l0.
    pub fn alpha(&self, penalty: Penalty) -> f64 {
        match penalty {
            Penalty::L1 => (1.0 - 1.0 / self.c) / self.mu_s(),
            Penalty::L0 => (1.0 - 1.0 / (2.0 * self.c).sqrt()) / self.mu_s(),
        }
    }

    /// Smallest admissible `gamma >= preferred`, or `None` if the interval is empty.
    pub fn admissible_gamma(&self, penalty: Penalty, preferred: f64) -> Result<Option<f64>> {
        let lower = gamma_lower_bound(self, penalty)?;
        let gamma = preferred.max(lower);
        Ok((gamma < 1.0).then_some(gamma))
    }

    fn check_basic(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidTheory(m));
        if !(0.0..=1.0).contains(&self.mu) {
            return bad(format!("mu = {} outside [0, 1]", self.mu));
        }
        if self.s == 0 {
            return bad("sparsity s must be at least 1".into());
        }
        if self.mu_s() >= 0.5 {
            return bad(format!(
                "mu * s = {} violates the incoherence condition mu * s < 1/2",
                self.mu_s()
            ));
        }
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return bad(format!("noise level {} must be finite and >= 0", self.epsilon));
        }
        if !(self.c > 0.0 && self.c.is_finite()) {
            return bad(format!("constant C = {} must be positive", self.c));
        }
        Ok(())
    }

    /// Full check including the lower bound on `C`.
    pub fn validate(&self, penalty: Penalty) -> Result<()> {
        self.check_basic()?;
        let min_c = self.min_c(penalty);
        if self.c <= min_c {
            let rule = match penalty {
                Penalty::L1 => "C1 > 1/(1 - 2 mu s)",
                Penalty::L0 => "C0 > 1/(2 (1 - 2 mu s)^2)",
            };
            return Err(Error::InvalidTheory(format!(
                "C = {} violates {rule} = {min_c}",
                self.c
            )));
        }
        Ok(())
    }
}

/// `C1 eps` for l1, `C0 eps^2` for l0.
pub fn lambda_star(theory: &TheoryParams, penalty: Penalty) -> Result<f64> {
    theory.validate(penalty)?;
    Ok(match penalty {
        Penalty::L1 => theory.c * theory.epsilon,
        Penalty::L0 => theory.c * theory.epsilon * theory.epsilon,
    })
}

/// Left end of the admissible `gamma` interval.
pub fn gamma_lower_bound(theory: &TheoryParams, penalty: Penalty) -> Result<f64> {
    theory.check_basic()?;
    let two_mu_s = 2.0 * theory.mu_s();
    match penalty {
        Penalty::L1 => {
            if theory.c <= 1.0 {
                return Err(Error::InvalidTheory(format!("C1 = {} must exceed 1", theory.c)));
            }
            Ok(two_mu_s / (1.0 - 1.0 / theory.c))
        }
        Penalty::L0 => {
            if 2.0 * theory.c <= 1.0 {
                return Err(Error::InvalidTheory(format!(
                    "C0 = {} must exceed 1/2",
                    theory.c
                )));
            }
            let r = two_mu_s / (1.0 - 1.0 / (2.0 * theory.c).sqrt());
            Ok(r * r)
        }
    }
}

/// `(C1 - 1) eps / (mu s)` for l1, `(sqrt(2 C0) - 1) eps / (mu s)` for l0.
pub fn theoretical_error_bound(theory: &TheoryParams, penalty: Penalty) -> Result<f64> {
    theory.check_basic()?;
    let mu_s = theory.mu_s();
    if mu_s == 0.0 {
        return Err(Error::ZeroCoherenceBound);
    }
    Ok(match penalty {
        Penalty::L1 => (theory.c - 1.0) * theory.epsilon / mu_s,
        Penalty::L0 => ((2.0 * theory.c).sqrt() - 1.0) * theory.epsilon / mu_s,
    })
}
