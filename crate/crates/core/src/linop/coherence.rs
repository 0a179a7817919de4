use serde::{Deserialize, Serialize};

use super::dense::{dot, DenseMatrix};
use super::SensingOperator;
use crate::error::{Error, Result};

/// Column limit for coherence of implicit operators, which are densified first.
pub const DEFAULT_COHERENCE_BUDGET: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoherenceReport {
    /// `max_{i != j} |<psi_i, psi_j>|`.
    pub mu: f64,
    /// First column pair (in lexicographic order) attaining `mu`, with `i < j`.
    pub argmax_pair: (usize, usize),
}

impl CoherenceReport {
    /// Incoherence condition `mu * s < 1/2`.
    pub fn assumption_holds(&self, s: usize) -> bool {
        self.mu * (s as f64) < 0.5
    }
}

/// Exact mutual coherence. Dense operators are unrestricted; implicit ones are
/// limited to [`DEFAULT_COHERENCE_BUDGET`] columns.
pub fn mutual_coherence(op: &SensingOperator) -> Result<CoherenceReport> {
    let budget = op.is_implicit().then_some(DEFAULT_COHERENCE_BUDGET);
    mutual_coherence_with_budget(op, budget)
}

/// Exact mutual coherence with an explicit column budget (`None` = unlimited).
pub fn mutual_coherence_with_budget(
    op: &SensingOperator,
    budget: Option<usize>,
) -> Result<CoherenceReport> {
    let p = op.ncols();
    if let Some(budget) = budget {
        if p > budget {
            return Err(Error::CoherenceOverBudget { p, budget });
        }
    }
    if p < 2 {
        return Err(Error::InvalidOperator(
            "mutual coherence needs at least two columns".into(),
        ));
    }
    match op {
        SensingOperator::Dense(m) => Ok(pairwise_max(m)),
        _ => Ok(pairwise_max(&op.to_dense())),
    }
}

fn pairwise_max(m: &DenseMatrix) -> CoherenceReport {
    let mut best = CoherenceReport {
        mu: -1.0,
        argmax_pair: (0, 1),
    };
    for i in 0..m.ncols() {
        let ci = m.column(i);
        for j in i + 1..m.ncols() {
            let g = dot(ci, m.column(j)).abs();
            if g > best.mu {
                best = CoherenceReport {
                    mu: g,
                    argmax_pair: (i, j),
                };
            }
        }
    }
    // Unit columns bound |<psi_i, psi_j>| by 1; clip rounding overshoot.
    best.mu = best.mu.min(1.0);
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::probgen;

    #[test]
    fn identity_block_has_zero_coherence() {
        let m = DenseMatrix::from_fn(4, 4, |i, j| if i == j { 1.0 } else { 0.0 });
        let r = mutual_coherence(&SensingOperator::Dense(m)).unwrap();
        assert_eq!(r.mu, 0.0);
    }

    #[test]
    fn coincident_columns_have_coherence_one() {
        let m = DenseMatrix::from_col_major(2, 3, vec![0.6, 0.8, 1.0, 0.0, 0.6, 0.8]).unwrap();
        let r = mutual_coherence(&SensingOperator::Dense(m)).unwrap();
        assert!((r.mu - 1.0).abs() < 1e-15);
        assert_eq!(r.argmax_pair, (0, 2));
        assert!(!r.assumption_holds(1));
    }

    #[test]
    fn matches_exhaustive_pair_loop() {
        let op = probgen::gen_gaussian_matrix(20, 40, 123).unwrap();
        let SensingOperator::Dense(m) = &op else { unreachable!() };
        let mut best = 0.0f64;
        let mut pairs = 0;
        for i in 0..40 {
            for j in 0..40 {
                if i != j {
                    let mut g = 0.0;
                    for k in 0..20 {
                        g += m.get(k, i) * m.get(k, j);
                    }
                    best = best.max(g.abs());
                    pairs += 1;
                }
            }
        }
        assert_eq!(pairs / 2, 780);
        let r = mutual_coherence(&op).unwrap();
        assert!((r.mu - best).abs() < 1e-14);
        let (i, j) = r.argmax_pair;
        assert!(i < j);
        assert!((dot(m.column(i), m.column(j)).abs() - r.mu).abs() < 1e-15);
    }

    #[test]
    fn over_budget_is_reported() {
        let op = SensingOperator::partial_fft_haar(64, 32, 1, 0).unwrap();
        assert!(matches!(
            mutual_coherence_with_budget(&op, Some(32)),
            Err(Error::CoherenceOverBudget { p: 64, budget: 32 })
        ));
        assert!(mutual_coherence(&op).is_ok());
    }
}
