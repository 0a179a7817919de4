use serde::{Deserialize, Serialize};

use super::SensingOperator;
use crate::error::Result;
use crate::probgen;

/// JSON description of a reproducible operator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OperatorDescriptor {
    Gaussian { n: usize, p: usize, seed: u64 },
    Bernoulli { n: usize, p: usize, seed: u64 },
    CorrelatedGaussian { n: usize, p: usize, nu: f64, seed: u64 },
    PartialFftHaar { n: usize, p: usize, levels: usize, seed: u64 },
}

impl OperatorDescriptor {
    pub fn build(&self) -> Result<SensingOperator> {
        match *self {
            OperatorDescriptor::Gaussian { n, p, seed } => probgen::gen_gaussian_matrix(n, p, seed),
            OperatorDescriptor::Bernoulli { n, p, seed } => {
                probgen::gen_bernoulli_matrix(n, p, seed)
            }
            OperatorDescriptor::CorrelatedGaussian { n, p, nu, seed } => {
                probgen::gen_correlated_gaussian(n, p, nu, seed)
            }
            OperatorDescriptor::PartialFftHaar { n, p, levels, seed } => {
                SensingOperator::partial_fft_haar(p, n, levels, seed)
            }
        }
    }

    pub fn dims(&self) -> (usize, usize) {
        match *self {
            OperatorDescriptor::Gaussian { n, p, .. }
            | OperatorDescriptor::Bernoulli { n, p, .. }
            | OperatorDescriptor::CorrelatedGaussian { n, p, .. }
            | OperatorDescriptor::PartialFftHaar { n, p, .. } => (n, p),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_shape() {
        let d = OperatorDescriptor::PartialFftHaar {
            n: 665,
            p: 1024,
            levels: 2,
            seed: 1,
        };
        let s = serde_json::to_string(&d).unwrap();
        assert_eq!(s, r#"{"kind":"partial_fft_haar","n":665,"p":1024,"levels":2,"seed":1}"#);
        let back: OperatorDescriptor = serde_json::from_str(&s).unwrap();
        assert_eq!(back, d);
        let op = back.build().unwrap();
        assert_eq!((op.nrows(), op.ncols()), (665, 1024));
    }
}
