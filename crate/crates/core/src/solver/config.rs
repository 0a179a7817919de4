use serde::{Deserialize, Serialize};

use super::theory::TheoryParams;
use crate::error::{Error, Result};
use crate::thresholding::Penalty;

pub const DEFAULT_GAMMA: f64 = 0.8;
pub const DEFAULT_KMAX: usize = 5;
pub const DEFAULT_PATH_LEN: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum AutoKeyword {
    Auto,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum FullPathKeyword {
    FullPath,
}

/// Initial regularization parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "Lambda0Repr", into = "Lambda0Repr")]
pub enum Lambda0 {
    /// `||Psi^t y||_inf` (l1) or `||Psi^t y||_inf^2 / 2` (l0); costs one adjoint product.
    Auto,
    Value(f64),
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum Lambda0Repr {
    Value(f64),
    Keyword(AutoKeyword),
}

impl From<Lambda0Repr> for Lambda0 {
    fn from(r: Lambda0Repr) -> Self {
        match r {
            Lambda0Repr::Value(v) => Lambda0::Value(v),
            Lambda0Repr::Keyword(AutoKeyword::Auto) => Lambda0::Auto,
        }
    }
}

impl From<Lambda0> for Lambda0Repr {
    fn from(l: Lambda0) -> Self {
        match l {
            Lambda0::Value(v) => Lambda0Repr::Value(v),
            Lambda0::Auto => Lambda0Repr::Keyword(AutoKeyword::Auto),
        }
    }
}

/// Stopping parameter of the continuation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "LambdaStarRepr", into = "LambdaStarRepr")]
pub enum LambdaStar {
    Value(f64),
    /// A priori choice `C1 eps` (l1) or `C0 eps^2` (l0) from the theory constants.
    Theory(TheoryParams),
    /// Visit every point of the `path_len_N`-step path.
    FullPath,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum LambdaStarRepr {
    Value(f64),
    Keyword(FullPathKeyword),
    Theory(TheoryParams),
}

impl From<LambdaStarRepr> for LambdaStar {
    fn from(r: LambdaStarRepr) -> Self {
        match r {
            LambdaStarRepr::Value(v) => LambdaStar::Value(v),
            LambdaStarRepr::Keyword(FullPathKeyword::FullPath) => LambdaStar::FullPath,
            LambdaStarRepr::Theory(t) => LambdaStar::Theory(t),
        }
    }
}

impl From<LambdaStar> for LambdaStarRepr {
    fn from(l: LambdaStar) -> Self {
        match l {
            LambdaStar::Value(v) => LambdaStarRepr::Value(v),
            LambdaStar::FullPath => LambdaStarRepr::Keyword(FullPathKeyword::FullPath),
            LambdaStar::Theory(t) => LambdaStarRepr::Theory(t),
        }
    }
}

/// Parameters of the continuation solver.
///
/// `path_len_N` caps the number of path steps in every mode, not only for
/// [`LambdaStar::FullPath`]; [`super::PathResult::stop`] reports which rule fired.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    pub penalty: Penalty,
    pub lambda0: Lambda0,
    pub gamma: f64,
    pub kmax: usize,
    pub lambda_star: LambdaStar,
    #[serde(rename = "path_len_N")]
    pub path_len: usize,
}

impl SolverConfig {
    /// Auto `lambda0`, `gamma = 0.8`, `kmax = 5`, full path of 100 steps.
    pub fn new(penalty: Penalty) -> Self {
        Self {
            penalty,
            lambda0: Lambda0::Auto,
            gamma: DEFAULT_GAMMA,
            kmax: DEFAULT_KMAX,
            lambda_star: LambdaStar::FullPath,
            path_len: DEFAULT_PATH_LEN,
        }
    }

    pub fn with_lambda_star(mut self, lambda_star: LambdaStar) -> Self {
        self.lambda_star = lambda_star;
        self
    }

    pub fn with_lambda0(mut self, lambda0: Lambda0) -> Self {
        self.lambda0 = lambda0;
        self
    }

    pub fn with_gamma(mut self, gamma: f64) -> Self {
        self.gamma = gamma;
        self
    }

    pub fn with_kmax(mut self, kmax: usize) -> Self {
        self.kmax = kmax;
        self
    }

    pub fn with_path_len(mut self, path_len: usize) -> Self {
        self.path_len = path_len;
        self
    }

    /// Resolved stopping value, or `None` for a full path.
    pub fn resolve_lambda_star(&self) -> Result<Option<f64>> {
        let value = match self.lambda_star {
            LambdaStar::FullPath => return Ok(None),
            LambdaStar::Value(v) => v,
            LambdaStar::Theory(t) => super::theory::lambda_star(&t, self.penalty)?,
        };
        if !(value > 0.0 && value.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "lambda_star must be positive and finite, got {value}"
            )));
        }
        Ok(Some(value))
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "gamma must lie in (0, 1), got {}",
                self.gamma
            )));
        }
        if self.kmax == 0 {
            return Err(Error::InvalidConfig("kmax must be at least 1".into()));
        }
        if let Lambda0::Value(l0) = self.lambda0 {
            if !(l0 > 0.0 && l0.is_finite()) {
                return Err(Error::InvalidConfig(format!(
                    "lambda0 must be positive and finite, got {l0}"
                )));
            }
        }
        let star = self.resolve_lambda_star()?;
        if let (Lambda0::Value(l0), Some(star)) = (self.lambda0, star) {
            if l0 <= star {
                return Err(Error::InvalidConfig(format!(
                    "lambda0 = {l0} must exceed lambda_star = {star}"
                )));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_field_names() {
        let cfg = SolverConfig::new(Penalty::L0);
        let v: serde_json::Value = serde_json::to_value(cfg).unwrap();
        assert_eq!(
            v,
            serde_json::json!({
                "penalty": "l0",
                "lambda0": "auto",
                "gamma": 0.8,
                "kmax": 5,
                "lambda_star": "full_path",
                "path_len_N": 100
            })
        );
    }

    #[test]
    fn json_round_trip_all_variants() {
        let theory = TheoryParams {
            mu: 0.05,
            s: 5,
            c: 4.0,
            epsilon: 0.01,
        };
        for star in [
            LambdaStar::Value(0.5),
            LambdaStar::FullPath,
            LambdaStar::Theory(theory),
        ] {
            let cfg = SolverConfig::new(Penalty::L1)
                .with_lambda0(Lambda0::Value(3.0))
                .with_lambda_star(star);
            let text = serde_json::to_string(&cfg).unwrap();
            let back: SolverConfig = serde_json::from_str(&text).unwrap();
            assert_eq!(back, cfg);
        }
    }

    #[test]
    fn rejects_unknown_keyword() {
        let text = r#"{"penalty":"l1","lambda0":"big","gamma":0.8,"kmax":5,"lambda_star":"full_path","path_len_N":100}"#;
        assert!(serde_json::from_str::<SolverConfig>(text).is_err());
    }

    #[test]
    fn validation() {
        let base = SolverConfig::new(Penalty::L1);
        assert!(base.validate().is_ok());
        assert!(base.with_gamma(1.0).validate().is_err());
        assert!(base.with_gamma(0.0).validate().is_err());
        assert!(base.with_kmax(0).validate().is_err());
        let crossed = base
            .with_lambda0(Lambda0::Value(1.0))
            .with_lambda_star(LambdaStar::Value(2.0));
        assert!(crossed.validate().is_err());
        assert!(base
            .with_lambda_star(LambdaStar::Value(-1.0))
            .validate()
            .is_err());
    }
}
