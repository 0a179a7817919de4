//! Resolved per-command configs and the defaults < file < flags merge.
//!
//! Each config serializes to a flat JSON object whose keys are exactly the
//! accepted config-file keys, so the object stored in a run manifest can be
//! fed back through `--config` to repeat the run.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use sparsepath::experiments::{linspace, BenchSpec, Haar1dSpec, PathParams, PhaseSpec, SweepSpec, Varied};
use sparsepath::solver::{DEFAULT_GAMMA, DEFAULT_KMAX, DEFAULT_PATH_LEN};
use sparsepath::{Criterion, Lambda0, MatrixKind, Penalty, ProblemSpec, SignalKind};

use crate::failure::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rule {
    Bic,
    ExtendedBic,
}

impl FromStr for Rule {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.replace('-', "_").as_str() {
            "bic" => Ok(Rule::Bic),
            "extended_bic" | "ebic" => Ok(Rule::ExtendedBic),
            other => Err(format!("unknown criterion {other:?} (expected bic or extended_bic)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignalChoice {
    Sparse,
    PiecewiseLinear,
}

impl FromStr for SignalChoice {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.replace('-', "_").as_str() {
            "sparse" => Ok(SignalChoice::Sparse),
            "piecewise_linear" => Ok(SignalChoice::PiecewiseLinear),
            other => Err(format!("unknown signal {other:?} (expected sparse or piecewise_linear)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LambdaStarMode {
    Auto,
    FullPath,
}

/// `--lambda-star`: `auto`, `full_path` or a number.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LambdaStarArg {
    Value(f64),
    Mode(LambdaStarMode),
}

impl FromStr for LambdaStarArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.replace('-', "_").as_str() {
            "auto" => Ok(LambdaStarArg::Mode(LambdaStarMode::Auto)),
            "full_path" => Ok(LambdaStarArg::Mode(LambdaStarMode::FullPath)),
            _ => s
                .parse::<f64>()
                .map(LambdaStarArg::Value)
                .map_err(|_| format!("expected auto, full_path or a number, got {s:?}")),
        }
    }
}

/// Path settings shared by every command that runs a full path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathSettings {
    pub gamma: f64,
    pub kmax: usize,
    #[serde(rename = "path_len_N")]
    pub path_len: usize,
    pub criterion: Rule,
    pub ebic_gamma: f64,
}

impl Default for PathSettings {
    fn default() -> Self {
        Self {
            gamma: DEFAULT_GAMMA,
            kmax: DEFAULT_KMAX,
            path_len: DEFAULT_PATH_LEN,
            criterion: Rule::ExtendedBic,
            ebic_gamma: 1.0,
        }
    }
}

impl PathSettings {
    fn from_params(p: &PathParams) -> Self {
        let (criterion, ebic_gamma) = match p.criterion {
            Criterion::Bic => (Rule::Bic, 1.0),
            Criterion::ExtendedBic { gamma } => (Rule::ExtendedBic, gamma),
        };
        Self {
            gamma: p.gamma,
            kmax: p.kmax,
            path_len: p.path_len,
            criterion,
            ebic_gamma,
        }
    }

    pub fn criterion(&self) -> Criterion {
        match self.criterion {
            Rule::Bic => Criterion::Bic,
            Rule::ExtendedBic => Criterion::ExtendedBic { gamma: self.ebic_gamma },
        }
    }

    pub fn params(&self) -> PathParams {
        PathParams {
            gamma: self.gamma,
            kmax: self.kmax,
            path_len: self.path_len,
            criterion: self.criterion(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenConfig {
    pub kind: MatrixKind,
    pub n: usize,
    pub p: usize,
    pub s: usize,
    pub dr: f64,
    pub sigma: f64,
    pub nu: f64,
    pub levels: usize,
    pub signal: SignalChoice,
    pub segments: usize,
    pub active: usize,
    pub seed: u64,
    pub compute_mu: bool,
}

impl Default for GenConfig {
    fn default() -> Self {
        Self {
            kind: MatrixKind::Gaussian,
            n: 500,
            p: 1000,
            s: 10,
            dr: 100.0,
            sigma: 1e-2,
            nu: 0.0,
            levels: 2,
            signal: SignalChoice::Sparse,
            segments: 64,
            active: 15,
            seed: 0,
            compute_mu: false,
        }
    }
}

impl GenConfig {
    pub fn problem_spec(&self) -> ProblemSpec {
        let mut spec = ProblemSpec::new(self.kind, self.n, self.p, self.s, self.dr, self.sigma, self.seed);
        spec.nu = self.nu;
        spec.levels = self.levels;
        if self.signal == SignalChoice::PiecewiseLinear {
            spec.signal = SignalKind::PiecewiseLinear {
                segments: self.segments,
                active: self.active,
            };
        }
        spec
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveConfig {
    pub problem: Option<PathBuf>,
    pub penalty: Penalty,
    pub lambda0: Lambda0,
    pub lambda_star: LambdaStarArg,
    pub mu_s: Option<f64>,
    pub c1: Option<f64>,
    pub c0: Option<f64>,
    pub epsilon: Option<f64>,
    #[serde(flatten)]
    pub path: PathSettings,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self {
            problem: None,
            penalty: Penalty::L1,
            lambda0: Lambda0::Auto,
            lambda_star: LambdaStarArg::Mode(LambdaStarMode::Auto),
            mu_s: None,
            c1: None,
            c0: None,
            epsilon: None,
            path: PathSettings::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathConfig {
    pub problem: Option<PathBuf>,
    pub penalty: Penalty,
    #[serde(flatten)]
    pub path: PathSettings,
}

impl Default for PathConfig {
    fn default() -> Self {
        Self {
            problem: None,
            penalty: Penalty::L1,
            path: PathSettings::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub varied: Varied,
    pub values: Vec<f64>,
    pub kind: MatrixKind,
    pub n: usize,
    pub p: usize,
    pub s: usize,
    pub dr: f64,
    pub sigma: f64,
    pub nu: f64,
    pub replications: usize,
    pub base_seed: u64,
    pub penalty: Penalty,
    #[serde(flatten)]
    pub path: PathSettings,
}

impl SweepConfig {
    /// Defaults of the preset for `varied`.
    pub fn preset(varied: Varied) -> Self {
        let spec = match varied {
            Varied::S => SweepSpec::vary_s(),
            Varied::Sigma => SweepSpec::vary_sigma(),
            Varied::Nu => SweepSpec::vary_nu(),
        };
        Self {
            varied: spec.varied,
            values: spec.values,
            kind: spec.kind,
            n: spec.n,
            p: spec.p,
            s: spec.s,
            dr: spec.dr,
            sigma: spec.sigma,
            nu: spec.nu,
            replications: spec.replications,
            base_seed: spec.base_seed,
            penalty: Penalty::L0,
            path: PathSettings::from_params(&spec.path),
        }
    }

    pub fn spec(&self) -> SweepSpec {
        SweepSpec {
            varied: self.varied,
            values: self.values.clone(),
            kind: self.kind,
            n: self.n,
            p: self.p,
            s: self.s,
            dr: self.dr,
            sigma: self.sigma,
            nu: self.nu,
            replications: self.replications,
            base_seed: self.base_seed,
            path: self.path.params(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseConfig {
    pub p: usize,
    pub grid_size: usize,
    pub delta_grid: Option<Vec<f64>>,
    pub rho_grid: Option<Vec<f64>>,
    pub trials: usize,
    pub sigma: f64,
    pub success_threshold: f64,
    pub base_seed: u64,
    pub penalty: Penalty,
    #[serde(flatten)]
    pub path: PathSettings,
}

impl Default for PhaseConfig {
    /// Desk-scale grid: p = 400, 15 x 15 cells, 20 trials each.
    fn default() -> Self {
        let core = PhaseSpec::default();
        Self {
            p: 400,
            grid_size: 15,
            delta_grid: None,
            rho_grid: None,
            trials: 20,
            sigma: core.sigma,
            success_threshold: core.success_threshold,
            base_seed: core.base_seed,
            penalty: Penalty::L1,
            path: PathSettings::from_params(&core.path),
        }
    }
}

impl PhaseConfig {
    /// Fills absent grids with `grid_size` points on [0.1, 1].
    pub fn materialize(&mut self) -> Result<(), CliError> {
        if self.grid_size < 2 && (self.delta_grid.is_none() || self.rho_grid.is_none()) {
            return Err(CliError::config("grid_size must be >= 2".into()));
        }
        let k = self.grid_size;
        self.delta_grid.get_or_insert_with(|| linspace(0.1, 1.0, k));
        self.rho_grid.get_or_insert_with(|| linspace(0.1, 1.0, k));
        Ok(())
    }

    pub fn spec(&self) -> PhaseSpec {
        PhaseSpec {
            p: self.p,
            delta_grid: self.delta_grid.clone().unwrap_or_default(),
            rho_grid: self.rho_grid.clone().unwrap_or_default(),
            trials: self.trials,
            sigma: self.sigma,
            success_threshold: self.success_threshold,
            base_seed: self.base_seed,
            path: self.path.params(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchConfig {
    pub sizes: Vec<usize>,
    pub kind: MatrixKind,
    pub n_divisor: usize,
    pub s_divisor: usize,
    pub dr: f64,
    pub sigma: f64,
    pub replications: usize,
    pub base_seed: u64,
    pub penalty: Penalty,
    #[serde(flatten)]
    pub path: PathSettings,
}

impl Default for BenchConfig {
    fn default() -> Self {
        let core = BenchSpec::default();
        Self {
            sizes: core.sizes,
            kind: core.kind,
            n_divisor: core.n_divisor,
            s_divisor: core.s_divisor,
            dr: core.dr,
            sigma: core.sigma,
            replications: core.replications,
            base_seed: core.base_seed,
            penalty: Penalty::L1,
            path: PathSettings::from_params(&core.path),
        }
    }
}

impl BenchConfig {
    pub fn spec(&self) -> BenchSpec {
        BenchSpec {
            sizes: self.sizes.clone(),
            kind: self.kind,
            n_divisor: self.n_divisor,
            s_divisor: self.s_divisor,
            dr: self.dr,
            sigma: self.sigma,
            replications: self.replications,
            base_seed: self.base_seed,
            path: self.path.params(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Haar1dConfig {
    pub n: usize,
    pub p: usize,
    pub levels: usize,
    pub segments: usize,
    pub active: usize,
    pub sigma: f64,
    pub seed: u64,
    pub penalty: Penalty,
    #[serde(flatten)]
    pub path: PathSettings,
}

impl Default for Haar1dConfig {
    fn default() -> Self {
        let core = Haar1dSpec::default();
        Self {
            n: core.n,
            p: core.p,
            levels: core.levels,
            segments: core.segments,
            active: core.active,
            sigma: core.sigma,
            seed: core.seed,
            penalty: Penalty::L0,
            path: PathSettings::from_params(&core.path),
        }
    }
}

impl Haar1dConfig {
    pub fn spec(&self) -> Haar1dSpec {
        Haar1dSpec {
            n: self.n,
            p: self.p,
            levels: self.levels,
            segments: self.segments,
            active: self.active,
            sigma: self.sigma,
            seed: self.seed,
            path: self.path.params(),
        }
    }
}

/// Reads a config file. A run manifest is accepted too; its `config` object is
/// used after checking that it belongs to `command`.
pub fn read_config_file(command: &str, path: &Path) -> Result<Map<String, Value>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::input_io(path, e))?;
    let value: Value = serde_json::from_str(&text)
        .map_err(|e| CliError::config(format!("{}: not valid JSON: {e}", path.display())))?;
    let Value::Object(mut map) = value else {
        return Err(CliError::config(format!("{}: expected a JSON object", path.display())));
    };
    if let (Some(Value::String(cmd)), Some(Value::Object(_))) = (map.get("command"), map.get("config")) {
        if cmd != command {
            return Err(CliError::config(format!(
                "{}: manifest of a `{cmd}` run cannot configure `{command}`",
                path.display()
            )));
        }
        let Some(Value::Object(inner)) = map.remove("config") else {
            unreachable!()
        };
        return Ok(inner);
    }
    Ok(map)
}

/// Overlays `file` and then the given `flags` on `defaults`. Unknown file keys
/// are rejected; absent flags (`null`) leave the value untouched.
pub fn resolve<T>(defaults: &T, file: Option<Map<String, Value>>, flags: &impl Serialize) -> Result<T, CliError>
where
    T: Serialize + DeserializeOwned,
{
    let mut merged = as_object(serde_json::to_value(defaults));
    if let Some(file) = file {
        for (key, value) in file {
            if !merged.contains_key(&key) {
                let mut known: Vec<&str> = merged.keys().map(String::as_str).collect();
                known.sort_unstable();
                return Err(CliError::config(format!(
                    "unknown config key {key:?}; accepted keys: {}",
                    known.join(", ")
                )));
            }
            merged.insert(key, value);
        }
    }
    for (key, value) in as_object(serde_json::to_value(flags)) {
        if !value.is_null() {
            debug_assert!(merged.contains_key(&key), "flag {key} has no config key");
            merged.insert(key, value);
        }
    }
    serde_json::from_value(Value::Object(merged)).map_err(|e| CliError::config(format!("invalid configuration: {e}")))
}

fn as_object(value: serde_json::Result<Value>) -> Map<String, Value> {
    match value {
        Ok(Value::Object(map)) => map,
        other => panic!("config types serialize to JSON objects, got {other:?}"),
    }
}
