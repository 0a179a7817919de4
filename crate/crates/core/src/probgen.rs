//! Seeded problem generation: sensing matrices, sparse signals, noise.
//!
//! Each generator is a pure function of its parameters and seed. Matrix,
//! signal and noise draw from separate streams of the master seed, so changing
//! `sigma` leaves `Psi` and `x†` untouched.

use std::fs;
use std::path::Path;

use rand::seq::index;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linop::{self, io, norm2, DenseMatrix, OperatorDescriptor, SensingOperator};
use crate::seed::{self, Stream};

pub fn gen_gaussian_matrix(n: usize, p: usize, seed: u64) -> Result<SensingOperator> {
    check_dims(n, p)?;
    let mut rng = seed::rng(seed, Stream::Matrix);
    let raw = DenseMatrix::from_fn(n, p, |_, _| rng.sample(StandardNormal));
    Ok(SensingOperator::normalize_columns(raw)?.0)
}

/// Entries `±1/sqrt(n)` with equal probability.
pub fn gen_bernoulli_matrix(n: usize, p: usize, seed: u64) -> Result<SensingOperator> {
    check_dims(n, p)?;
    let mut rng = seed::rng(seed, Stream::Matrix);
    let raw = DenseMatrix::from_fn(n, p, |_, _| if rng.gen::<bool>() { 1.0 } else { -1.0 });
    Ok(SensingOperator::normalize_columns(raw)?.0)
}

/// Gaussian columns with neighbour correlation: raw column `j` is
/// `z_j + nu z_{j+1}` for i.i.d. Gaussian `z_1..z_{p+1}`.
///
/// Adjacent normalized columns then have inner product near `nu / (1 + nu^2)`.
/// With `nu = 0` the result equals [`gen_gaussian_matrix`] bit for bit.
pub fn gen_correlated_gaussian(n: usize, p: usize, nu: f64, seed: u64) -> Result<SensingOperator> {
    check_dims(n, p)?;
    if !(nu >= 0.0 && nu.is_finite()) {
        return Err(Error::InvalidProblem(format!("nu must be finite and >= 0, got {nu}")));
    }
    let mut rng = seed::rng(seed, Stream::Matrix);
    let z = DenseMatrix::from_fn(n, p + 1, |_, _| rng.sample(StandardNormal));
    let raw = DenseMatrix::from_fn(n, p, |i, j| z.get(i, j) + nu * z.get(i, j + 1));
    Ok(SensingOperator::normalize_columns(raw)?.0)
}

/// `s`-sparse signal with dynamic range exactly `dr`.
///
/// The support is uniform without replacement. Magnitudes are `10^u` with `u`
/// uniform on `[0, log10 dr]`; the smallest is then set to 1 and the largest
/// to `dr`. Signs are `±1` with equal probability.
pub fn gen_sparse_signal(p: usize, s: usize, dr: f64, seed: u64) -> Result<Vec<f64>> {
    if s == 0 || s > p {
        return Err(Error::InvalidProblem(format!("sparsity s = {s} must lie in [1, p = {p}]")));
    }
    if !(dr >= 1.0 && dr.is_finite()) {
        return Err(Error::InvalidProblem(format!("dynamic range must be >= 1, got {dr}")));
    }
    let mut rng = seed::rng(seed, Stream::Signal);
    let support = index::sample(&mut rng, p, s).into_vec();
    let log_dr = dr.log10();
    let mut mags: Vec<f64> = (0..s)
        .map(|_| 10f64.powf(rng.gen::<f64>() * log_dr).clamp(1.0, dr))
        .collect();
    if s == 1 {
        mags[0] = 1.0;
    } else {
        let (imin, imax) = extreme_indices(&mags);
        mags[imin] = 1.0;
        mags[imax] = dr;
    }
    let mut x = vec![0.0; p];
    for (&i, m) in support.iter().zip(mags) {
        x[i] = if rng.gen::<bool>() { m } else { -m };
    }
    Ok(x)
}

fn extreme_indices(v: &[f64]) -> (usize, usize) {
    let mut imin = 0;
    let mut imax = 0;
    for (i, &m) in v.iter().enumerate() {
        if m < v[imin] {
            imin = i;
        }
        if m > v[imax] {
            imax = i;
        }
    }
    if imin == imax {
        // All equal (dr = 1 or a degenerate draw): any two distinct slots work.
        imax = if imin == 0 { 1 } else { 0 };
    }
    (imin, imax)
}

/// Piecewise-linear test signal of length `p` and its orthonormal Haar
/// coefficients at depth `levels`.
///
/// `segments - 1` breakpoints are drawn uniformly and `active` of the segments,
/// chosen uniformly, carry a ramp: offset uniform on `±[0.2, 1]`, total rise up
/// to the offset's magnitude either way. The rest are zero. The Haar support is
/// then about the length of the active region, spread over all bands.
/// Returns `(signal, coefficients)`.
pub fn gen_piecewise_linear_signal(
    p: usize,
    levels: usize,
    segments: usize,
    active: usize,
    seed: u64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    if segments == 0 || segments > p {
        return Err(Error::InvalidProblem(format!(
            "segment count {segments} must lie in [1, {p}]"
        )));
    }
    if active > segments {
        return Err(Error::InvalidProblem(format!(
            "active segment count {active} exceeds segment count {segments}"
        )));
    }
    let mut rng = seed::rng(seed, Stream::Signal);
    let mut cuts = index::sample(&mut rng, p - 1, segments - 1).into_vec();
    cuts.iter_mut().for_each(|c| *c += 1);
    cuts.sort_unstable();
    cuts.push(p);
    let mut on = vec![false; segments];
    for k in index::sample(&mut rng, segments, active) {
        on[k] = true;
    }
    let mut signal = Vec::with_capacity(p);
    let mut start = 0;
    for (k, &end) in cuts.iter().enumerate() {
        let len = end - start;
        if on[k] {
            let m = 0.2 + 0.8 * rng.gen::<f64>();
            let offset = if rng.gen::<bool>() { m } else { -m };
            let slope = offset * (2.0 * rng.gen::<f64>() - 1.0) / len as f64;
            signal.extend((0..len).map(|i| offset + slope * i as f64));
        } else {
            signal.extend(std::iter::repeat(0.0).take(len));
        }
        start = end;
    }
    let mut coeffs = linop::haar::forward(&signal, levels)?;
    flush_tiny(&mut coeffs);
    Ok((signal, coeffs))
}

/// Zeroes entries below `1e-12` of the largest magnitude (rounding residue of
/// cancelling sums).
fn flush_tiny(v: &mut [f64]) {
    let scale = v.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    v.iter_mut()
        .filter(|x| x.abs() <= 1e-12 * scale)
        .for_each(|x| *x = 0.0);
}

/// i.i.d. `N(0, sigma^2)` noise of length `n`.
pub fn gen_noise(n: usize, sigma: f64, seed: u64) -> Result<Vec<f64>> {
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidProblem(format!("sigma must be finite and >= 0, got {sigma}")));
    }
    let mut rng = seed::rng(seed, Stream::Noise);
    Ok((0..n)
        .map(|_| sigma * rng.sample::<f64, _>(StandardNormal))
        .collect())
}

fn check_dims(n: usize, p: usize) -> Result<()> {
    if n == 0 || p == 0 {
        return Err(Error::InvalidProblem(format!("dimensions must be >= 1, got {n}x{p}")));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatrixKind {
    Gaussian,
    Bernoulli,
    CorrelatedGaussian,
    PartialFftHaar,
}

impl std::str::FromStr for MatrixKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.replace('-', "_").as_str() {
            "gaussian" => Ok(MatrixKind::Gaussian),
            "bernoulli" => Ok(MatrixKind::Bernoulli),
            "correlated_gaussian" | "correlated" => Ok(MatrixKind::CorrelatedGaussian),
            "partial_fft_haar" => Ok(MatrixKind::PartialFftHaar),
            other => Err(format!("unknown matrix kind {other:?}")),
        }
    }
}

/// How the true signal is drawn.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum SignalKind {
    /// [`gen_sparse_signal`] with the spec's `s` and `dr`.
    Sparse,
    /// Haar coefficients of [`gen_piecewise_linear_signal`]; `s` is realized, not prescribed.
    PiecewiseLinear { segments: usize, active: usize },
}

/// Every parameter of a generated instance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    pub kind: MatrixKind,
    pub n: usize,
    pub p: usize,
    pub s: usize,
    pub dr: f64,
    pub sigma: f64,
    pub nu: f64,
    /// Haar depth for `partial_fft_haar`.
    pub levels: usize,
    pub signal: SignalKind,
    pub seed: u64,
}

impl ProblemSpec {
    pub fn new(kind: MatrixKind, n: usize, p: usize, s: usize, dr: f64, sigma: f64, seed: u64) -> Self {
        Self {
            kind,
            n,
            p,
            s,
            dr,
            sigma,
            nu: 0.0,
            levels: 2,
            signal: SignalKind::Sparse,
            seed,
        }
    }

    pub fn operator_descriptor(&self) -> OperatorDescriptor {
        let (n, p, seed) = (self.n, self.p, self.seed);
        match self.kind {
            MatrixKind::Gaussian => OperatorDescriptor::Gaussian { n, p, seed },
            MatrixKind::Bernoulli => OperatorDescriptor::Bernoulli { n, p, seed },
            MatrixKind::CorrelatedGaussian => OperatorDescriptor::CorrelatedGaussian {
                n,
                p,
                nu: self.nu,
                seed,
            },
            MatrixKind::PartialFftHaar => OperatorDescriptor::PartialFftHaar {
                n,
                p,
                levels: self.levels,
                seed,
            },
        }
    }
}

#[derive(Debug, Clone)]
pub struct Problem {
    pub op: SensingOperator,
    pub x_true: Vec<f64>,
    pub y: Vec<f64>,
    pub sigma: f64,
    /// Realized noise norm `||eta||`.
    pub epsilon: f64,
    pub seed: u64,
    pub meta: ProblemSpec,
}

impl Problem {
    pub fn true_support(&self) -> Vec<usize> {
        crate::thresholding::support(&self.x_true)
    }

    pub fn sparsity(&self) -> usize {
        self.x_true.iter().filter(|v| **v != 0.0).count()
    }
}

/// Builds `y = Psi x† + eta` for `spec`.
pub fn gen_problem(spec: &ProblemSpec) -> Result<Problem> {
    let op = spec.operator_descriptor().build()?;
    let x_true = match spec.signal {
        SignalKind::Sparse => gen_sparse_signal(spec.p, spec.s, spec.dr, spec.seed)?,
        SignalKind::PiecewiseLinear { segments, active } => {
            let (signal, coeffs) =
                gen_piecewise_linear_signal(spec.p, spec.levels, segments, active, spec.seed)?;
            match &op {
                // Express the signal in the operator's column-scaled basis so
                // that `Psi x†` samples exactly this signal.
                SensingOperator::PartialFourierHaar(f) => {
                    let mut x = f.analyze(&signal)?;
                    x.iter_mut().zip(&coeffs).filter(|(_, c)| **c == 0.0).for_each(|(v, _)| *v = 0.0);
                    x
                }
                SensingOperator::Dense(_) => coeffs,
            }
        }
    };
    let eta = gen_noise(spec.n, spec.sigma, spec.seed)?;
    let mut y = op.apply(&x_true)?;
    y.iter_mut().zip(&eta).for_each(|(yi, e)| *yi += e);
    let mut meta = *spec;
    if let SignalKind::PiecewiseLinear { .. } = spec.signal {
        meta.s = x_true.iter().filter(|v| **v != 0.0).count();
    }
    Ok(Problem {
        op,
        x_true,
        y,
        sigma: spec.sigma,
        epsilon: norm2(&eta),
        seed: spec.seed,
        meta,
    })
}

/// `manifest.json` of a problem directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemManifest {
    pub spec: ProblemSpec,
    pub operator: OperatorDescriptor,
    /// `matrix.bin` for dense operators, absent for matrix-free ones.
    pub matrix_file: Option<String>,
    pub x_true_file: String,
    pub y_file: String,
    pub epsilon: f64,
    pub sparsity: usize,
    pub mu: Option<f64>,
}

pub const MANIFEST_FILE: &str = "manifest.json";

/// Writes `matrix.bin` (dense only), `x_true.bin`, `y.bin` and `manifest.json`.
pub fn save_problem(problem: &Problem, dir: impl AsRef<Path>, mu: Option<f64>) -> Result<ProblemManifest> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let matrix_file = match &problem.op {
        SensingOperator::Dense(m) => {
            io::write_matrix(dir.join("matrix.bin"), m)?;
            Some("matrix.bin".to_string())
        }
        SensingOperator::PartialFourierHaar(_) => None,
    };
    io::write_vector(dir.join("x_true.bin"), &problem.x_true)?;
    io::write_vector(dir.join("y.bin"), &problem.y)?;
    let manifest = ProblemManifest {
        spec: problem.meta,
        operator: problem.meta.operator_descriptor(),
        matrix_file,
        x_true_file: "x_true.bin".into(),
        y_file: "y.bin".into(),
        epsilon: problem.epsilon,
        sparsity: problem.sparsity(),
        mu,
    };
    let path = dir.join(MANIFEST_FILE);
    let text = serde_json::to_string_pretty(&manifest)?;
    fs::write(&path, text + "\n").map_err(|e| Error::io(&path, e))?;
    Ok(manifest)
}

pub fn load_problem(dir: impl AsRef<Path>) -> Result<(Problem, ProblemManifest)> {
    let dir = dir.as_ref();
    let path = dir.join(MANIFEST_FILE);
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    let manifest: ProblemManifest = serde_json::from_str(&text)?;
    let op = match &manifest.matrix_file {
        Some(file) => SensingOperator::from_unit_columns(io::read_matrix(dir.join(file))?)?,
        None => manifest.operator.build()?,
    };
    let x_true = io::read_vector(dir.join(&manifest.x_true_file))?;
    let y = io::read_vector(dir.join(&manifest.y_file))?;
    if x_true.len() != op.ncols() || y.len() != op.nrows() {
        return Err(Error::Format {
            path,
            reason: "vector lengths do not match the operator".into(),
        });
    }
    let problem = Problem {
        op,
        x_true,
        y,
        sigma: manifest.spec.sigma,
        epsilon: manifest.epsilon,
        seed: manifest.spec.seed,
        meta: manifest.spec,
    };
    Ok((problem, manifest))
}
