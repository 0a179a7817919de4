//! Matrix-free partial Fourier sampling of an inverse Haar synthesis.
//!
//! The operator maps wavelet coefficients `x` to
//! `D^{-1}`-scaled rows of `R W^{-1} x`, where `W^{-1}` is the orthonormal
//! inverse Haar transform and `R` is the unitary DFT written over the reals:
//! row 0 is `Re X_0`, rows `2k-1, 2k` are `sqrt(2) Re X_k, sqrt(2) Im X_k` for
//! `0 < k < p/2`, and row `p-1` is `Re X_{p/2}`. `R` is orthogonal, so selecting
//! rows keeps them orthonormal. Per-column scaling then makes every column unit
//! norm.

use std::f64::consts::SQRT_2;
use std::fmt;
use std::sync::Arc;

use rand::seq::index;
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::haar;
use crate::error::{Error, Result};
use crate::seed::{self, Stream};

#[derive(Clone)]
pub struct PartialFourierHaar {
    p: usize,
    levels: usize,
    rows: Vec<usize>,
    col_scale: Vec<f64>,
    seed: u64,
    fft: Arc<dyn Fft<f64>>,
    ifft: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for PartialFourierHaar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PartialFourierHaar")
            .field("n", &self.rows.len())
            .field("p", &self.p)
            .field("levels", &self.levels)
            .field("seed", &self.seed)
            .finish()
    }
}

impl PartialFourierHaar {
    /// Samples `n` of the `p` real DFT rows uniformly without replacement.
    pub fn new(p: usize, n: usize, levels: usize, seed: u64) -> Result<Self> {
        if p < 2 || !p.is_power_of_two() {
            return Err(Error::InvalidOperator(format!(
                "signal length p = {p} must be a power of two >= 2"
            )));
        }
        if n == 0 || n > p {
            return Err(Error::InvalidOperator(format!(
                "row count n = {n} must lie in [1, {p}]"
            )));
        }
        haar::check_levels(p, levels)?;

        let mut rng = seed::rng(seed, Stream::RowSelection);
        let mut rows = index::sample(&mut rng, p, n).into_vec();
        rows.sort_unstable();
        Self::with_rows(p, levels, rows, seed)
    }

    /// Builds the operator from an explicit sorted set of real DFT rows.
    pub fn with_rows(p: usize, levels: usize, rows: Vec<usize>, seed: u64) -> Result<Self> {
        if rows.windows(2).any(|w| w[0] >= w[1]) || rows.last().is_some_and(|&r| r >= p) {
            return Err(Error::InvalidOperator(
                "row indices must be strictly increasing and below p".into(),
            ));
        }
        let mut planner = FftPlanner::new();
        let mut op = Self {
            p,
            levels,
            rows,
            col_scale: vec![1.0; p],
            seed,
            fft: planner.plan_fft_forward(p),
            ifft: planner.plan_fft_inverse(p),
        };

        let mut e = vec![0.0; p];
        let mut out = vec![0.0; op.rows.len()];
        let mut scales = Vec::with_capacity(p);
        for j in 0..p {
            e[j] = 1.0;
            op.apply_into(&e, &mut out);
            e[j] = 0.0;
            let norm = super::dense::norm2(&out);
            if norm == 0.0 {
                return Err(Error::InvalidOperator(format!(
                    "column {j} vanishes on the selected frequencies"
                )));
            }
            scales.push(1.0 / norm);
        }
        op.col_scale = scales;
        Ok(op)
    }

    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    pub fn ncols(&self) -> usize {
        self.p
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Selected real DFT row indices, increasing.
    pub fn rows(&self) -> &[usize] {
        &self.rows
    }

    /// Per-column scale `D`, so column `j` is `R W^{-1} (D_j e_j)`.
    pub fn column_scales(&self) -> &[f64] {
        &self.col_scale
    }

    /// Signal represented by coefficients `x`: `W^{-1} D x`.
    pub fn synthesize(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_len(x.len(), self.p)?;
        let z: Vec<f64> = x.iter().zip(&self.col_scale).map(|(a, s)| a * s).collect();
        haar::inverse(&z, self.levels)
    }

    /// Coefficients of `signal` in this operator's scaled basis: `D^{-1} W signal`.
    pub fn analyze(&self, signal: &[f64]) -> Result<Vec<f64>> {
        check_len(signal.len(), self.p)?;
        let mut c = haar::forward(signal, self.levels)?;
        c.iter_mut().zip(&self.col_scale).for_each(|(v, s)| *v /= s);
        Ok(c)
    }

    pub(crate) fn apply_into(&self, x: &[f64], out: &mut [f64]) {
        let p = self.p;
        let mut z: Vec<f64> = x.iter().zip(&self.col_scale).map(|(a, s)| a * s).collect();
        let mut scratch = vec![0.0; p];
        haar::inverse_in_place(&mut z, self.levels, &mut scratch);

        let mut spec: Vec<Complex64> = z.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.fft.process(&mut spec);
        let unitary = 1.0 / (p as f64).sqrt();
        for (o, &r) in out.iter_mut().zip(&self.rows) {
            *o = unitary * real_row(&spec, r, p);
        }
    }

    pub(crate) fn apply_adjoint_into(&self, r: &[f64], out: &mut [f64]) {
        let p = self.p;
        let mut full = vec![0.0; p];
        for (&row, &v) in self.rows.iter().zip(r) {
            full[row] = v;
        }
        let mut spec = vec![Complex64::new(0.0, 0.0); p];
        spec[0] = Complex64::new(full[0], 0.0);
        spec[p / 2] = Complex64::new(full[p - 1], 0.0);
        for k in 1..p / 2 {
            let c = Complex64::new(full[2 * k - 1], full[2 * k]) / SQRT_2;
            spec[k] = c;
            spec[p - k] = c.conj();
        }
        self.ifft.process(&mut spec);
        let unitary = 1.0 / (p as f64).sqrt();
        for (o, c) in out.iter_mut().zip(&spec) {
            *o = c.re * unitary;
        }
        let mut scratch = vec![0.0; p];
        haar::forward_in_place(out, self.levels, &mut scratch);
        for (o, s) in out.iter_mut().zip(&self.col_scale) {
            *o *= s;
        }
    }
}

fn check_len(actual: usize, expected: usize) -> Result<()> {
    if actual != expected {
        return Err(Error::DimensionMismatch {
            context: "partial_fft_haar signal",
            expected,
            actual,
        });
    }
    Ok(())
}

fn real_row(spec: &[Complex64], row: usize, p: usize) -> f64 {
    if row == 0 {
        spec[0].re
    } else if row == p - 1 {
        spec[p / 2].re
    } else {
        let k = (row + 1) / 2;
        if row % 2 == 1 {
            SQRT_2 * spec[k].re
        } else {
            SQRT_2 * spec[k].im
        }
    }
}
