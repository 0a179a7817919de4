//! Sensing operators: dense column-major matrices and the matrix-free partial
//! Fourier / inverse Haar composition, plus coherence diagnostics and the
//! binary matrix format.

mod coherence;
mod dense;
mod descriptor;
mod fourier;
pub mod haar;
pub mod io;

pub use coherence::{
    mutual_coherence, mutual_coherence_with_budget, CoherenceReport, DEFAULT_COHERENCE_BUDGET,
};
pub use dense::{dot, norm2, DenseMatrix};
pub use descriptor::OperatorDescriptor;
pub use fourier::PartialFourierHaar;

use crate::error::{Error, Result};

/// Per-run matrix-vector product tally. Operators never own one.
#[derive(Debug, Default, Clone, Copy, PartialEq, Eq)]
pub struct MatvecCounter(u64);

impl MatvecCounter {
    pub fn new() -> Self {
        Self(0)
    }

    pub fn count(&self) -> u64 {
        self.0
    }

    pub fn bump(&mut self) {
        self.0 += 1;
    }
}

/// Linear map `R^p -> R^n` with unit-norm columns.
#[derive(Debug, Clone)]
pub enum SensingOperator {
    Dense(DenseMatrix),
    PartialFourierHaar(PartialFourierHaar),
}

impl SensingOperator {
    /// Normalizes the columns of `raw` and wraps the result.
    ///
    /// The returned scales are the raw column norms.
    pub fn normalize_columns(raw: DenseMatrix) -> Result<(Self, Vec<f64>)> {
        let (m, scales) = dense::normalize_columns(raw)?;
        Ok((SensingOperator::Dense(m), scales))
    }

    /// Wraps a dense matrix whose columns are already unit norm.
    ///
    /// Fails if any column norm deviates from 1 by more than `1e-12` relative.
    pub fn from_unit_columns(m: DenseMatrix) -> Result<Self> {
        for j in 0..m.ncols() {
            let norm = norm2(m.column(j));
            if (norm - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidOperator(format!(
                    "column {j} has norm {norm}, expected 1"
                )));
            }
        }
        Ok(SensingOperator::Dense(m))
    }

    pub fn partial_fft_haar(p: usize, n: usize, levels: usize, seed: u64) -> Result<Self> {
        PartialFourierHaar::new(p, n, levels, seed).map(SensingOperator::PartialFourierHaar)
    }

    pub fn nrows(&self) -> usize {
        match self {
            SensingOperator::Dense(m) => m.nrows(),
            SensingOperator::PartialFourierHaar(f) => f.nrows(),
        }
    }

    pub fn ncols(&self) -> usize {
        match self {
            SensingOperator::Dense(m) => m.ncols(),
            SensingOperator::PartialFourierHaar(f) => f.ncols(),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            SensingOperator::Dense(_) => "dense",
            SensingOperator::PartialFourierHaar(_) => "partial_fft_haar",
        }
    }

    pub fn is_implicit(&self) -> bool {
        !matches!(self, SensingOperator::Dense(_))
    }

    /// `out = Psi x`.
    pub fn apply_into(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        check_len("apply input", self.ncols(), x.len())?;
        check_len("apply output", self.nrows(), out.len())?;
        match self {
            SensingOperator::Dense(m) => m.gemv(x, out),
            SensingOperator::PartialFourierHaar(f) => f.apply_into(x, out),
        }
        Ok(())
    }

    /// `out = Psi^t r`.
    pub fn apply_adjoint_into(&self, r: &[f64], out: &mut [f64]) -> Result<()> {
        check_len("adjoint input", self.nrows(), r.len())?;
        check_len("adjoint output", self.ncols(), out.len())?;
        match self {
            SensingOperator::Dense(m) => m.gemv_t(r, out),
            SensingOperator::PartialFourierHaar(f) => f.apply_adjoint_into(r, out),
        }
        Ok(())
    }

    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.nrows()];
        self.apply_into(x, &mut out)?;
        Ok(out)
    }

    pub fn apply_adjoint(&self, r: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.ncols()];
        self.apply_adjoint_into(r, &mut out)?;
        Ok(out)
    }

    pub fn apply_counted(&self, x: &[f64], counter: &mut MatvecCounter) -> Result<Vec<f64>> {
        let out = self.apply(x)?;
        counter.bump();
        Ok(out)
    }

    pub fn apply_adjoint_counted(&self, r: &[f64], counter: &mut MatvecCounter) -> Result<Vec<f64>> {
        let out = self.apply_adjoint(r)?;
        counter.bump();
        Ok(out)
    }

    /// Column `j` as an owned vector.
    pub fn column(&self, j: usize) -> Vec<f64> {
        match self {
            SensingOperator::Dense(m) => m.column(j).to_vec(),
            SensingOperator::PartialFourierHaar(f) => {
                let mut e = vec![0.0; f.ncols()];
                e[j] = 1.0;
                let mut out = vec![0.0; f.nrows()];
                f.apply_into(&e, &mut out);
                out
            }
        }
    }

    /// Materializes the operator column by column.
    pub fn to_dense(&self) -> DenseMatrix {
        match self {
            SensingOperator::Dense(m) => m.clone(),
            SensingOperator::PartialFourierHaar(_) => {
                let cols: Vec<Vec<f64>> = (0..self.ncols()).map(|j| self.column(j)).collect();
                DenseMatrix::from_columns(&cols).expect("columns share the row count")
            }
        }
    }

    /// Spectral norm estimate by power iteration on `Psi^t Psi`.
    ///
    /// The start vector is a fixed deterministic pattern, so the estimate is
    /// reproducible. Iterates until the relative change drops below `tol`.
    pub fn spectral_norm(&self, max_iter: usize, tol: f64) -> f64 {
        let p = self.ncols();
        let mut v: Vec<f64> = (0..p).map(|i| 1.0 + ((i * 7919) % 97) as f64 / 97.0).collect();
        let nv = norm2(&v);
        v.iter_mut().for_each(|a| *a /= nv);
        let mut av = vec![0.0; self.nrows()];
        let mut w = vec![0.0; p];
        let mut sigma_sq = 0.0;
        for _ in 0..max_iter {
            self.apply_into(&v, &mut av).expect("sized buffers");
            self.apply_adjoint_into(&av, &mut w).expect("sized buffers");
            let nw = norm2(&w);
            if nw == 0.0 {
                return 0.0;
            }
            let converged = (nw - sigma_sq).abs() <= tol * nw;
            sigma_sq = nw;
            v.iter_mut().zip(&w).for_each(|(a, b)| *a = b / nw);
            if converged {
                break;
            }
        }
        sigma_sq.sqrt()
    }
}

fn check_len(context: &'static str, expected: usize, actual: usize) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            context,
            expected,
            actual,
        })
    }
}

/// Relative adjoint defect `|<Psi x, r> - <x, Psi^t r>| / (||Psi x|| ||r|| + ||x|| ||Psi^t r||)`.
pub fn adjoint_defect(op: &SensingOperator, x: &[f64], r: &[f64]) -> Result<f64> {
    let ax = op.apply(x)?;
    let atr = op.apply_adjoint(r)?;
    let lhs = dot(&ax, r);
    let rhs = dot(x, &atr);
    let scale = norm2(&ax) * norm2(r) + norm2(x) * norm2(&atr);
    Ok(if scale == 0.0 {
        (lhs - rhs).abs()
    } else {
        (lhs - rhs).abs() / scale
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::probgen;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn identity(n: usize) -> SensingOperator {
        SensingOperator::Dense(DenseMatrix::from_fn(n, n, |i, j| if i == j { 1.0 } else { 0.0 }))
    }

    fn random_vec(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
        (0..len).map(|_| rng.gen_range(-1.0..1.0)).collect()
    }

    #[test]
    fn identity_apply_and_adjoint() {
        let op = identity(2);
        assert_eq!(op.apply(&[3.0, -1.0]).unwrap(), vec![3.0, -1.0]);
        assert_eq!(op.apply_adjoint(&[3.0, -1.0]).unwrap(), vec![3.0, -1.0]);
    }

    #[test]
    fn single_column_scaling() {
        let op = SensingOperator::from_unit_columns(
            DenseMatrix::from_col_major(2, 1, vec![0.6, 0.8]).unwrap(),
        )
        .unwrap();
        let y = op.apply(&[2.0]).unwrap();
        assert!((y[0] - 1.2).abs() < 1e-15 && (y[1] - 1.6).abs() < 1e-15);
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let op = identity(3);
        assert!(matches!(
            op.apply(&[1.0, 2.0]),
            Err(Error::DimensionMismatch { expected: 3, actual: 2, .. })
        ));
        assert!(op.apply_adjoint(&[1.0; 4]).is_err());
    }

    #[test]
    fn counter_increments_once_per_product() {
        let op = identity(3);
        let mut c = MatvecCounter::new();
        op.apply_counted(&[1.0, 0.0, 0.0], &mut c).unwrap();
        op.apply_adjoint_counted(&[1.0, 0.0, 0.0], &mut c).unwrap();
        assert_eq!(c.count(), 2);
    }

    #[test]
    fn dense_apply_matches_naive_loop() {
        let op = probgen::gen_gaussian_matrix(50, 100, 11).unwrap();
        let SensingOperator::Dense(m) = &op else { unreachable!() };
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x = random_vec(&mut rng, 100);
        let y = op.apply(&x).unwrap();
        for i in 0..50 {
            let mut acc = 0.0;
            for j in 0..100 {
                acc += m.get(i, j) * x[j];
            }
            assert!((acc - y[i]).abs() <= 1e-12);
        }
    }

    #[test]
    fn adjoint_consistency_for_every_kind() {
        let dense = probgen::gen_gaussian_matrix(30, 60, 5).unwrap();
        let fourier = SensingOperator::partial_fft_haar(256, 64, 2, 9).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for op in [&dense, &fourier] {
            for _ in 0..100 {
                let x = random_vec(&mut rng, op.ncols());
                let r = random_vec(&mut rng, op.nrows());
                assert!(adjoint_defect(op, &x, &r).unwrap() <= 1e-10);
            }
        }
    }

    #[test]
    fn partial_fft_haar_full_rows_is_orthogonal() {
        let op = SensingOperator::partial_fft_haar(8, 8, 1, 0).unwrap();
        let m = op.to_dense();
        for i in 0..8 {
            for j in 0..8 {
                let g = dot(m.column(i), m.column(j));
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((g - expect).abs() < 1e-12, "gram[{i}][{j}] = {g}");
            }
        }
        assert!(mutual_coherence(&op).unwrap().mu < 1e-12);
    }

    #[test]
    fn partial_fft_haar_matches_its_densification() {
        let op = SensingOperator::partial_fft_haar(64, 40, 3, 4).unwrap();
        let m = op.to_dense();
        let dense = SensingOperator::Dense(m.clone());
        for j in 0..64 {
            assert!((norm2(m.column(j)) - 1.0).abs() < 1e-12);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let x = random_vec(&mut rng, 64);
        let r = random_vec(&mut rng, 40);
        let (a, b) = (op.apply(&x).unwrap(), dense.apply(&x).unwrap());
        let (c, d) = (op.apply_adjoint(&r).unwrap(), dense.apply_adjoint(&r).unwrap());
        for (u, v) in a.iter().zip(&b).chain(c.iter().zip(&d)) {
            assert!((u - v).abs() < 1e-12);
        }
    }

    #[test]
    fn spectral_norm_of_orthonormal_columns_is_one() {
        let op = identity(5);
        assert!((op.spectral_norm(100, 1e-12) - 1.0).abs() < 1e-12);
    }
}
