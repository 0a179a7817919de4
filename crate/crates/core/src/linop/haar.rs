//! Orthonormal multi-level Haar transform on power-of-two-length signals.
//!
//! Coefficient layout after `levels` steps is
//! `[a_L | d_L | d_{L-1} | ... | d_1]`, coarsest first.

use std::f64::consts::FRAC_1_SQRT_2;

use crate::error::{Error, Result};

pub fn check_levels(len: usize, levels: usize) -> Result<()> {
    if levels == 0 {
        return Err(Error::InvalidOperator("wavelet depth must be at least 1".into()));
    }
    if levels >= usize::BITS as usize || len % (1usize << levels) != 0 {
        return Err(Error::InvalidOperator(format!(
            "length {len} is not divisible by 2^{levels}"
        )));
    }
    Ok(())
}

/// Forward transform in place; `scratch` must have the same length as `x`.
pub fn forward_in_place(x: &mut [f64], levels: usize, scratch: &mut [f64]) {
    for level in 0..levels {
        let len = x.len() >> level;
        let half = len / 2;
        for i in 0..half {
            let (a, b) = (x[2 * i], x[2 * i + 1]);
            scratch[i] = (a + b) * FRAC_1_SQRT_2;
            scratch[half + i] = (a - b) * FRAC_1_SQRT_2;
        }
        x[..len].copy_from_slice(&scratch[..len]);
    }
}

/// Inverse transform in place.
pub fn inverse_in_place(x: &mut [f64], levels: usize, scratch: &mut [f64]) {
    for level in (0..levels).rev() {
        let len = x.len() >> level;
        let half = len / 2;
        for i in 0..half {
            let (a, d) = (x[i], x[half + i]);
            scratch[2 * i] = (a + d) * FRAC_1_SQRT_2;
            scratch[2 * i + 1] = (a - d) * FRAC_1_SQRT_2;
        }
        x[..len].copy_from_slice(&scratch[..len]);
    }
}

pub fn forward(x: &[f64], levels: usize) -> Result<Vec<f64>> {
    check_levels(x.len(), levels)?;
    let mut out = x.to_vec();
    let mut scratch = vec![0.0; x.len()];
    forward_in_place(&mut out, levels, &mut scratch);
    Ok(out)
}

pub fn inverse(coeffs: &[f64], levels: usize) -> Result<Vec<f64>> {
    check_levels(coeffs.len(), levels)?;
    let mut out = coeffs.to_vec();
    let mut scratch = vec![0.0; coeffs.len()];
    inverse_in_place(&mut out, levels, &mut scratch);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn single_level_pair() {
        let c = forward(&[1.0, 1.0], 1).unwrap();
        assert!((c[0] - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(c[1], 0.0);
    }

    #[test]
    fn constant_signal_concentrates_in_scaling_coefficients() {
        let x = vec![1.0; 16];
        let c = forward(&x, 2).unwrap();
        for (i, v) in c.iter().enumerate() {
            if i < 4 {
                assert!((v - 2.0).abs() < 1e-14);
            } else {
                assert!(v.abs() < 1e-14);
            }
        }
    }

    #[test]
    fn rejects_bad_depth() {
        assert!(forward(&[0.0; 12], 3).is_err());
        assert!(forward(&[0.0; 8], 0).is_err());
        assert!(forward(&[0.0; 8], 3).is_ok());
    }

    proptest! {
        #[test]
        fn round_trip_and_energy(levels in 1usize..6, xs in prop::collection::vec(-1e3f64..1e3, 64)) {
            let c = forward(&xs, levels).unwrap();
            let back = inverse(&c, levels).unwrap();
            for (a, b) in xs.iter().zip(&back) {
                prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
            }
            let e0: f64 = xs.iter().map(|v| v * v).sum();
            let e1: f64 = c.iter().map(|v| v * v).sum();
            prop_assert!((e0 - e1).abs() <= 1e-10 * (1.0 + e0));
        }
    }
}
