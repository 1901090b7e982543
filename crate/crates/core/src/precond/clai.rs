//! Circulant approximate inverse.
//!
//! With `F_jk = w^(jk) / sqrt(N)` and `w = exp(-2 pi i / N)`, the circulant
//! average of `A` is `C = F^H diag(Λ) F` where `Λ_k = (1/N) sum_pq w^((p-q)k) A_pq`.
//! The exact inverse of this `C` is `F^H diag(1/Λ) F`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matcore::BandedMatrix;

/// Dense products are only formed up to this dimension.
pub const CLAI_DENSE_LIMIT: usize = 4096;

/// Eigenvalues `Λ_k` of the circulant average, with `w = exp(-2 pi i / N)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CirculantSpectrum {
    pub lambda: Vec<Complex64>,
}

impl CirculantSpectrum {
    pub fn n(&self) -> usize {
        self.lambda.len()
    }

    /// Index and modulus of the eigenvalue closest to zero.
    pub fn min_abs(&self) -> (usize, f64) {
        self.lambda
            .iter()
            .map(|l| l.norm())
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap_or((0, 0.0))
    }

    fn check_invertible(&self) -> Result<()> {
        let max = self.lambda.iter().map(|l| l.norm()).fold(0.0, f64::max);
        let (k, min) = self.min_abs();
        if self.lambda.is_empty() || !(min > 1e-14 * max) {
            return Err(Error::ZeroEigenvalue(k));
        }
        Ok(())
    }

    pub fn inverse_eigenvalues(&self) -> Result<Vec<Complex64>> {
        self.check_invertible()?;
        Ok(self.lambda.iter().map(|l| l.inv()).collect())
    }

    /// First column of `C`.
    pub fn circulant_column(&self) -> Vec<f64> {
        inverse_dft_real(&self.lambda)
    }

    /// First column of `C^-1`.
    pub fn inverse_column(&self) -> Result<Vec<f64>> {
        Ok(inverse_dft_real(&self.inverse_eigenvalues()?))
    }
}

fn inverse_dft_real(x: &[Complex64]) -> Vec<f64> {
    let n = x.len();
    let mut buf = x.to_vec();
    FftPlanner::new().plan_fft_inverse(n).process(&mut buf);
    buf.iter().map(|z| z.re / n as f64).collect()
}

/// Spectrum of the circulant average: diagonals wrapped onto a length-`N`
/// vector, then one forward FFT.
pub fn clai_spectrum(a: &BandedMatrix) -> CirculantSpectrum {
    let n = a.n();
    let mut v = vec![Complex64::new(0.0, 0.0); n];
    for (&k, values) in a.diagonals() {
        let slot = k.rem_euclid(n as i64) as usize;
        v[slot] += values.iter().sum::<f64>() / n as f64;
    }
    if n > 0 {
        FftPlanner::new().plan_fft_forward(n).process(&mut v);
    }
    CirculantSpectrum { lambda: v }
}

/// Dense circulant with first column `c`.
pub fn circulant_dense(c: &[f64]) -> DMatrix<f64> {
    let n = c.len();
    DMatrix::from_fn(n, n, |r, col| c[(r + n - col) % n])
}

/// Dense `C^-1 A`, computed column by column in `O(N^2 d)`.
pub fn clai_apply(spec: &CirculantSpectrum, a: &BandedMatrix) -> Result<DMatrix<f64>> {
    let n = a.n();
    if spec.n() != n {
        return Err(Error::DimensionMismatch(format!("spectrum {} vs matrix {}", spec.n(), n)));
    }
    if n > CLAI_DENSE_LIMIT {
        return Err(Error::InvalidArgument(format!(
            "dense CLAI product limited to n <= {CLAI_DENSE_LIMIT}, got {n}"
        )));
    }
    let ci = spec.inverse_column()?;
    let mut out = DMatrix::zeros(n, n);
    for (m, col, v) in a.entries() {
        if v == 0.0 {
            continue;
        }
        for r in 0..n {
            out[(r, col)] += ci[(r + n - m) % n] * v;
        }
    }
    Ok(out)
}
