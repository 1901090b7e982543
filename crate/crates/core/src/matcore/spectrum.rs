//! Extreme singular values and condition numbers.
//!
//! Small matrices use a dense SVD. Larger ones run Lanczos with full
//! reorthogonalisation on `A^T A` (largest singular value) and on
//! `(A^T A)^-1` through an LU factorisation (smallest singular value).

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::banded::BandedMatrix;
use super::lu::BandLu;
use crate::error::{Error, Result};

/// Matrices up to this dimension go through the dense SVD.
pub const DIRECT_LIMIT: usize = 256;
const LANCZOS_SEED: u64 = 0x5eed_cafe;
const MAX_LANCZOS_STEPS: usize = 400;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpectrumMethod {
    Direct,
    Iterative,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub sigma_min: f64,
    pub sigma_max: f64,
    pub kappa: f64,
    pub method: SpectrumMethod,
    pub tol: f64,
}

impl Spectrum {
    fn new(sigma_min: f64, sigma_max: f64, method: SpectrumMethod, tol: f64) -> Result<Self> {
        if !(sigma_min > 0.0) || !sigma_min.is_finite() || sigma_min <= tol * sigma_max {
            return Err(Error::Singular(format!(
                "sigma_min = {sigma_min:e}, sigma_max = {sigma_max:e}"
            )));
        }
        Ok(Self {
            sigma_min,
            sigma_max,
            kappa: sigma_max / sigma_min,
            method,
            tol,
        })
    }
}

/// Extreme singular values of a banded matrix to relative tolerance `tol`.
pub fn spectral_metrics(m: &BandedMatrix, tol: f64) -> Result<Spectrum> {
    if m.n() == 0 {
        return Err(Error::InvalidArgument("empty matrix".into()));
    }
    if m.n() <= DIRECT_LIMIT {
        return spectral_metrics_dense(&m.to_dense(), tol);
    }
    let lu = BandLu::factor(m)?;
    let n = m.n();
    let gram = |x: &[f64]| m.tr_mul_vec(&m.mul_vec(x));
    let inv_gram = |x: &[f64]| lu.solve(&lu.solve_transpose(x));
    let top = lanczos_largest(n, gram, tol)?;
    let bottom = lanczos_largest(n, inv_gram, tol)?;
    Spectrum::new(1.0 / bottom.sqrt(), top.sqrt(), SpectrumMethod::Iterative, tol)
}

/// Same as [`spectral_metrics`] for a dense matrix.
pub fn spectral_metrics_dense(m: &DMatrix<f64>, tol: f64) -> Result<Spectrum> {
    let n = m.nrows();
    if n == 0 || n != m.ncols() {
        return Err(Error::DimensionMismatch(format!("{}x{}", m.nrows(), m.ncols())));
    }
    if n <= DIRECT_LIMIT {
        let (lo, hi) = dense_extreme_singular_values(m);
        return Spectrum::new(lo, hi, SpectrumMethod::Direct, tol);
    }
    let lu = m.clone().lu();
    let lu_t = m.transpose().lu();
    if !lu.is_invertible() {
        return Err(Error::Singular("dense LU failed".into()));
    }
    let gram = |x: &[f64]| {
        let v = DVector::from_column_slice(x);
        (m.tr_mul(&(m * v))).as_slice().to_vec()
    };
    let inv_gram = |x: &[f64]| {
        let v = DVector::from_column_slice(x);
        let y = lu_t.solve(&v).expect("checked invertible");
        lu.solve(&y).expect("checked invertible").as_slice().to_vec()
    };
    let top = lanczos_largest(n, gram, tol)?;
    let bottom = lanczos_largest(n, inv_gram, tol)?;
    Spectrum::new(1.0 / bottom.sqrt(), top.sqrt(), SpectrumMethod::Iterative, tol)
}

/// `(sigma_min, sigma_max)` from a full dense SVD.
pub fn dense_extreme_singular_values(m: &DMatrix<f64>) -> (f64, f64) {
    let sv = m.clone().svd(false, false).singular_values;
    let lo = sv.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = sv.iter().copied().fold(0.0, f64::max);
    (lo, hi)
}

/// Largest eigenvalue of a symmetric positive semi-definite operator.
fn lanczos_largest<F>(n: usize, op: F, tol: f64) -> Result<f64>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let mut rng = ChaCha8Rng::seed_from_u64(LANCZOS_SEED);
    let mut q: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
    normalize(&mut q);

    let steps = MAX_LANCZOS_STEPS.min(n);
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(steps);
    let mut alpha = Vec::with_capacity(steps);
    let mut beta: Vec<f64> = Vec::with_capacity(steps);
    let mut previous = f64::NAN;

    for j in 0..steps {
        let mut w = op(&q);
        let a = dot(&w, &q);
        alpha.push(a);
        basis.push(q.clone());
        // two passes of classical Gram-Schmidt against the whole basis
        for _ in 0..2 {
            for v in &basis {
                let h = dot(&w, v);
                for (wi, vi) in w.iter_mut().zip(v) {
                    *wi -= h * vi;
                }
            }
        }
        let b = dot(&w, &w).sqrt();
        let (theta, last) = ritz_top(&alpha, &beta);
        let residual = (b * last).abs();
        let breakdown = b <= 1e-14 * theta.abs().max(1e-300);
        let settled = (theta - previous).abs() <= 0.1 * tol * theta;
        if breakdown || j + 1 == n || (residual <= tol.sqrt() * theta && settled) {
            return Ok(theta);
        }
        previous = theta;
        beta.push(b);
        q = w.into_iter().map(|x| x / b).collect();
    }
    Err(Error::NoConvergence(format!(
        "Lanczos did not settle in {steps} steps"
    )))
}

/// Largest Ritz value of the tridiagonal `(alpha, beta)` and the last
/// component of its eigenvector.
fn ritz_top(alpha: &[f64], beta: &[f64]) -> (f64, f64) {
    let k = alpha.len();
    let mut t = DMatrix::zeros(k, k);
    for i in 0..k {
        t[(i, i)] = alpha[i];
        if i + 1 < k {
            t[(i, i + 1)] = beta[i];
            t[(i + 1, i)] = beta[i];
        }
    }
    let eig = SymmetricEigen::new(t);
    let (idx, &theta) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty");
    (theta, eig.eigenvectors[(k - 1, idx)])
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalize(v: &mut [f64]) {
    let s = dot(v, v).sqrt();
    v.iter_mut().for_each(|x| *x /= s);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::generate::{generate_test_matrix, MatrixSource};
    use crate::matcore::ops::diagonal_scale;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn identity_and_diagonal() {
        let s = spectral_metrics(&BandedMatrix::identity(4), 1e-10).unwrap();
        assert_eq!((s.sigma_min, s.sigma_max, s.kappa), (1.0, 1.0, 1.0));
        let s = spectral_metrics(&BandedMatrix::from_diagonal(vec![1.0, 0.1]), 1e-10).unwrap();
        assert!(rel(s.kappa, 10.0) < 1e-12);
    }

    #[test]
    fn singular_matrix_is_an_error() {
        let m = BandedMatrix::from_diagonal(vec![1.0, 0.0, 2.0]);
        assert!(spectral_metrics(&m, 1e-10).is_err());
    }

    #[test]
    fn iterative_path_matches_dense_svd() {
        for (nx, ny) in [(16, 32), (32, 32)] {
            let a = generate_test_matrix(&MatrixSource::mesh_2d(nx, ny)).unwrap().matrix;
            let (a, _) = diagonal_scale(&a).unwrap();
            let s = spectral_metrics(&a, 1e-10).unwrap();
            assert_eq!(s.method, SpectrumMethod::Iterative);
            let (lo, hi) = dense_extreme_singular_values(&a.to_dense());
            assert!(rel(s.sigma_min, lo) < 1e-8, "{} vs {lo}", s.sigma_min);
            assert!(rel(s.sigma_max, hi) < 1e-8, "{} vs {hi}", s.sigma_max);
        }
    }

    #[test]
    fn dense_iterative_path_matches_svd() {
        let a = generate_test_matrix(&MatrixSource::mesh_2d(16, 32)).unwrap().matrix;
        let d = diagonal_scale(&a).unwrap().0.to_dense();
        let s = spectral_metrics_dense(&d, 1e-10).unwrap();
        let (lo, hi) = dense_extreme_singular_values(&d);
        assert!(rel(s.sigma_min, lo) < 1e-8);
        assert!(rel(s.sigma_max, hi) < 1e-8);
    }

    #[test]
    fn deterministic() {
        let a = generate_test_matrix(&MatrixSource::mesh_2d(32, 16)).unwrap().matrix;
        let s1 = spectral_metrics(&a, 1e-10).unwrap();
        let s2 = spectral_metrics(&a, 1e-10).unwrap();
        assert_eq!(s1, s2);
    }
}
