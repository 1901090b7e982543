//! Toeplitz approximate inverse.
//!
//! `A` is replaced by the Toeplitz matrix `Â` holding the mean of each of its
//! diagonals, and a single row system shared by every row of `P` is solved:
//! with `p_u` the entry of `P` on offset `u`, `sum_u p_u â_(d-u) = delta_d0`
//! for every offset `d` in the pattern of `P`.

use std::collections::{BTreeMap, BTreeSet};

use nalgebra::DMatrix;

use super::spai::RCOND_MIN;
use crate::error::{Error, Result};
use crate::matcore::BandedMatrix;

#[derive(Clone, Debug)]
pub struct Tpai {
    pub p: BandedMatrix,
    /// Offset to value of the shared Toeplitz row.
    pub coefficients: BTreeMap<i64, f64>,
    /// Diagonal means of the input.
    pub a_hat: BTreeMap<i64, f64>,
}

/// Arithmetic mean of every stored diagonal.
pub fn toeplitz_average(a: &BandedMatrix) -> BTreeMap<i64, f64> {
    a.diagonals()
        .iter()
        .map(|(&k, v)| (k, v.iter().sum::<f64>() / v.len() as f64))
        .collect()
}

/// TPAI pattern: every offset of `base` widened by `level` on each side,
/// clipped to the matrix.
pub fn tpai_offsets(base: &[i64], level: usize, n: usize) -> BTreeSet<i64> {
    let l = level as i64;
    base.iter()
        .flat_map(|&k| (k - l)..=(k + l))
        .filter(|k| k.unsigned_abs() < n as u64)
        .collect()
}

/// Solves the shared row system on `offsets` by LU.
pub fn toeplitz_row_solve(
    a_hat: &BTreeMap<i64, f64>,
    offsets: &BTreeSet<i64>,
) -> Result<BTreeMap<i64, f64>> {
    let offs: Vec<i64> = offsets.iter().copied().collect();
    let s = offs.len();
    let centre = offs
        .iter()
        .position(|&d| d == 0)
        .ok_or_else(|| Error::InvalidArgument("TPAI pattern must contain offset 0".into()))?;
    let mut m = DMatrix::zeros(s, s);
    for (r, &d) in offs.iter().enumerate() {
        for (c, &u) in offs.iter().enumerate() {
            m[(r, c)] = a_hat.get(&(d - u)).copied().unwrap_or(0.0);
        }
    }
    let singular = |rcond| Error::SingularReducedSystem { row: 0, rcond };
    let lu = m.clone().lu();
    let inv = lu.try_inverse().ok_or_else(|| singular(0.0))?;
    let rcond = 1.0 / (norm1(&m) * norm1(&inv));
    if !(rcond >= RCOND_MIN) {
        return Err(singular(rcond));
    }
    let mut rhs = nalgebra::DVector::zeros(s);
    rhs[centre] = 1.0;
    let p = m.lu().solve(&rhs).ok_or_else(|| singular(rcond))?;
    Ok(offs.into_iter().zip(p.iter().copied()).collect())
}

fn norm1(m: &DMatrix<f64>) -> f64 {
    m.column_iter().map(|c| c.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max)
}

/// TPAI of a diagonally scaled matrix at infill `level`.
pub fn tpai(a: &BandedMatrix, level: usize) -> Result<Tpai> {
    let unit = a
        .diagonal(0)
        .is_some_and(|d| d.iter().all(|&v| (v - 1.0).abs() <= 1e-12));
    if !unit {
        return Err(Error::InvalidArgument(
            "TPAI expects a diagonally scaled matrix (unit main diagonal)".into(),
        ));
    }
    let a_hat = toeplitz_average(a);
    let offsets = tpai_offsets(&a.offsets(), level, a.n());
    let coefficients = toeplitz_row_solve(&a_hat, &offsets)?;
    let p = BandedMatrix::toeplitz(a.n(), &coefficients)?;
    Ok(Tpai {
        p,
        coefficients,
        a_hat,
    })
}

/// Closed-form inverse row for tridiagonal `Â` with sub-diagonal `a`, main
/// `b` and super-diagonal `c`. Returns the entries on offsets `+1, 0, -1`.
pub fn tridiagonal_closed_form(a: f64, b: f64, c: f64) -> [f64; 3] {
    let bi = b / (b * b - 2.0 * a * c);
    [-a * bi / b, bi, -c * bi / b]
}

/// Closed-form pentadiagonal inverse row for tridiagonal `Â`. Returns the
/// entries on offsets `+2, +1, 0, -1, -2`.
pub fn pentadiagonal_closed_form(a: f64, b: f64, c: f64) -> [f64; 5] {
    let d = b.powi(5) - 4.0 * a * b.powi(3) * c + 3.0 * a * a * b * c * c;
    [
        (a * a * b * b - a.powi(3) * c) / d,
        (-a * b.powi(3) + a * a * b * c) / d,
        (b.powi(4) - 2.0 * a * b * b * c + a * a * c * c) / d,
        (-b.powi(3) * c + a * b * c * c) / d,
        (b * b * c * c - a * c.powi(3)) / d,
    ]
}
