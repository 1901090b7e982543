//! Sparse approximate inverses minimising `||I - A M||_F`.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::pattern::RowPattern;
use crate::error::{Error, Result};
use crate::matcore::{banded_multiply, BandedMatrix};

/// Reduced systems with a reciprocal condition estimate below this are
/// rejected.
pub const RCOND_MIN: f64 = 1e-14;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpaiMethod {
    Iterative,
    #[default]
    Column,
}

/// Which side the approximate inverse multiplies from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    /// `P A ~ I`, solved row by row.
    Left,
    /// `A M ~ I`, solved column by column.
    Right,
}

/// Column (or row) SPAI: every row `j` of `P` restricted to `pattern.row(j)`
/// solves the square reduced system `m A[J, J] = e_j` exactly.
pub fn spai_column(a: &BandedMatrix, pattern: &RowPattern, side: Side) -> Result<BandedMatrix> {
    let n = a.n();
    if pattern.n() != n {
        return Err(Error::DimensionMismatch(format!(
            "pattern has {} rows, matrix {}",
            pattern.n(),
            n
        )));
    }
    let rows: Vec<Vec<(usize, f64)>> = (0..n)
        .into_par_iter()
        .map(|j| solve_reduced(a, pattern.row(j), j, side))
        .collect::<Result<_>>()?;
    let mut p = BandedMatrix::zeros(n);
    for (j, row) in rows.into_iter().enumerate() {
        for (k, v) in row {
            match side {
                Side::Left => p.add_to(j, k, v),
                Side::Right => p.add_to(k, j, v),
            }
        }
    }
    Ok(p)
}

/// Left SPAI with the level-`i` infill pattern taken from the graph of `a`.
pub fn spai_infill(a: &BandedMatrix, level: usize) -> Result<BandedMatrix> {
    spai_column(a, &RowPattern::graph_distance(a, level + 1), Side::Left)
}

fn solve_reduced(a: &BandedMatrix, cols: &[usize], j: usize, side: Side) -> Result<Vec<(usize, f64)>> {
    let pos = cols.binary_search(&j).map_err(|_| {
        Error::InvalidArgument(format!("pattern row {j} does not contain its diagonal"))
    })?;
    let s = cols.len();
    let reduced = DMatrix::from_fn(s, s, |r, c| a.get(cols[r], cols[c]));
    let singular = |rcond: f64| Error::SingularReducedSystem { row: j, rcond };
    let inv = reduced.clone().try_inverse().ok_or_else(|| singular(0.0))?;
    let rcond = 1.0 / (norm1(&reduced) * norm1(&inv));
    if !(rcond >= RCOND_MIN) {
        return Err(singular(rcond));
    }
    // m A = e_pos  =>  m = row pos of A^-1;  A m = e_pos  =>  m = column pos
    let m: Vec<f64> = match side {
        Side::Left => inv.row(pos).iter().copied().collect(),
        Side::Right => inv.column(pos).iter().copied().collect(),
    };
    Ok(cols.iter().copied().zip(m).collect())
}

fn norm1(m: &DMatrix<f64>) -> f64 {
    m.column_iter().map(|c| c.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max)
}

/// Residual of one reduced system, `||m A[J,J] - e_j||_inf` (left form).
pub fn reduced_residual(a: &BandedMatrix, p: &BandedMatrix, cols: &[usize], j: usize) -> f64 {
    let s = cols.len();
    let reduced = DMatrix::from_fn(s, s, |r, c| a.get(cols[r], cols[c]));
    let m = DVector::from_iterator(s, cols.iter().map(|&c| p.get(j, c)));
    let r = reduced.tr_mul(&m);
    cols.iter()
        .zip(r.iter())
        .map(|(&c, &v)| (v - if c == j { 1.0 } else { 0.0 }).abs())
        .fold(0.0, f64::max)
}

/// Where numerical dropping is applied in the iterative method.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DropTarget {
    /// Drop entries of `M_k` after each update.
    #[default]
    M,
    /// Drop entries of the search direction `G_k` before the update.
    G,
}

#[derive(Clone, Debug)]
pub struct SpaiIteration {
    pub m: BandedMatrix,
    /// `||I - A M_k||_F` for every accepted iterate, starting with `M_0`.
    pub residuals: Vec<f64>,
}

impl SpaiIteration {
    pub fn iterations(&self) -> usize {
        self.residuals.len() - 1
    }
}

/// Global minimal-residual descent for a right approximate inverse `M`.
///
/// Starts from `M_0 = a0 A^T` with `a0 = ||A||_F / ||A A^T||_F`, and takes
/// steps `M + alpha G` along `G = I - A M` (optionally dropped to `pattern`).
/// The loop stops after `k_max` steps, at a stationary point, or when a
/// dropped update fails to reduce the residual.
pub fn spai_iterative(
    a: &BandedMatrix,
    pattern: Option<&RowPattern>,
    k_max: usize,
    drop: DropTarget,
) -> Result<SpaiIteration> {
    let n = a.n();
    if k_max == 0 {
        return Err(Error::InvalidArgument("k_max must be at least 1".into()));
    }
    if pattern.is_some_and(|p| p.n() != n) {
        return Err(Error::DimensionMismatch("pattern size".into()));
    }
    let at = a.transpose();
    let aat = banded_multiply(a, &at)?;
    let denom = aat.frobenius_norm();
    if denom == 0.0 {
        return Err(Error::ZeroMatrix);
    }
    let mask = |m: &BandedMatrix| pattern.map_or_else(|| m.clone(), |p| p.mask(m));
    let mut m = mask(&at.scaled(a.frobenius_norm() / denom));
    let identity = BandedMatrix::identity(n);
    let residual = |m: &BandedMatrix| -> Result<BandedMatrix> {
        identity.add_scaled(-1.0, &banded_multiply(a, m)?)
    };
    let mut r = residual(&m)?;
    let mut residuals = vec![r.frobenius_norm()];

    for _ in 0..k_max {
        let g = match drop {
            DropTarget::M => r.clone(),
            DropTarget::G => mask(&r),
        };
        let ag = banded_multiply(a, &g)?;
        let ag2 = frobenius_dot(&ag, &ag);
        if ag2 == 0.0 {
            break;
        }
        let alpha = frobenius_dot(&r, &ag) / ag2;
        let mut next = m.add_scaled(alpha, &g)?;
        if drop == DropTarget::M {
            next = mask(&next);
        }
        let r_next = residual(&next)?;
        let norm = r_next.frobenius_norm();
        if norm >= *residuals.last().expect("non-empty") {
            break;
        }
        m = next;
        r = r_next;
        residuals.push(norm);
    }
    Ok(SpaiIteration { m, residuals })
}

/// Frobenius inner product of two banded matrices.
pub fn frobenius_dot(x: &BandedMatrix, y: &BandedMatrix) -> f64 {
    x.diagonals()
        .iter()
        .filter_map(|(k, xv)| y.diagonal(*k).map(|yv| xv.iter().zip(yv).map(|(p, q)| p * q).sum::<f64>()))
        .sum()
}
