//! Square matrices stored as a map from diagonal offset to the values along
//! that diagonal.
//!
//! Offsets follow the row-minus-column convention: offset `k` holds the
//! entries `(c + k, c)`, so positive offsets are sub-diagonals and negative
//! offsets are super-diagonals. The values of a diagonal are stored in column
//! order: index `t` of diagonal `k` is column `t + max(0, -k)`.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BandedJson", into = "BandedJson")]
pub struct BandedMatrix {
    n: usize,
    diagonals: BTreeMap<i64, Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
struct DiagonalJson {
    offset: i64,
    values: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct BandedJson {
    n: usize,
    diagonals: Vec<DiagonalJson>,
}

impl TryFrom<BandedJson> for BandedMatrix {
    type Error = Error;

    fn try_from(json: BandedJson) -> Result<Self> {
        BandedMatrix::from_diagonals(
            json.n,
            json.diagonals.into_iter().map(|d| (d.offset, d.values)),
        )
    }
}

impl From<BandedMatrix> for BandedJson {
    fn from(m: BandedMatrix) -> Self {
        BandedJson {
            n: m.n,
            diagonals: m
                .diagonals
                .into_iter()
                .map(|(offset, values)| DiagonalJson { offset, values })
                .collect(),
        }
    }
}

/// Length of diagonal `k` in an `n x n` matrix.
#[inline]
pub fn diagonal_len(n: usize, k: i64) -> usize {
    n.saturating_sub(k.unsigned_abs() as usize)
}

/// First column touched by diagonal `k`.
#[inline]
pub fn first_column(k: i64) -> usize {
    if k < 0 {
        (-k) as usize
    } else {
        0
    }
}

impl BandedMatrix {
    /// An `n x n` matrix with no stored diagonals.
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            diagonals: BTreeMap::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        m.diagonals.insert(0, vec![1.0; n]);
        m
    }

    pub fn from_diagonal(values: Vec<f64>) -> Self {
        let n = values.len();
        let mut m = Self::zeros(n);
        m.diagonals.insert(0, values);
        m
    }

    pub fn from_diagonals<I>(n: usize, diagonals: I) -> Result<Self>
    where
        I: IntoIterator<Item = (i64, Vec<f64>)>,
    {
        let mut m = Self::zeros(n);
        for (k, values) in diagonals {
            m.insert_diagonal(k, values)?;
        }
        Ok(m)
    }

    /// Builds the Toeplitz matrix with constant value `t[k]` along diagonal `k`.
    pub fn toeplitz(n: usize, t: &BTreeMap<i64, f64>) -> Result<Self> {
        let mut m = Self::zeros(n);
        for (&k, &v) in t {
            m.insert_diagonal(k, vec![v; diagonal_len(n, k)])?;
        }
        Ok(m)
    }

    /// Keeps every diagonal of `dense` that has at least one nonzero entry.
    pub fn from_dense(dense: &DMatrix<f64>) -> Result<Self> {
        if dense.nrows() != dense.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} is not square",
                dense.nrows(),
                dense.ncols()
            )));
        }
        let n = dense.nrows();
        let mut m = Self::zeros(n);
        for k in -(n as i64 - 1)..=(n as i64 - 1) {
            let c0 = first_column(k);
            let values: Vec<f64> = (0..diagonal_len(n, k))
                .map(|t| {
                    let c = c0 + t;
                    dense[((c as i64 + k) as usize, c)]
                })
                .collect();
            if values.iter().any(|&v| v != 0.0) {
                m.diagonals.insert(k, values);
            }
        }
        Ok(m)
    }

    pub fn insert_diagonal(&mut self, k: i64, values: Vec<f64>) -> Result<()> {
        if k.unsigned_abs() as usize >= self.n.max(1) {
            return Err(Error::OffsetOutOfRange { offset: k, n: self.n });
        }
        let len = diagonal_len(self.n, k);
        if values.len() != len {
            return Err(Error::DimensionMismatch(format!(
                "diagonal {k} needs {len} values, got {}",
                values.len()
            )));
        }
        self.diagonals.insert(k, values);
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn diagonals(&self) -> &BTreeMap<i64, Vec<f64>> {
        &self.diagonals
    }

    pub fn diagonal(&self, k: i64) -> Option<&[f64]> {
        self.diagonals.get(&k).map(Vec::as_slice)
    }

    pub fn num_diagonals(&self) -> usize {
        self.diagonals.len()
    }

    pub fn offsets(&self) -> Vec<i64> {
        self.diagonals.keys().copied().collect()
    }

    /// Largest sub-diagonal and super-diagonal distance, `(lower, upper)`.
    pub fn bandwidths(&self) -> (usize, usize) {
        let lower = self.diagonals.keys().filter(|&&k| k > 0).max().copied().unwrap_or(0);
        let upper = self.diagonals.keys().filter(|&&k| k < 0).min().copied().unwrap_or(0);
        (lower as usize, (-upper) as usize)
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        let k = row as i64 - col as i64;
        self.diagonals
            .get(&k)
            .map(|d| d[col - first_column(k)])
            .unwrap_or(0.0)
    }

    /// Adds `value` to entry `(row, col)`, creating the diagonal if needed.
    pub fn add_to(&mut self, row: usize, col: usize, value: f64) {
        let k = row as i64 - col as i64;
        let n = self.n;
        let d = self
            .diagonals
            .entry(k)
            .or_insert_with(|| vec![0.0; diagonal_len(n, k)]);
        d[col - first_column(k)] += value;
    }

    /// Iterates `(row, col, value)` over every stored entry, zeros included.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.diagonals.iter().flat_map(|(&k, values)| {
            let c0 = first_column(k);
            values.iter().enumerate().map(move |(t, &v)| {
                let c = c0 + t;
                ((c as i64 + k) as usize, c, v)
            })
        })
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut d = DMatrix::zeros(self.n, self.n);
        for (r, c, v) in self.entries() {
            d[(r, c)] = v;
        }
        d
    }

    pub fn transpose(&self) -> Self {
        let diagonals = self
            .diagonals
            .iter()
            .map(|(&k, v)| (-k, v.clone()))
            .collect();
        Self { n: self.n, diagonals }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        let diagonals = self
            .diagonals
            .iter()
            .map(|(&k, v)| (k, v.iter().map(|x| x * factor).collect()))
            .collect();
        Self { n: self.n, diagonals }
    }

    /// `self + alpha * other`; the result stores the union of both offset sets.
    pub fn add_scaled(&self, alpha: f64, other: &Self) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch(format!("{} vs {}", self.n, other.n)));
        }
        let mut out = self.clone();
        for (&k, values) in &other.diagonals {
            let d = out
                .diagonals
                .entry(k)
                .or_insert_with(|| vec![0.0; values.len()]);
            for (x, y) in d.iter_mut().zip(values) {
                *x += alpha * y;
            }
        }
        Ok(out)
    }

    pub fn max_abs(&self) -> f64 {
        self.diagonals
            .values()
            .flat_map(|d| d.iter())
            .fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.diagonals
            .values()
            .flat_map(|d| d.iter())
            .map(|v| v * v)
            .sum::<f64>()
            .sqrt()
    }

    /// `y = M x`
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n, "vector length must match the dimension");
        let mut y = vec![0.0; self.n];
        for (&k, values) in &self.diagonals {
            let c0 = first_column(k);
            for (t, &v) in values.iter().enumerate() {
                let c = c0 + t;
                y[(c as i64 + k) as usize] += v * x[c];
            }
        }
        y
    }

    /// `y = M^T x`
    pub fn tr_mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n, "vector length must match the dimension");
        let mut y = vec![0.0; self.n];
        for (&k, values) in &self.diagonals {
            let c0 = first_column(k);
            for (t, &v) in values.iter().enumerate() {
                let c = c0 + t;
                y[c] += v * x[(c as i64 + k) as usize];
            }
        }
        y
    }

    /// Main-diagonal entries, zero where the diagonal is not stored.
    pub fn main_diagonal(&self) -> Vec<f64> {
        self.diagonals
            .get(&0)
            .cloned()
            .unwrap_or_else(|| vec![0.0; self.n])
    }

    /// Number of stored diagonals that carry at least one nonzero entry.
    pub fn count_nonzero_diagonals(&self) -> usize {
        self.diagonals
            .values()
            .filter(|d| d.iter().any(|&v| v != 0.0))
            .count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tridiag(n: usize) -> BandedMatrix {
        BandedMatrix::from_diagonals(
            n,
            [
                (-1, vec![-1.0; n - 1]),
                (0, vec![2.0; n]),
                (1, (0..n - 1).map(|i| i as f64).collect()),
            ],
        )
        .unwrap()
    }

    #[test]
    fn offsets_follow_row_minus_column() {
        let m = tridiag(4);
        // sub-diagonal: (c + 1, c) carries value c
        assert_eq!(m.get(1, 0), 0.0);
        assert_eq!(m.get(3, 2), 2.0);
        // super-diagonal
        assert_eq!(m.get(0, 1), -1.0);
        assert_eq!(m.get(0, 3), 0.0);
    }

    #[test]
    fn dense_round_trip() {
        let m = tridiag(6);
        let back = BandedMatrix::from_dense(&m.to_dense()).unwrap();
        // diagonal 1 has a leading zero but is nonzero elsewhere, so it survives
        assert_eq!(back, m);
    }

    #[test]
    fn rejects_bad_lengths_and_offsets() {
        assert!(BandedMatrix::from_diagonals(3, [(1, vec![1.0; 3])]).is_err());
        assert!(BandedMatrix::from_diagonals(3, [(3, vec![])]).is_err());
    }

    #[test]
    fn transpose_and_products_match_dense() {
        let m = tridiag(5);
        let x: Vec<f64> = (0..5).map(|i| 1.0 + i as f64).collect();
        let dense = m.to_dense();
        let y = m.mul_vec(&x);
        let yt = m.tr_mul_vec(&x);
        let dx = nalgebra::DVector::from_vec(x);
        let ey = &dense * &dx;
        let eyt = dense.transpose() * &dx;
        for i in 0..5 {
            assert!((y[i] - ey[i]).abs() < 1e-14);
            assert!((yt[i] - eyt[i]).abs() < 1e-14);
        }
        assert_eq!(m.transpose().to_dense(), dense.transpose());
    }

    #[test]
    fn json_layout() {
        let m = BandedMatrix::from_diagonals(2, [(0, vec![1.0, 2.0]), (-1, vec![3.0])]).unwrap();
        let s = serde_json::to_string(&m).unwrap();
        assert_eq!(
            s,
            r#"{"n":2,"diagonals":[{"offset":-1,"values":[3.0]},{"offset":0,"values":[1.0,2.0]}]}"#
        );
        let back: BandedMatrix = serde_json::from_str(&s).unwrap();
        assert_eq!(back, m);
        assert!(serde_json::from_str::<BandedMatrix>(r#"{"n":2,"diagonals":[{"offset":0,"values":[1.0]}]}"#).is_err());
    }
}
