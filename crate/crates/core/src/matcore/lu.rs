//! LU factorisation with partial pivoting in band storage.
//!
//! Row `p` of the working array covers columns `p - kl ..= p + kl + ku`, which
//! leaves room for the fill that row interchanges introduce above the band.

use super::banded::BandedMatrix;
use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct BandLu {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    data: Vec<f64>,
    pivots: Vec<usize>,
    multipliers: Vec<f64>,
}

impl BandLu {
    pub fn factor(a: &BandedMatrix) -> Result<Self> {
        let n = a.n();
        let (kl, ku) = a.bandwidths();
        let width = 2 * kl + ku + 1;
        let mut lu = Self {
            n,
            kl,
            ku,
            width,
            data: vec![0.0; n * width],
            pivots: vec![0; n],
            multipliers: vec![0.0; n * kl],
        };
        for (r, c, v) in a.entries() {
            let i = lu.idx(r, c);
            lu.data[i] = v;
        }
        let scale = a.max_abs();
        if scale == 0.0 {
            return Err(Error::Singular("zero matrix".into()));
        }
        let tiny = f64::EPSILON * scale;
        let upper = kl + ku;

        for r in 0..n {
            let last_row = (r + kl).min(n - 1);
            let last_col = (r + upper).min(n - 1);
            let mut best = r;
            let mut best_abs = lu.data[lu.idx(r, r)].abs();
            for p in r + 1..=last_row {
                let v = lu.data[lu.idx(p, r)].abs();
                if v > best_abs {
                    best = p;
                    best_abs = v;
                }
            }
            if best_abs <= tiny {
                return Err(Error::Singular(format!("pivot {r} is {best_abs:e}")));
            }
            lu.pivots[r] = best;
            if best != r {
                for c in r..=last_col {
                    let (i, j) = (lu.idx(r, c), lu.idx(best, c));
                    lu.data.swap(i, j);
                }
            }
            let pivot = lu.data[lu.idx(r, r)];
            for p in r + 1..=last_row {
                let ip = lu.idx(p, r);
                let l = lu.data[ip] / pivot;
                lu.data[ip] = 0.0;
                lu.multipliers[r * kl + (p - r - 1)] = l;
                if l == 0.0 {
                    continue;
                }
                for c in r + 1..=last_col {
                    let src = lu.data[lu.idx(r, c)];
                    let dst = lu.idx(p, c);
                    lu.data[dst] -= l * src;
                }
            }
        }
        Ok(lu)
    }

    #[inline]
    fn idx(&self, row: usize, col: usize) -> usize {
        debug_assert!(col + self.kl >= row && col <= row + self.kl + self.ku);
        row * self.width + (col + self.kl - row)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Solves `A x = b`.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        assert_eq!(b.len(), self.n);
        let mut x = b.to_vec();
        let kl = self.kl;
        for r in 0..self.n {
            x.swap(r, self.pivots[r]);
            let xr = x[r];
            for p in r + 1..=(r + kl).min(self.n - 1) {
                x[p] -= self.multipliers[r * kl + (p - r - 1)] * xr;
            }
        }
        let upper = self.kl + self.ku;
        for r in (0..self.n).rev() {
            let mut acc = x[r];
            for c in r + 1..=(r + upper).min(self.n - 1) {
                acc -= self.data[self.idx(r, c)] * x[c];
            }
            x[r] = acc / self.data[self.idx(r, r)];
        }
        x
    }

    /// Solves `A^T x = b`.
    pub fn solve_transpose(&self, b: &[f64]) -> Vec<f64> {
        assert_eq!(b.len(), self.n);
        let mut x = b.to_vec();
        let upper = self.kl + self.ku;
        // U^T y = b
        for r in 0..self.n {
            let mut acc = x[r];
            for c in r.saturating_sub(upper)..r {
                acc -= self.data[self.idx(c, r)] * x[c];
            }
            x[r] = acc / self.data[self.idx(r, r)];
        }
        let kl = self.kl;
        for r in (0..self.n).rev() {
            let mut acc = x[r];
            for p in r + 1..=(r + kl).min(self.n - 1) {
                acc -= self.multipliers[r * kl + (p - r - 1)] * x[p];
            }
            x[r] = acc;
            x.swap(r, self.pivots[r]);
        }
        x
    }
}

/// Solves `A x = b` for a banded `A`.
pub fn solve_banded(a: &BandedMatrix, b: &[f64]) -> Result<Vec<f64>> {
    if b.len() != a.n() {
        return Err(Error::DimensionMismatch(format!("rhs {} vs {}", b.len(), a.n())));
    }
    Ok(BandLu::factor(a)?.solve(b))
}
