use super::banded::{diagonal_len, first_column, BandedMatrix};
use crate::error::{Error, Result};

/// Row scaling by the inverse main diagonal. Returns `(D^-1 A, D)`.
pub fn diagonal_scale(a: &BandedMatrix) -> Result<(BandedMatrix, BandedMatrix)> {
    let d = a.main_diagonal();
    if let Some(row) = d.iter().position(|&v| v == 0.0) {
        return Err(Error::ZeroDiagonal(row));
    }
    let mut scaled = BandedMatrix::zeros(a.n());
    for (&k, values) in a.diagonals() {
        let c0 = first_column(k);
        let v = if k == 0 {
            vec![1.0; values.len()]
        } else {
            values
                .iter()
                .enumerate()
                .map(|(t, &x)| x / d[((c0 + t) as i64 + k) as usize])
                .collect()
        };
        scaled.insert_diagonal(k, v)?;
    }
    Ok((scaled, BandedMatrix::from_diagonal(d)))
}

/// Divides by the largest absolute entry. Returns `(A / r, r)`.
pub fn max_norm_scale(a: &BandedMatrix) -> Result<(BandedMatrix, f64)> {
    let r = a.max_abs();
    if r == 0.0 {
        return Err(Error::ZeroMatrix);
    }
    if r == 1.0 {
        return Ok((a.clone(), 1.0));
    }
    Ok((a.scaled(1.0 / r), r))
}

/// Exact banded product `P A` in `O(N d1 d2)`. Every pairwise offset sum is
/// stored, including diagonals that cancel to zero.
pub fn banded_multiply(p: &BandedMatrix, a: &BandedMatrix) -> Result<BandedMatrix> {
    let n = p.n();
    if a.n() != n {
        return Err(Error::DimensionMismatch(format!("{} vs {}", n, a.n())));
    }
    let mut out = BandedMatrix::zeros(n);
    let mut acc: std::collections::BTreeMap<i64, Vec<f64>> = Default::default();
    for (&u, pv) in p.diagonals() {
        let p0 = first_column(u);
        for (&v, av) in a.diagonals() {
            let w = u + v;
            if w.unsigned_abs() as usize >= n {
                continue;
            }
            let out_d = acc.entry(w).or_insert_with(|| vec![0.0; diagonal_len(n, w)]);
            let w0 = first_column(w);
            let a0 = first_column(v);
            for (t, &x) in av.iter().enumerate() {
                let c = a0 + t;
                let m = (c as i64 + v) as usize;
                // P_u needs an entry in column m
                if m < p0 {
                    continue;
                }
                let pt = m - p0;
                if pt >= pv.len() {
                    continue;
                }
                out_d[c - w0] += pv[pt] * x;
            }
        }
    }
    for (w, values) in acc {
        out.insert_diagonal(w, values)?;
    }
    Ok(out)
}

/// Removes every diagonal whose entries are all within `tol` of zero.
/// Returns the trimmed matrix and the number of diagonals removed.
pub fn drop_zero_diagonals(m: &BandedMatrix, tol: f64) -> (BandedMatrix, usize) {
    let kept: Vec<(i64, Vec<f64>)> = m
        .diagonals()
        .iter()
        .filter(|(_, v)| v.iter().any(|x| x.abs() > tol))
        .map(|(&k, v)| (k, v.clone()))
        .collect();
    let removed = m.num_diagonals() - kept.len();
    let out = BandedMatrix::from_diagonals(m.n(), kept).expect("offsets taken from a valid matrix");
    (out, removed)
}

/// Default drop tolerance: `1e-12` relative to the largest entry.
pub fn default_drop_tol(m: &BandedMatrix) -> f64 {
    1e-12 * m.max_abs()
}

/// Subnormalised condition number `s / sigma_min`.
pub fn kappa_sub(subnorm: f64, sigma_min: f64) -> Result<f64> {
    if !(subnorm > 0.0) || !(sigma_min > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "kappa_sub needs positive inputs, got s = {subnorm}, sigma_min = {sigma_min}"
        )));
    }
    Ok(subnorm / sigma_min)
}
