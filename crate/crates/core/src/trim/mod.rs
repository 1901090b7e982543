//! Trimming of banded block encodings.
//!
//! Entries along each diagonal are snapped to a few representative values
//! ([`filter_matrix`]), which makes many rotation angles coincide. Equal-angle
//! rotations with adjacent control patterns are then fused
//! ([`collapse_rotations`]).

mod bins;
mod collapse;

pub use bins::{bin_values, filter_matrix, filter_matrix_with_bins, Bin};
pub use collapse::{collapse_rotations, ANGLE_TOL};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::bencode::{encode_banded, BlockEncoding, Circuit};
use crate::error::{Error, Result};
use crate::matcore::{solve_banded, BandedMatrix};

/// Bin widths swept by default.
pub const DEFAULT_F_GRID: [f64; 6] = [0.005, 0.01, 0.02, 0.04, 0.08, 0.16];

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrimStats {
    pub f: f64,
    pub unique_angles_before: usize,
    pub unique_angles_after: usize,
    pub rotations_before: usize,
    pub rotations_after: usize,
    pub l2_solution_error: f64,
}

/// Gate counts of both circuits and `|x_f/|x_f| - x/|x||` for the solutions
/// of `A x = b` and `A_f x_f = b`.
pub fn trimming_metrics(
    a: &BandedMatrix,
    a_f: &BandedMatrix,
    b: &[f64],
    before: &Circuit,
    after: &Circuit,
    f: f64,
) -> Result<TrimStats> {
    let x = unit(solve_banded(a, b)?)?;
    let xf = unit(solve_banded(a_f, b)?)?;
    let l2 = x.iter().zip(&xf).map(|(u, v)| (u - v).powi(2)).sum::<f64>().sqrt();
    let (sb, sa) = (before.summary(), after.summary());
    Ok(TrimStats {
        f,
        unique_angles_before: sb.unique_angles,
        unique_angles_after: sa.unique_angles,
        rotations_before: sb.rotations,
        rotations_after: sa.rotations,
        l2_solution_error: l2,
    })
}

fn unit(mut x: Vec<f64>) -> Result<Vec<f64>> {
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if !(norm > 0.0 && norm.is_finite()) {
        return Err(Error::InvalidArgument(format!("cannot normalise a solution of norm {norm}")));
    }
    x.iter_mut().for_each(|v| *v /= norm);
    Ok(x)
}

/// Result of filtering a matrix and collapsing its encoding.
#[derive(Clone, Debug)]
pub struct Trimmed {
    pub filtered: BandedMatrix,
    pub bins: BTreeMap<i64, Vec<Bin>>,
    /// Encoding of the unfiltered matrix, uncollapsed.
    pub before: BlockEncoding,
    /// Encoding of the filtered matrix, collapsed.
    pub after: BlockEncoding,
}

/// Filters `m` at width `f`, encodes it and collapses the rotations.
pub fn trim_encoding(m: &BandedMatrix, f: f64) -> Result<Trimmed> {
    let before = encode_banded(m)?;
    let (filtered, bins) = filter_matrix_with_bins(m, f);
    let mut after = encode_banded(&filtered)?;
    after.circuit = collapse_rotations(&after.circuit);
    after.target = format!("{} trimmed f={f}", after.target);
    Ok(Trimmed {
        filtered,
        bins,
        before,
        after,
    })
}
