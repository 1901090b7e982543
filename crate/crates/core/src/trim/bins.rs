use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::matcore::BandedMatrix;

/// A group of entries that share one representative value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bin {
    pub lo: f64,
    pub hi: f64,
    pub mid: f64,
    /// Indices into the binned slice, ascending.
    pub members: Vec<usize>,
}

impl Bin {
    /// Mean of the member values, with multiplicity.
    pub fn mean(&self, values: &[f64]) -> f64 {
        self.members.iter().map(|&i| values[i]).sum::<f64>() / self.members.len() as f64
    }
}

/// Distinct magnitude and the indices holding it.
struct Level {
    value: f64,
    indices: Vec<usize>,
}

/// Bins `values` so that each bin spans at most `f` times its mean.
///
/// Positive and negative entries are binned separately on their magnitudes
/// and zeros form their own bin, so no bin straddles zero. A negative `f`
/// is treated as zero. Bins come back ordered by `lo`.
pub fn bin_values(values: &[f64], f: f64) -> Vec<Bin> {
    let f = f.max(0.0);
    let mut pos = Vec::new();
    let mut neg = Vec::new();
    let mut zeros = Vec::new();
    for (i, &v) in values.iter().enumerate() {
        if v > 0.0 {
            pos.push(i);
        } else if v < 0.0 {
            neg.push(i);
        } else {
            zeros.push(i);
        }
    }
    let mut bins = Vec::new();
    for (idx, sign) in [(neg, -1.0), (pos, 1.0)] {
        let levels = levels(values, idx);
        for (a, b) in select_windows(&levels, 0, levels.len(), f) {
            let (lo, hi) = (levels[a].value, levels[b].value);
            let mut members: Vec<usize> = levels[a..=b].iter().flat_map(|l| l.indices.iter().copied()).collect();
            members.sort_unstable();
            let (lo, hi) = if sign < 0.0 { (-hi, -lo) } else { (lo, hi) };
            bins.push(Bin {
                lo,
                hi,
                mid: 0.5 * (lo + hi),
                members,
            });
        }
    }
    if !zeros.is_empty() {
        bins.push(Bin {
            lo: 0.0,
            hi: 0.0,
            mid: 0.0,
            members: zeros,
        });
    }
    bins.sort_by(|x, y| x.lo.total_cmp(&y.lo));
    bins
}

fn levels(values: &[f64], mut idx: Vec<usize>) -> Vec<Level> {
    idx.sort_by(|&i, &j| values[i].abs().total_cmp(&values[j].abs()).then(i.cmp(&j)));
    let mut out: Vec<Level> = Vec::new();
    for i in idx {
        let v = values[i].abs();
        match out.last_mut() {
            Some(l) if l.value == v => l.indices.push(i),
            _ => out.push(Level {
                value: v,
                indices: vec![i],
            }),
        }
    }
    out
}

/// Greedy window selection over `levels[a..b]`, as inclusive level ranges.
///
/// Candidates are the maximal windows starting at each level. The window
/// with the most entries wins (lower start on ties), overlapping candidates
/// are discarded, and any levels left uncovered are binned again on their own.
fn select_windows(levels: &[Level], a: usize, b: usize, f: f64) -> Vec<(usize, usize)> {
    if a >= b {
        return Vec::new();
    }
    let mut cands: Vec<(usize, usize, usize)> = Vec::new();
    let mut reach = None;
    for s in a..b {
        let mut sum = levels[s].value * levels[s].indices.len() as f64;
        let mut count = levels[s].indices.len();
        let mut e = s;
        while e + 1 < b {
            let l = &levels[e + 1];
            let sum2 = sum + l.value * l.indices.len() as f64;
            let count2 = count + l.indices.len();
            if l.value - levels[s].value <= f * sum2 / count2 as f64 {
                e += 1;
                sum = sum2;
                count = count2;
            } else {
                break;
            }
        }
        // windows nested inside an earlier one are not maximal
        if reach.is_none_or(|r| e > r) {
            cands.push((s, e, count));
            reach = Some(e);
        }
    }
    cands.sort_by(|x, y| y.2.cmp(&x.2).then(x.0.cmp(&y.0)));
    let mut covered = vec![false; b - a];
    let mut chosen = Vec::new();
    for (s, e, _) in cands {
        if covered[s - a..=e - a].iter().any(|&c| c) {
            continue;
        }
        covered[s - a..=e - a].iter_mut().for_each(|c| *c = true);
        chosen.push((s, e));
    }
    let mut t = a;
    while t < b {
        if covered[t - a] {
            t += 1;
            continue;
        }
        let start = t;
        while t < b && !covered[t - a] {
            t += 1;
        }
        chosen.extend(select_windows(levels, start, t, f));
    }
    chosen.sort_unstable();
    chosen
}

/// Replaces each entry by its bin midpoint, binning each stored diagonal on
/// its own.
pub fn filter_matrix(m: &BandedMatrix, f: f64) -> BandedMatrix {
    filter_matrix_with_bins(m, f).0
}

/// [`filter_matrix`] together with the bins chosen for each diagonal.
pub fn filter_matrix_with_bins(m: &BandedMatrix, f: f64) -> (BandedMatrix, BTreeMap<i64, Vec<Bin>>) {
    let per_diag: Vec<(i64, Vec<f64>, Vec<Bin>)> = m
        .diagonals()
        .par_iter()
        .map(|(&k, v)| {
            let bins = bin_values(v, f);
            let mut out = v.clone();
            for b in &bins {
                for &i in &b.members {
                    out[i] = b.mid;
                }
            }
            (k, out, bins)
        })
        .collect();
    let mut filtered = BandedMatrix::zeros(m.n());
    let mut all = BTreeMap::new();
    for (k, v, bins) in per_diag {
        filtered
            .insert_diagonal(k, v)
            .expect("diagonal copied from a matrix of the same size");
        all.insert(k, bins);
    }
    (filtered, all)
}
