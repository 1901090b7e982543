//! Sparsity patterns: lattice stencils with their infill extensions, and
//! explicit per-row column sets.

use std::collections::{BTreeSet, VecDeque};

use crate::error::{Error, Result};
use crate::matcore::BandedMatrix;

/// Set of lattice offsets defining the sparsity of one matrix row.
/// Two-dimensional stencils keep the third component at zero.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StencilPattern {
    dim: usize,
    offsets: BTreeSet<[i64; 3]>,
}

impl StencilPattern {
    pub fn five_point() -> Self {
        Self::star(2)
    }

    pub fn seven_point() -> Self {
        Self::star(3)
    }

    fn star(dim: usize) -> Self {
        let mut offsets = BTreeSet::new();
        offsets.insert([0, 0, 0]);
        for axis in 0..dim {
            for s in [-1, 1] {
                let mut o = [0; 3];
                o[axis] = s;
                offsets.insert(o);
            }
        }
        Self { dim, offsets }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn offsets(&self) -> &BTreeSet<[i64; 3]> {
        &self.offsets
    }

    /// Number of lattice offsets, which is the diagonal count on any mesh
    /// wide enough that distinct offsets never alias.
    pub fn len(&self) -> usize {
        self.offsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.offsets.is_empty()
    }

    pub fn contains(&self, o: &[i64; 3]) -> bool {
        self.offsets.contains(o)
    }

    /// Minkowski sum: every pairwise sum of offsets.
    pub fn minkowski(&self, other: &Self) -> Self {
        let mut offsets = BTreeSet::new();
        for a in &self.offsets {
            for b in &other.offsets {
                offsets.insert([a[0] + b[0], a[1] + b[1], a[2] + b[2]]);
            }
        }
        Self {
            dim: self.dim.max(other.dim),
            offsets,
        }
    }

    /// Predicted pattern of `P A` when `self` is the pattern of `P`.
    pub fn product_with(&self, a: &Self) -> Self {
        self.minkowski(a)
    }

    /// Predicted nonzero pattern of `P A` when every row of `P` solves its
    /// reduced system exactly: entries of `P A` inside the pattern of `P` are
    /// zero, except the centre which is one.
    pub fn exact_product_nonzeros(&self, a: &Self) -> Self {
        let full = self.minkowski(a);
        let offsets = full
            .offsets
            .into_iter()
            .filter(|o| *o == [0, 0, 0] || !self.offsets.contains(o))
            .collect();
        Self {
            dim: full.dim,
            offsets,
        }
    }

    /// Banded-matrix offsets (row minus column) on a mesh with the given
    /// dimensions, cells numbered with the first axis fastest.
    pub fn linear_offsets(&self, mesh: &[usize]) -> BTreeSet<i64> {
        let stride = |axis: usize| mesh[..axis].iter().product::<usize>() as i64;
        self.offsets
            .iter()
            .map(|o| -(0..self.dim).map(|ax| o[ax] * stride(ax)).sum::<i64>())
            .collect()
    }
}

/// SPAI infill: the stencil grows by one ring of nodes per level, i.e. the
/// level-`i` pattern is the base stencil summed with itself `i + 1` times.
pub fn infill_pattern(base: &StencilPattern, level: usize) -> Result<StencilPattern> {
    let supported = *base == StencilPattern::five_point() || *base == StencilPattern::seven_point();
    if !supported {
        return Err(Error::UnsupportedStencil(format!(
            "{} offsets in {} dimensions; only the 5-point and 7-point stencils are supported",
            base.len(),
            base.dim()
        )));
    }
    let mut p = base.clone();
    for _ in 0..level {
        p = p.minkowski(base);
    }
    Ok(p)
}

/// Closed-form 2D SPAI diagonal counts `(P, PA, nonzero PA)` at infill `i`.
pub fn spai_diagonal_counts_2d(i: usize) -> (usize, usize, usize) {
    (5 + 2 * i * (i + 3), 5 + 2 * (i + 1) * (i + 4), 9 + 4 * i)
}

/// Explicit sparsity pattern: sorted column indices for each row.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RowPattern {
    rows: Vec<Vec<usize>>,
}

impl RowPattern {
    pub fn new(mut rows: Vec<Vec<usize>>) -> Self {
        for r in &mut rows {
            r.sort_unstable();
            r.dedup();
        }
        Self { rows }
    }

    /// Nonzero structure of `a`.
    pub fn of_matrix(a: &BandedMatrix) -> Self {
        let mut rows = vec![Vec::new(); a.n()];
        for (r, c, v) in a.entries() {
            if v != 0.0 {
                rows[r].push(c);
            }
        }
        Self::new(rows)
    }

    /// Every column within `depth` edges of the row in the graph of `a`.
    /// Depth `i + 1` reproduces the level-`i` stencil infill on lattice
    /// meshes without needing the mesh geometry.
    pub fn graph_distance(a: &BandedMatrix, depth: usize) -> Self {
        let n = a.n();
        let mut adj = vec![Vec::new(); n];
        for (r, c, v) in a.entries() {
            if v != 0.0 && r != c {
                adj[r].push(c);
                adj[c].push(r);
            }
        }
        for l in &mut adj {
            l.sort_unstable();
            l.dedup();
        }
        let mut dist = vec![usize::MAX; n];
        let mut rows = Vec::with_capacity(n);
        let mut queue = VecDeque::new();
        for start in 0..n {
            let mut seen = vec![start];
            dist[start] = 0;
            queue.push_back(start);
            while let Some(u) = queue.pop_front() {
                if dist[u] == depth {
                    continue;
                }
                for &w in &adj[u] {
                    if dist[w] == usize::MAX {
                        dist[w] = dist[u] + 1;
                        seen.push(w);
                        queue.push_back(w);
                    }
                }
            }
            for &s in &seen {
                dist[s] = usize::MAX;
            }
            rows.push(seen);
        }
        Self::new(rows)
    }

    /// Stencil applied at every mesh cell, clipped at the mesh boundary.
    pub fn from_stencil(stencil: &StencilPattern, mesh: &[usize]) -> Result<Self> {
        if mesh.len() != stencil.dim() {
            return Err(Error::DimensionMismatch(format!(
                "{}D stencil on a {}D mesh",
                stencil.dim(),
                mesh.len()
            )));
        }
        let n: usize = mesh.iter().product();
        let mut rows = Vec::with_capacity(n);
        for cell in 0..n {
            let mut coord = [0i64; 3];
            let mut rest = cell;
            for (ax, &d) in mesh.iter().enumerate() {
                coord[ax] = (rest % d) as i64;
                rest /= d;
            }
            let mut cols = Vec::new();
            'offsets: for o in stencil.offsets() {
                let mut idx = 0i64;
                let mut stride = 1i64;
                for (ax, &d) in mesh.iter().enumerate() {
                    let x = coord[ax] + o[ax];
                    if x < 0 || x >= d as i64 {
                        continue 'offsets;
                    }
                    idx += x * stride;
                    stride *= d as i64;
                }
                cols.push(idx as usize);
            }
            rows.push(cols);
        }
        Ok(Self::new(rows))
    }

    pub fn n(&self) -> usize {
        self.rows.len()
    }

    pub fn row(&self, r: usize) -> &[usize] {
        &self.rows[r]
    }

    pub fn contains(&self, r: usize, c: usize) -> bool {
        self.rows[r].binary_search(&c).is_ok()
    }

    /// Distinct banded offsets (row minus column) touched by the pattern.
    pub fn offsets(&self) -> BTreeSet<i64> {
        self.rows
            .iter()
            .enumerate()
            .flat_map(|(r, cols)| cols.iter().map(move |&c| r as i64 - c as i64))
            .collect()
    }

    /// Zeroes every entry of `m` outside the pattern and removes diagonals
    /// left empty.
    pub fn mask(&self, m: &BandedMatrix) -> BandedMatrix {
        let mut out = BandedMatrix::zeros(m.n());
        for (r, c, v) in m.entries() {
            if v != 0.0 && self.contains(r, c) {
                out.add_to(r, c, v);
            }
        }
        out
    }
}
