//! Synthetic pressure-correction style test matrices on structured meshes.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use super::banded::BandedMatrix;
use super::io::read_matrix_market;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SourceKind {
    #[serde(rename = "generated-2d-pressure")]
    Generated2dPressure,
    #[serde(rename = "generated-3d-laplacian")]
    Generated3dLaplacian,
    MatrixMarketFile,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixSource {
    pub kind: SourceKind,
    #[serde(default)]
    pub dims: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
}

impl MatrixSource {
    pub fn mesh_2d(nx: usize, ny: usize) -> Self {
        Self {
            kind: SourceKind::Generated2dPressure,
            dims: vec![nx, ny],
            path: None,
        }
    }

    pub fn mesh_3d(nx: usize, ny: usize, nz: usize) -> Self {
        Self {
            kind: SourceKind::Generated3dLaplacian,
            dims: vec![nx, ny, nz],
            path: None,
        }
    }

    pub fn file(path: impl Into<PathBuf>) -> Self {
        Self {
            kind: SourceKind::MatrixMarketFile,
            dims: Vec::new(),
            path: Some(path.into()),
        }
    }

    /// Short human-readable label, e.g. `2d-32x32`.
    pub fn label(&self) -> String {
        let dims = self
            .dims
            .iter()
            .map(usize::to_string)
            .collect::<Vec<_>>()
            .join("x");
        match self.kind {
            SourceKind::Generated2dPressure => format!("2d-{dims}"),
            SourceKind::Generated3dLaplacian => format!("3d-{dims}"),
            SourceKind::MatrixMarketFile => self
                .path
                .as_ref()
                .map(|p| p.display().to_string())
                .unwrap_or_else(|| "mtx".into()),
        }
    }
}

/// A generated or ingested matrix together with its provenance.
#[derive(Clone, Debug)]
pub struct TestMatrix {
    pub matrix: BandedMatrix,
    /// Mesh dimensions for generated matrices, `None` for files.
    pub mesh: Option<Vec<usize>>,
    /// Non-fatal observations, e.g. a dimension that is not a power of two.
    pub warnings: Vec<String>,
}

/// Builds the requested test matrix.
///
/// The 2D kind is the 5-point mass-conservation stencil (4 in the interior, 3
/// on edges, 2 in corners, -1 off the diagonal) and the 3D kind the analogous
/// 7-point stencil. Cell `(0, 0[, 0])` gets `+1` on its diagonal so the
/// matrix is nonsingular; every other row sums to zero.
pub fn generate_test_matrix(source: &MatrixSource) -> Result<TestMatrix> {
    let (matrix, mesh) = match source.kind {
        SourceKind::Generated2dPressure => {
            check_dims(&source.dims, 2)?;
            (stencil_matrix(&source.dims), Some(source.dims.clone()))
        }
        SourceKind::Generated3dLaplacian => {
            check_dims(&source.dims, 3)?;
            (stencil_matrix(&source.dims), Some(source.dims.clone()))
        }
        SourceKind::MatrixMarketFile => {
            let path = source.path.as_ref().ok_or_else(|| {
                Error::InvalidArgument("matrix-market source needs a path".into())
            })?;
            (read_matrix_market(path)?, None)
        }
    };
    let mut warnings = Vec::new();
    if !matrix.n().is_power_of_two() {
        warnings.push(format!(
            "dimension {} is not a power of two; block encoding will reject it",
            matrix.n()
        ));
    }
    Ok(TestMatrix {
        matrix,
        mesh,
        warnings,
    })
}

fn check_dims(dims: &[usize], expected: usize) -> Result<()> {
    if dims.len() != expected {
        return Err(Error::InvalidArgument(format!(
            "expected {expected} mesh dimensions, got {}",
            dims.len()
        )));
    }
    if let Some(d) = dims.iter().find(|&&d| d < 2) {
        return Err(Error::InvalidArgument(format!(
            "mesh dimension {d} is below the minimum of 2"
        )));
    }
    Ok(())
}

fn stencil_matrix(dims: &[usize]) -> BandedMatrix {
    let n: usize = dims.iter().product();
    let strides: Vec<usize> = dims
        .iter()
        .scan(1usize, |acc, &d| {
            let s = *acc;
            *acc *= d;
            Some(s)
        })
        .collect();
    let mut m = BandedMatrix::zeros(n);
    for cell in 0..n {
        let mut degree = 0.0;
        for (axis, &stride) in strides.iter().enumerate() {
            let coord = (cell / stride) % dims[axis];
            if coord > 0 {
                m.add_to(cell, cell - stride, -1.0);
                degree += 1.0;
            }
            if coord + 1 < dims[axis] {
                m.add_to(cell, cell + stride, -1.0);
                degree += 1.0;
            }
        }
        if cell == 0 {
            degree += 1.0;
        }
        m.add_to(cell, cell, degree);
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent dense assembly by explicit neighbour enumeration.
    fn brute_force_3d(nx: usize, ny: usize, nz: usize) -> nalgebra::DMatrix<f64> {
        let n = nx * ny * nz;
        let idx = |x: usize, y: usize, z: usize| x + nx * (y + ny * z);
        let mut d = nalgebra::DMatrix::zeros(n, n);
        for z in 0..nz {
            for y in 0..ny {
                for x in 0..nx {
                    let me = idx(x, y, z);
                    let mut nbrs = Vec::new();
                    if x > 0 { nbrs.push(idx(x - 1, y, z)); }
                    if x + 1 < nx { nbrs.push(idx(x + 1, y, z)); }
                    if y > 0 { nbrs.push(idx(x, y - 1, z)); }
                    if y + 1 < ny { nbrs.push(idx(x, y + 1, z)); }
                    if z > 0 { nbrs.push(idx(x, y, z - 1)); }
                    if z + 1 < nz { nbrs.push(idx(x, y, z + 1)); }
                    for &nb in &nbrs {
                        d[(me, nb)] = -1.0;
                    }
                    d[(me, me)] = nbrs.len() as f64 + if me == 0 { 1.0 } else { 0.0 };
                }
            }
        }
        d
    }

    #[test]
    fn mesh_4x4_is_pentadiagonal() {
        let t = generate_test_matrix(&MatrixSource::mesh_2d(4, 4)).unwrap();
        assert_eq!(t.matrix.n(), 16);
        assert_eq!(t.matrix.offsets(), vec![-4, -1, 0, 1, 4]);
        assert!(t.warnings.is_empty());
        let diag = t.matrix.main_diagonal();
        assert_eq!(diag[5], 4.0); // interior
        assert_eq!(diag[1], 3.0); // edge
        assert_eq!(diag[15], 2.0); // corner
        assert_eq!(diag[0], 3.0); // reference corner
    }

    #[test]
    fn mesh_2x2_rows_sum_to_zero_except_reference() {
        let m = generate_test_matrix(&MatrixSource::mesh_2d(2, 2)).unwrap().matrix;
        let sums = m.mul_vec(&[1.0; 4]);
        assert_eq!(sums, vec![1.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn mesh_4x4x4_matches_brute_force() {
        let t = generate_test_matrix(&MatrixSource::mesh_3d(4, 4, 4)).unwrap();
        assert_eq!(t.matrix.n(), 64);
        assert_eq!(t.matrix.offsets(), vec![-16, -4, -1, 0, 1, 4, 16]);
        assert_eq!(t.matrix.to_dense(), brute_force_3d(4, 4, 4));
    }

    #[test]
    fn rejects_small_dims_and_flags_non_power_of_two() {
        assert!(generate_test_matrix(&MatrixSource::mesh_2d(1, 4)).is_err());
        assert!(generate_test_matrix(&MatrixSource {
            kind: SourceKind::Generated2dPressure,
            dims: vec![4],
            path: None
        })
        .is_err());
        let t = generate_test_matrix(&MatrixSource::mesh_2d(3, 4)).unwrap();
        assert_eq!(t.warnings.len(), 1);
    }

    #[test]
    fn source_json_uses_kebab_case() {
        let s = serde_json::to_string(&MatrixSource::mesh_2d(4, 4)).unwrap();
        assert_eq!(s, r#"{"kind":"generated-2d-pressure","dims":[4,4]}"#);
    }
}
