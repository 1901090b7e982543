//! Preconditioners for diagonally scaled banded systems: diagonal scaling
//! alone, SPAI, TPAI and CLAI.

pub mod clai;
pub mod pattern;
pub mod spai;
pub mod tpai;

use std::fmt;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

pub use clai::{clai_apply, clai_spectrum, CirculantSpectrum};
pub use pattern::{infill_pattern, spai_diagonal_counts_2d, RowPattern, StencilPattern};
pub use spai::{spai_column, spai_infill, spai_iterative, DropTarget, Side, SpaiIteration, SpaiMethod};
pub use tpai::{pentadiagonal_closed_form, tpai, tridiagonal_closed_form, Tpai};

use crate::error::Result;
use crate::matcore::{banded_multiply, BandedMatrix};

pub const DEFAULT_SPAI_ITERATIONS: usize = 10;

/// Preconditioner selection as it appears in sweep configurations.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum PreconditionerSpec {
    /// Diagonal scaling only.
    #[serde(rename = "DS")]
    Ds,
    #[serde(rename = "SPAI")]
    Spai {
        #[serde(default)]
        method: SpaiMethod,
        #[serde(default)]
        infill_level: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        iterations: Option<usize>,
    },
    #[serde(rename = "TPAI")]
    Tpai {
        #[serde(default)]
        infill_level: usize,
    },
    /// Dense by construction, so it has no infill level.
    #[serde(rename = "CLAI")]
    Clai,
}

impl PreconditionerSpec {
    pub fn spai(infill_level: usize) -> Self {
        Self::Spai {
            method: SpaiMethod::Column,
            infill_level,
            iterations: None,
        }
    }

    pub fn tpai(infill_level: usize) -> Self {
        Self::Tpai { infill_level }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            Self::Ds => "DS",
            Self::Spai { .. } => "SPAI",
            Self::Tpai { .. } => "TPAI",
            Self::Clai => "CLAI",
        }
    }

    pub fn infill(&self) -> Option<usize> {
        match self {
            Self::Spai { infill_level, .. } | Self::Tpai { infill_level } => Some(*infill_level),
            _ => None,
        }
    }

    pub fn method_name(&self) -> &'static str {
        match self {
            Self::Spai {
                method: SpaiMethod::Iterative,
                ..
            } => "iterative",
            Self::Spai { .. } => "column",
            _ => "",
        }
    }
}

impl fmt::Display for PreconditionerSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.infill() {
            Some(i) => write!(f, "{}({i})", self.kind_name()),
            None => f.write_str(self.kind_name()),
        }
    }
}

/// A constructed preconditioner for an already scaled matrix.
#[derive(Clone, Debug)]
pub enum Preconditioner {
    /// Diagonal scaling has already been applied, so `P = I`.
    Identity(usize),
    Banded(BandedMatrix),
    Circulant(CirculantSpectrum),
}

/// Classical product `P A`.
#[derive(Clone, Debug)]
pub enum Product {
    Banded(BandedMatrix),
    Dense(DMatrix<f64>),
}

impl Product {
    pub fn to_dense(&self) -> DMatrix<f64> {
        match self {
            Self::Banded(m) => m.to_dense(),
            Self::Dense(m) => m.clone(),
        }
    }
}

/// Builds the preconditioner for `a`, which must already be diagonally
/// scaled.
pub fn build_preconditioner(spec: &PreconditionerSpec, a: &BandedMatrix) -> Result<Preconditioner> {
    Ok(match spec {
        PreconditionerSpec::Ds => Preconditioner::Identity(a.n()),
        PreconditionerSpec::Spai {
            method: SpaiMethod::Column,
            infill_level,
            ..
        } => Preconditioner::Banded(spai_infill(a, *infill_level)?),
        PreconditionerSpec::Spai {
            method: SpaiMethod::Iterative,
            infill_level,
            iterations,
        } => {
            // ||I - P A||_F = ||I - A^T P^T||_F: run the right-inverse
            // iteration on A^T and transpose. The graph pattern is symmetric.
            let pattern = RowPattern::graph_distance(a, infill_level + 1);
            let k = iterations.unwrap_or(DEFAULT_SPAI_ITERATIONS);
            let it = spai_iterative(&a.transpose(), Some(&pattern), k, DropTarget::M)?;
            Preconditioner::Banded(it.m.transpose())
        }
        PreconditionerSpec::Tpai { infill_level } => Preconditioner::Banded(tpai(a, *infill_level)?.p),
        PreconditionerSpec::Clai => Preconditioner::Circulant(clai_spectrum(a)),
    })
}

impl Preconditioner {
    /// Banded form of `P`, if it has one.
    pub fn banded(&self) -> Option<BandedMatrix> {
        match self {
            Self::Identity(n) => Some(BandedMatrix::identity(*n)),
            Self::Banded(p) => Some(p.clone()),
            Self::Circulant(_) => None,
        }
    }

    /// Classical product `P A`.
    pub fn apply(&self, a: &BandedMatrix) -> Result<Product> {
        Ok(match self {
            Self::Identity(_) => Product::Banded(a.clone()),
            Self::Banded(p) => Product::Banded(banded_multiply(p, a)?),
            Self::Circulant(s) => Product::Dense(clai_apply(s, a)?),
        })
    }
}
