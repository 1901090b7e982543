//! Banded matrices: storage, generation, I/O, scaling, products and spectra.

pub mod banded;
pub mod generate;
pub mod io;
pub mod lu;
pub mod ops;
pub mod spectrum;

pub use banded::BandedMatrix;
pub use generate::{generate_test_matrix, MatrixSource, SourceKind, TestMatrix};
pub use io::{read_matrix, read_matrix_market, write_matrix, write_matrix_market};
pub use lu::{solve_banded, BandLu};
pub use ops::{
    banded_multiply, default_drop_tol, diagonal_scale, drop_zero_diagonals, kappa_sub,
    max_norm_scale,
};
pub use spectrum::{spectral_metrics, spectral_metrics_dense, Spectrum, SpectrumMethod};
