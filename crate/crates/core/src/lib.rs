//! Preconditioning and block encoding of banded linear systems.
//!
//! * [`matcore`]: banded matrices, test-matrix generation, scaling, spectra.
//! * [`precond`]: diagonal scaling, SPAI, Toeplitz and circulant approximate inverses.
//! * [`bencode`]: block-encoding circuits and their subnormalisation.
//! * [`emu`]: statevector emulation and block extraction.
//! * [`trim`]: value binning and equal-angle rotation collapsing.

pub mod error;
pub mod matcore;
pub mod precond;
pub mod bencode;
pub mod emu;
pub mod trim;

pub use error::{Error, Result};
