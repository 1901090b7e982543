//! Block-encoding circuits and their subnormalisation.

pub mod circuit;
pub mod encode;
pub mod preamp;

pub use circuit::{Circuit, ControlPattern, Gate, GateSummary};
pub use encode::{
    encode_banded, encode_clai_product, encode_toeplitz, max_amplification, multiply_encodings,
    BlockEncoding, RegisterLayout,
};
pub use preamp::{preamp_figure_of_merit, FigureOfMerit, PreampParams};
