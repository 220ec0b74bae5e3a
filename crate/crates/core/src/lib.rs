//! Finite-dimensional experiments on the Schatten classes `C_p`.
//!
//! * [`matrix`], [`spectral`], [`random`]: dense complex matrices, singular
//!   values, Schatten norms and seeded ensembles.
//! * [`norms`]: the row-norm spaces `Z_p`, their unconditional variants and
//!   the decomposition solver for `1 <= q < 2`.
//! * [`randomized`]: sign patterns and Rademacher averages of Schatten norms.
//! * [`complemented`]: the block-diagonal sign construction and the
//!   projection onto it.
//! * [`embedding`]: rank lower bounds for tight `l_p^k` embeddings.
//! * [`paving`]: balanced bipartitions and iterated `C_p` paving with
//!   certificates.

pub mod complemented;
pub mod embedding;
pub mod error;
pub mod matrix;
pub mod norms;
pub mod paving;
pub mod random;
pub mod randomized;
pub mod spectral;

pub use error::{Error, Result};
pub use matrix::{schur_product, trace_pairing, Matrix};
pub use random::{random_matrix, random_unitary, substream_seed, Ensemble, RandomSpec};
pub use spectral::{
    numeric_rank, operator_norm, psd_trace_power, schatten, schatten_norm, schatten_power,
    singular_values, SchattenExponent,
};

pub use num_complex::Complex64;
