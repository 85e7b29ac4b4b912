//! Complex matrix kernels, the SVD, and the seeded random source.

mod matrix;
mod rng;
mod svd;

pub use matrix::{CMatrix, ONE, ZERO};
pub use rng::{splitmix64, Rng};
pub use svd::{canonical_pivot, canonicalize_columns, svd, Svd};

pub use num_complex::Complex64;
