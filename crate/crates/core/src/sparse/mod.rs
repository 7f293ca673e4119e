//! Sparse binary and real kernels plus the value-frequency primitives the
//! factorisation algorithms are built from.

mod binary;
pub mod io;
mod matrix;
mod vector;

pub use binary::{compare_as_binary, inner_product, BinaryColumnMatrix};
pub use matrix::{accumulate_product, product, residual, residual_column, SparseCodeMatrix};
pub use vector::{frequency, group_values, locations, SparseRealVector, ValueGroup};
