//! Blind factorisation of measurements `Y = A X`, where `A` is the sparse
//! binary adjacency matrix of an expander graph and `X` is column-sparse,
//! recovering both factors up to a column permutation.
//!
//! Everything is generic over the [`Scalar`] type (`f32` or `f64`); the
//! aliases below fix `f64`.

pub mod debf;
pub mod encoder;
pub mod error;
pub mod harness;
pub mod ndebf;
pub mod psb;
pub mod rng;
pub mod scalar;
pub mod sparse;
pub mod thresholds;
pub mod verify;

pub use debf::{
    cluster_and_add, debf_continue, debf_observed, debf_run, decode, extract_and_match, merge_pass, DebfOptions,
    ExitReason, ExtractionBatch, Factorisation, FactorisationState, IterationTrace, RunError, StepParams,
};
pub use encoder::{
    expansion_oracle, generate_encoder, order_columns, overlap_bound_check, unique_neighbour_count, Direction,
    EncoderParams, EnumerationLimits,
};
pub use error::{Error, Result};
pub use harness::{run_grid, run_trial, GridConfig, Settings, StreamIngest, TrialConfig, TrialResult};
pub use ndebf::{maxcluster_and_add, ndebf_run};
pub use psb::{sample_instance, sample_size_bound, verify_dissociated, PsbInstance, PsbParams};
pub use scalar::Scalar;
pub use sparse::{BinaryColumnMatrix, SparseCodeMatrix, SparseRealVector};
pub use verify::{
    exact_recovery, match_up_to_permutation, singleton_bound_check, uniqueness_certificate, PermutationMatch,
};

pub type RealVector = SparseRealVector<f64>;
pub type CodeMatrix = SparseCodeMatrix<f64>;
pub type State = FactorisationState<f64>;
pub type Batch = ExtractionBatch<f64>;
pub type Output = Factorisation<f64>;
pub type Instance = PsbInstance<f64>;
pub type Options = DebfOptions<f64>;
