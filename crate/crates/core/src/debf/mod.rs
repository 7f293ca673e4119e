//! Decoder-expander based factorisation.
//!
//! Each driver iteration extracts frequently occurring singleton values from
//! every residual column, matches them against the current encoder
//! reconstruction, clusters the unmatched partial supports into new columns,
//! and decodes every measurement against the complete columns.

mod cluster;
mod decode;
mod extract;
mod merge;
mod state;

use std::collections::HashSet;
use std::time::Instant;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::sparse::{group_values, residual, BinaryColumnMatrix, SparseCodeMatrix, ValueGroup};

pub(crate) use cluster::SupportGram;
pub use cluster::{cluster_and_add, ClusterOutcome};
pub(crate) use decode::{decode_all, redecode_unfitted};
pub use decode::{decode, DecodeOutcome};
pub(crate) use extract::match_groups;
pub use extract::extract_and_match;
pub use merge::merge_pass;
pub use state::{ColumnIndex, ExtractionBatch, FactorisationState, StepCounters, StepParams};

/// Driver configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DebfOptions<T> {
    pub epsilon: f64,
    pub d: usize,
    pub tol: T,
    /// Safeguard on driver iterations; `None` means `n + N`.
    pub max_iterations: Option<usize>,
    /// Run the duplicate-column merge after every iteration.
    pub merge: bool,
    /// Group residual values and decode columns on the rayon pool.
    pub parallel: bool,
}

impl<T: Scalar> DebfOptions<T> {
    /// Known-expansion mode with `ε = 1/6`.
    pub fn new(d: usize) -> Self {
        Self {
            epsilon: 1.0 / 6.0,
            d,
            tol: T::default_tolerance(),
            max_iterations: None,
            merge: false,
            parallel: true,
        }
    }

    /// `ε = 1/6` with the merge pass enabled, for encoders of unknown expansion.
    pub fn practical(d: usize) -> Self {
        Self {
            merge: true,
            ..Self::new(d)
        }
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }

    pub fn with_tol(mut self, tol: T) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_max_iterations(mut self, max: usize) -> Self {
        self.max_iterations = Some(max);
        self
    }

    pub fn with_parallel(mut self, parallel: bool) -> Self {
        self.parallel = parallel;
        self
    }

    pub fn step_params(&self) -> StepParams<T> {
        StepParams {
            epsilon: self.epsilon,
            d: self.d,
            tol: self.tol,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.d == 0 {
            return Err(Error::InvalidParameter("d must be positive".into()));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 0.5) {
            return Err(Error::InvalidParameter(format!(
                "epsilon must lie in (0, 1/2), got {}",
                self.epsilon
            )));
        }
        if !(self.tol >= T::zero()) {
            return Err(Error::InvalidParameter("tol must be non-negative".into()));
        }
        Ok(())
    }
}

/// One row of the per-iteration trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationTrace {
    pub iteration: usize,
    /// Unmatched partial supports handed to clustering.
    pub p: usize,
    /// First zero column of `Â` after the iteration.
    pub eta: usize,
    pub residual_frobenius: f64,
    pub wall_ms: f64,
}

impl IterationTrace {
    pub const CSV_HEADER: &'static str = "iteration,p,eta,residual_frobenius,wall_ms";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{:.3}",
            self.iteration, self.p, self.eta, self.residual_frobenius, self.wall_ms
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitReason {
    ResidualZero,
    /// A full iteration changed nothing.
    Stalled,
    IterationLimit,
}

/// Reconstructions and diagnostics returned by the drivers.
#[derive(Debug, Clone, PartialEq)]
pub struct Factorisation<T> {
    pub ahat: BinaryColumnMatrix,
    pub xhat: SparseCodeMatrix<T>,
    pub residual: SparseCodeMatrix<T>,
    /// Completed driver while-iterations.
    pub iterations: usize,
    /// First zero column of `Â` on exit.
    pub eta: usize,
    pub trace: Vec<IterationTrace>,
    pub exit: ExitReason,
    /// Partial supports discarded because `Â` was full.
    pub dropped_supports: usize,
}

impl<T: Scalar> Factorisation<T> {
    pub fn is_exact_fit(&self) -> bool {
        self.residual.is_zero()
    }

    /// `100 ‖Y - ÂX̂‖_F / ‖Y‖_F`, or 0 for `Y = 0`.
    pub fn residual_pct(&self, y: &SparseCodeMatrix<T>) -> f64 {
        let denom = y.frobenius_norm().to_f64_lossy();
        if denom == 0.0 {
            return 0.0;
        }
        100.0 * self.residual.frobenius_norm().to_f64_lossy() / denom
    }
}

/// Failure of a driver run.
#[derive(Debug, thiserror::Error)]
pub enum RunError<T: Scalar> {
    #[error(transparent)]
    Invalid(#[from] Error),
    #[error("iteration limit {limit} reached before convergence")]
    IterationLimit {
        limit: usize,
        partial: Box<Factorisation<T>>,
    },
}

pub type RunResult<T> = std::result::Result<Factorisation<T>, RunError<T>>;

pub(crate) fn residual_groups<T: Scalar>(r: &SparseCodeMatrix<T>, tol: T, parallel: bool) -> Vec<Vec<ValueGroup<T>>> {
    if parallel {
        r.columns().par_iter().map(|c| group_values(c, tol)).collect()
    } else {
        r.columns().iter().map(|c| group_values(c, tol)).collect()
    }
}

/// Runs driver iterations on `state` until the residual vanishes or an
/// iteration changes nothing, starting from whatever `state` already holds.
///
/// `observe` is called after every iteration with the updated state.
pub fn debf_continue<T: Scalar>(
    y: &SparseCodeMatrix<T>,
    state: &mut FactorisationState<T>,
    opts: &DebfOptions<T>,
    mut observe: impl FnMut(&FactorisationState<T>, &IterationTrace),
) -> RunResult<T> {
    opts.validate()?;
    if y.rows() != state.rows() || y.cols() != state.samples() {
        return Err(Error::Shape(format!(
            "Y is {}x{} but the state expects {}x{}",
            y.rows(),
            y.cols(),
            state.rows(),
            state.samples()
        ))
        .into());
    }
    let params = opts.step_params();
    let width = if state.growable { y.rows() } else { state.ahat.cols() };
    let limit = opts.max_iterations.unwrap_or(width + y.cols());
    let mut r = residual(y, &state.ahat, &state.xhat, opts.tol)?;
    let mut trace = Vec::new();
    let mut iterations = 0;
    let mut dropped = 0;
    let mut released = HashSet::new();
    state.updated = true;
    let exit = loop {
        if r.is_zero() {
            break ExitReason::ResidualZero;
        }
        if !state.updated {
            let unfitted: Vec<bool> = r.columns().iter().map(|c| !c.is_zero()).collect();
            if state.release_unfitted(&unfitted, &mut released) == 0 {
                break ExitReason::Stalled;
            }
            r = residual(y, &state.ahat, &state.xhat, opts.tol)?;
            state.updated = true;
            continue;
        }
        if iterations == limit {
            break ExitReason::IterationLimit;
        }
        let start = Instant::now();
        iterations += 1;
        state.iteration += 1;
        state.updated = false;

        let mut batch = ExtractionBatch::new(y.rows());
        for (col, groups) in residual_groups(&r, opts.tol, opts.parallel).into_iter().enumerate() {
            state.updated |= match_groups(groups, state, col, &params, true, &mut batch);
        }
        let p = batch.len();
        if p > 0 {
            let out = cluster_and_add(&batch, state, &params);
            dropped += out.dropped;
            state.updated |= out.columns_added > 0;
        }
        let decoded = decode_all(y, state, &params, opts.parallel);
        state.updated |= decoded.iter().any(DecodeOutcome::updated);
        state.updated |= redecode_unfitted(y, state, &params, opts.parallel) > 0;
        state.updated |= state.release_unused() > 0;
        if opts.merge {
            state.updated |= merge_pass(state, opts.d) > 0;
        }
        r = residual(y, &state.ahat, &state.xhat, opts.tol)?;

        let row = IterationTrace {
            iteration: iterations,
            p,
            eta: state.eta,
            residual_frobenius: r.frobenius_norm().to_f64_lossy(),
            wall_ms: start.elapsed().as_secs_f64() * 1e3,
        };
        log::debug!(
            "iteration {}: p = {}, eta = {}, residual = {:.6e}",
            row.iteration,
            row.p,
            row.eta,
            row.residual_frobenius
        );
        observe(state, &row);
        trace.push(row);
    };
    let out = Factorisation {
        ahat: state.ahat.clone(),
        xhat: state.xhat.clone(),
        residual: r,
        iterations,
        eta: state.eta,
        trace,
        exit,
        dropped_supports: dropped,
    };
    if exit == ExitReason::IterationLimit {
        return Err(RunError::IterationLimit {
            limit,
            partial: Box::new(out),
        });
    }
    Ok(out)
}

/// Factorises `Y ≈ Â X̂` with an `m x n` binary `Â` of column weight `d`.
pub fn debf_run<T: Scalar>(y: &SparseCodeMatrix<T>, n: usize, opts: &DebfOptions<T>) -> RunResult<T> {
    debf_observed(y, n, opts, |_, _| {})
}

/// [`debf_run`] with a callback after every iteration.
pub fn debf_observed<T: Scalar>(
    y: &SparseCodeMatrix<T>,
    n: usize,
    opts: &DebfOptions<T>,
    observe: impl FnMut(&FactorisationState<T>, &IterationTrace),
) -> RunResult<T> {
    let mut state = FactorisationState::new(y.rows(), n, y.cols());
    debf_continue(y, &mut state, opts, observe)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparse::product;

    #[test]
    fn disjoint_encoder_factorises_in_one_iteration() {
        let a = BinaryColumnMatrix::from_supports(9, vec![vec![0, 1, 2], vec![3, 4, 5], vec![6, 7, 8]]).unwrap();
        let x = SparseCodeMatrix::from_dense(&[vec![1.5, 0.0, 0.0], vec![0.0, 2.5, 0.0], vec![0.0, 0.0, 4.0]]).unwrap();
        let y = product(&a, &x).unwrap();
        let out = debf_run(&y, 3, &DebfOptions::new(3)).unwrap();
        assert_eq!(out.iterations, 1);
        assert_eq!(out.exit, ExitReason::ResidualZero);
        assert_eq!(out.ahat, a);
        assert_eq!(out.xhat, x);
        assert_eq!(out.trace.len(), 1);
        assert_eq!(out.trace[0].p, 3);
    }

    #[test]
    fn zero_input_returns_zero_reconstructions() {
        let y = SparseCodeMatrix::<f64>::zeros(9, 4);
        let out = debf_run(&y, 3, &DebfOptions::new(3)).unwrap();
        assert_eq!(out.iterations, 0);
        assert!(out.xhat.is_zero());
        assert_eq!(out.ahat.nnz(), 0);
        assert_eq!(out.residual_pct(&y), 0.0);
    }

    #[test]
    fn rejects_bad_options() {
        let y = SparseCodeMatrix::<f64>::zeros(9, 4);
        assert!(debf_run(&y, 3, &DebfOptions::new(0)).is_err());
        assert!(debf_run(&y, 3, &DebfOptions::new(3).with_epsilon(0.7)).is_err());
    }

    #[test]
    fn trace_rows_format_as_csv() {
        let row = IterationTrace {
            iteration: 2,
            p: 5,
            eta: 3,
            residual_frobenius: 0.5,
            wall_ms: 1.25,
        };
        assert_eq!(row.csv_row(), "2,5,3,0.5,1.250");
    }
}
