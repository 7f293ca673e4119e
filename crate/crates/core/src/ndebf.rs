//! The naive surrogate of the factorisation driver: one encoder column per
//! iteration, taken from the largest cluster of partial supports only.

use std::time::Instant;

use crate::debf::{
    decode_all, match_groups, redecode_unfitted, residual_groups, DebfOptions, ExitReason, ExtractionBatch, Factorisation,
    FactorisationState, IterationTrace, RunError, RunResult, StepParams, SupportGram,
};
use crate::error::Error;
use crate::scalar::Scalar;
use crate::sparse::{residual, SparseCodeMatrix};

/// Adds the largest cluster of the batch as column `η` and returns its size.
///
/// Every batch entry seeds a candidate cluster of itself and the later
/// entries overlapping it in at least `2εd` rows, taken in batch order while
/// the union of their supports stays within `d` rows; the first largest
/// candidate wins.
pub fn maxcluster_and_add<T: Scalar>(
    batch: &ExtractionBatch<T>,
    state: &mut FactorisationState<T>,
    params: &StepParams<T>,
) -> usize {
    state.counters.cluster_calls += 1;
    let bound = params.thresholds().overlap;
    let mut gram = SupportGram::new(&batch.supports);
    let mut in_union = vec![false; batch.supports.rows()];
    let mut best: Vec<usize> = Vec::new();
    for i in 0..batch.len() {
        let partners = gram.partners(i, bound, |j| j > i);
        if partners.len() < best.len() {
            continue;
        }
        let mut union: Vec<usize> = batch.supports.support(i).to_vec();
        for &r in &union {
            in_union[r] = true;
        }
        let mut cluster = vec![i];
        for j in partners {
            let support = batch.supports.support(j);
            let extra = support.iter().filter(|&&r| !in_union[r]).count();
            if union.len() + extra > params.d {
                continue;
            }
            for &r in support {
                if !in_union[r] {
                    in_union[r] = true;
                    union.push(r);
                }
            }
            cluster.push(j);
        }
        for &r in &union {
            in_union[r] = false;
        }
        if cluster.len() > best.len() {
            best = cluster;
        }
    }
    let eta = state.eta;
    if best.is_empty() || !state.ensure_column(eta) {
        return 0;
    }
    for &i in &best {
        state.or_column(eta, batch.supports.support(i));
        state.write_x(eta, batch.origins[i], batch.values[i]);
    }
    best.len()
}

/// Recovers encoder columns one at a time, stopping as soon as the largest
/// cluster fails to reconstruct a complete column. The returned `eta` is the
/// number of columns recovered.
pub fn ndebf_run<T: Scalar>(y: &SparseCodeMatrix<T>, n: usize, opts: &DebfOptions<T>) -> RunResult<T> {
    ndebf_observed(y, n, opts, |_, _| {})
}

/// [`ndebf_run`] with a callback at the start of every iteration.
pub fn ndebf_observed<T: Scalar>(
    y: &SparseCodeMatrix<T>,
    n: usize,
    opts: &DebfOptions<T>,
    mut observe: impl FnMut(&FactorisationState<T>, usize),
) -> RunResult<T> {
    opts.validate()?;
    if n == 0 {
        return Err(Error::InvalidParameter("n must be positive".into()).into());
    }
    let params = opts.step_params();
    let limit = opts.max_iterations.unwrap_or(n + y.cols());
    let mut state = FactorisationState::new(y.rows(), n, y.cols());
    let mut r = residual(y, &state.ahat, &state.xhat, opts.tol)?;
    let mut eta = 0;
    let mut trace = Vec::new();
    let mut iterations = 0;
    let mut run = true;
    let mut limited = false;
    while eta < n && run {
        if iterations == limit {
            limited = true;
            break;
        }
        observe(&state, eta);
        let start = Instant::now();
        iterations += 1;
        let mut batch = ExtractionBatch::new(y.rows());
        for (col, groups) in residual_groups(&r, opts.tol, opts.parallel).into_iter().enumerate() {
            match_groups(groups, &mut state, col, &params, false, &mut batch);
        }
        let p = batch.len();
        if p > 0 {
            state.eta = eta;
            maxcluster_and_add(&batch, &mut state, &params);
            if state.ahat.cardinality(eta) == opts.d {
                decode_all(y, &mut state, &params, opts.parallel);
                redecode_unfitted(y, &mut state, &params, opts.parallel);
                r = residual(y, &state.ahat, &state.xhat, opts.tol)?;
                eta += 1;
            } else {
                run = false;
            }
        } else {
            run = false;
        }
        trace.push(IterationTrace {
            iteration: iterations,
            p,
            eta,
            residual_frobenius: r.frobenius_norm().to_f64_lossy(),
            wall_ms: start.elapsed().as_secs_f64() * 1e3,
        });
    }
    let r = residual(y, &state.ahat, &state.xhat, opts.tol)?;
    let exit = if limited {
        ExitReason::IterationLimit
    } else if r.is_zero() {
        ExitReason::ResidualZero
    } else {
        ExitReason::Stalled
    };
    state.eta = eta;
    let out = Factorisation {
        ahat: state.ahat,
        xhat: state.xhat,
        residual: r,
        iterations,
        eta,
        trace,
        exit,
        dropped_supports: 0,
    };
    if limited {
        return Err(RunError::IterationLimit {
            limit,
            partial: Box::new(out),
        });
    }
    Ok(out)
}
