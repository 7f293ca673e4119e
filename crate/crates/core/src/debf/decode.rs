use rayon::prelude::*;

use crate::debf::state::{ColumnIndex, FactorisationState, StepParams};
use crate::scalar::Scalar;
use crate::sparse::{group_values, residual_column, BinaryColumnMatrix, SparseCodeMatrix, SparseRealVector};
use crate::thresholds::at_least;

/// Outcome of decoding one measurement column.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct DecodeOutcome {
    /// Passes that changed `x̂`.
    pub passes: usize,
    /// True when the loop was stopped before it settled, either by the pass
    /// cap or by revisiting an earlier value of `x̂` (after which it could
    /// only cycle until the cap); the column is then left as it was on entry.
    pub capped: bool,
    /// `x̂` differs from its value on entry.
    pub changed: bool,
}

impl DecodeOutcome {
    pub fn updated(&self) -> bool {
        self.changed
    }
}

pub(crate) fn decode_column<T: Scalar>(
    y: &SparseRealVector<T>,
    ahat: &BinaryColumnMatrix,
    index: &ColumnIndex,
    complete: &[bool],
    x: &mut SparseRealVector<T>,
    params: &StepParams<T>,
    scratch: &mut [T],
) -> DecodeOutcome {
    let bound = params.thresholds().overlap;
    let cap = complete.iter().filter(|&&c| c).count() + 1;
    let mut out = DecodeOutcome::default();
    if cap == 1 {
        return out;
    }
    let start = x.clone();
    let mut seen = vec![start.clone()];
    loop {
        let r = residual_column(y, ahat, x, params.tol, scratch);
        if r.is_zero() {
            break;
        }
        let mut chosen: Vec<(usize, usize, T)> = Vec::new();
        for group in group_values(&r, params.tol) {
            if !at_least(group.count(), bound) {
                continue;
            }
            if let Some(((kappa, t), runner_up)) = index.ranked_match(&group.locations, |c| complete[c]) {
                if at_least(t, bound) && runner_up < t {
                    match chosen.iter_mut().find(|(k, _, _)| *k == kappa) {
                        Some(slot) if t > slot.1 => *slot = (kappa, t, group.value),
                        Some(_) => {}
                        None => chosen.push((kappa, t, group.value)),
                    }
                }
            }
        }
        let mut run = false;
        for (kappa, _, value) in chosen {
            run |= x.set(kappa, value);
        }
        if !run {
            break;
        }
        out.passes += 1;
        if out.passes >= cap || seen.contains(x) {
            out.capped = true;
            *x = start.clone();
            break;
        }
        seen.push(x.clone());
    }
    out.changed = *x != start;
    out
}

/// Expander decoding of one column of `Y` against the complete columns of `Â`.
///
/// Repeatedly recomputes the residual and assigns every value occurring at
/// least `2εd` times to the complete column it overlaps most, provided the
/// overlap is also at least `2εd`. Values whose largest overlap is shared by
/// two columns are skipped, and when several values claim the same column in
/// one pass the one with the largest overlap wins. Only column `col` of `X̂`
/// changes.
pub fn decode<T: Scalar>(
    y: &SparseRealVector<T>,
    state: &mut FactorisationState<T>,
    col: usize,
    params: &StepParams<T>,
) -> DecodeOutcome {
    state.counters.decode_calls += 1;
    let complete = state.complete_columns(params.d);
    let mut scratch = vec![T::zero(); y.dim()];
    let FactorisationState { ahat, xhat, index, .. } = state;
    decode_column(y, ahat, index, &complete, xhat.column_mut(col), params, &mut scratch)
}

/// Decodes every column of `Y`; columns are independent so `parallel` only
/// affects scheduling.
pub(crate) fn decode_all<T: Scalar>(
    y: &SparseCodeMatrix<T>,
    state: &mut FactorisationState<T>,
    params: &StepParams<T>,
    parallel: bool,
) -> Vec<DecodeOutcome> {
    state.counters.decode_calls += y.cols();
    let complete = state.complete_columns(params.d);
    let rows = y.rows();
    let FactorisationState { ahat, xhat, index, .. } = state;
    let (ahat, index, complete) = (&*ahat, &*index, &complete[..]);
    let run = |(yc, xc): (&SparseRealVector<T>, &mut SparseRealVector<T>), scratch: &mut Vec<T>| {
        decode_column(yc, ahat, index, complete, xc, params, scratch)
    };
    if parallel {
        y.columns()
            .par_iter()
            .zip(xhat.columns_mut().par_iter_mut())
            .map_init(|| vec![T::zero(); rows], |scratch, pair| run(pair, scratch))
            .collect()
    } else {
        let mut scratch = vec![T::zero(); rows];
        y.columns()
            .iter()
            .zip(xhat.columns_mut().iter_mut())
            .map(|pair| run(pair, &mut scratch))
            .collect()
    }
}

/// Decodes every column that `x̂` does not fit exactly once more, starting
/// from zero, and keeps the fresh code only where it fits. Columns that
/// already fit are untouched. Returns the number of columns repaired.
pub(crate) fn redecode_unfitted<T: Scalar>(
    y: &SparseCodeMatrix<T>,
    state: &mut FactorisationState<T>,
    params: &StepParams<T>,
    parallel: bool,
) -> usize {
    let complete = state.complete_columns(params.d);
    let rows = y.rows();
    let FactorisationState { ahat, xhat, index, .. } = state;
    let (ahat, index, complete) = (&*ahat, &*index, &complete[..]);
    let repair = |(yc, xc): (&SparseRealVector<T>, &mut SparseRealVector<T>), scratch: &mut Vec<T>| {
        if residual_column(yc, ahat, xc, params.tol, scratch).is_zero() {
            return false;
        }
        let mut fresh = SparseRealVector::zeros(xc.dim());
        decode_column(yc, ahat, index, complete, &mut fresh, params, scratch);
        if fresh == *xc || !residual_column(yc, ahat, &fresh, params.tol, scratch).is_zero() {
            return false;
        }
        *xc = fresh;
        true
    };
    let repaired: usize = if parallel {
        y.columns()
            .par_iter()
            .zip(xhat.columns_mut().par_iter_mut())
            .map_init(|| vec![T::zero(); rows], |scratch, pair| usize::from(repair(pair, scratch)))
            .sum()
    } else {
        let mut scratch = vec![T::zero(); rows];
        y.columns()
            .iter()
            .zip(xhat.columns_mut().iter_mut())
            .map(|pair| usize::from(repair(pair, &mut scratch)))
            .sum()
    };
    state.counters.decode_calls += repaired;
    repaired
}
