use crate::debf::state::{ExtractionBatch, FactorisationState, StepParams};
use crate::scalar::{approx_eq, Scalar};
use crate::sparse::{group_values, SparseRealVector, ValueGroup};
use crate::thresholds::{at_least, exceeds};

/// Scans one residual column for frequently occurring values.
///
/// Groups occurring in more than `d` rows cannot come from a single encoder
/// column and are skipped. Each group occurring more than `(1 - 2ε)d` times
/// is matched against `Â` by maximal overlap: a match of at least `2εd` rows
/// sets `x̂_κ` and grows `â_κ`, anything else is returned as an unmatched
/// partial support. A match that would leave `â_κ` with more than `d` ones is
/// treated as no match. Rarer groups whose value already sits in `x̂` are
/// OR-ed into the corresponding encoder column, again only while it keeps at
/// most `d` ones. Returns the unmatched batch and whether the reconstruction
/// changed.
pub fn extract_and_match<T: Scalar>(
    r: &SparseRealVector<T>,
    state: &mut FactorisationState<T>,
    col: usize,
    params: &StepParams<T>,
) -> (ExtractionBatch<T>, bool) {
    let mut batch = ExtractionBatch::new(state.rows());
    let groups = group_values(r, params.tol);
    let changed = match_groups(groups, state, col, params, true, &mut batch);
    (batch, changed)
}

/// Serial matching half of [`extract_and_match`], fed with precomputed value
/// groups. With `update_encoder == false` only `x̂` is written.
pub(crate) fn match_groups<T: Scalar>(
    groups: Vec<ValueGroup<T>>,
    state: &mut FactorisationState<T>,
    col: usize,
    params: &StepParams<T>,
    update_encoder: bool,
    batch: &mut ExtractionBatch<T>,
) -> bool {
    state.counters.extract_calls += 1;
    let thr = params.thresholds();
    let mut changed = false;
    for group in groups {
        if group.count() > params.d {
            continue;
        }
        if exceeds(group.count(), thr.singleton) {
            let hit = state
                .index
                .best_match(&group.locations, |_| true)
                .filter(|&(kappa, t)| {
                    at_least(t, thr.overlap) && state.union_size(kappa, &group.locations) <= params.d
                });
            match hit {
                Some((kappa, _)) => {
                    changed |= state.write_x(kappa, col, group.value);
                    if update_encoder {
                        changed |= state.or_column(kappa, &group.locations);
                    }
                }
                None => batch.push(group.value, group.locations, col),
            }
        } else if update_encoder {
            let owners: Vec<usize> = state
                .xhat
                .column(col)
                .iter()
                .filter(|&(_, v)| approx_eq(v, group.value, params.tol))
                .map(|(l, _)| l)
                .collect();
            for l in owners {
                if state.union_size(l, &group.locations) <= params.d {
                    changed |= state.or_column(l, &group.locations);
                }
            }
        }
    }
    changed
}
