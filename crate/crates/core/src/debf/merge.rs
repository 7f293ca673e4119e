use crate::debf::cluster::SupportGram;
use crate::debf::state::FactorisationState;
use crate::scalar::Scalar;
use crate::thresholds::at_least;

/// Merges duplicate reconstructions of one encoder column.
///
/// Column pairs whose supports overlap in at least `d/3` rows (measured on
/// `Â` as it was on entry) are OR-ed into the lower index, provided the lower
/// column currently has at least `d/3` ones and the union keeps at most `d`;
/// the matching rows of `X̂` are summed. Emptied columns are then compacted away so that nonzero columns
/// stay at the front. Returns the number of merges.
pub fn merge_pass<T: Scalar>(state: &mut FactorisationState<T>, d: usize) -> usize {
    state.counters.merge_calls += 1;
    let bound = d as f64 / 3.0;
    let snapshot = state.ahat.clone();
    let mut gram = SupportGram::new(&snapshot);
    let mut merged = 0;
    let mut row_moves: Vec<(usize, usize)> = Vec::new();
    for i in 0..snapshot.cols() {
        if !at_least(state.ahat.cardinality(i), bound) {
            continue;
        }
        for j in gram.partners(i, bound, |j| j > i && !state.ahat.is_zero_column(j)) {
            if state.union_size(i, state.ahat.support(j)) > d {
                continue;
            }
            let rows = state.clear_column(j);
            state.or_column(i, &rows);
            row_moves.push((j, i));
            merged += 1;
        }
    }
    if merged == 0 {
        return 0;
    }
    for xc in state.xhat.columns_mut() {
        for &(from, to) in &row_moves {
            let v = xc.get(from);
            if !v.is_zero() {
                let sum = xc.get(to) + v;
                xc.set(to, sum);
                xc.set(from, T::zero());
            }
        }
    }
    state.compact();
    merged
}
