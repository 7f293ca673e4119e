use crate::debf::state::{ExtractionBatch, FactorisationState, StepParams};
use crate::scalar::Scalar;
use crate::sparse::BinaryColumnMatrix;
use crate::thresholds::at_least;

/// Sparse access to the Gram matrix `WᵀW` through a row-to-column index.
pub(crate) struct SupportGram<'a> {
    supports: &'a BinaryColumnMatrix,
    rows: Vec<Vec<usize>>,
    counts: Vec<usize>,
    touched: Vec<usize>,
}

impl<'a> SupportGram<'a> {
    pub(crate) fn new(supports: &'a BinaryColumnMatrix) -> Self {
        Self {
            supports,
            rows: supports.row_supports(),
            counts: vec![0; supports.cols()],
            touched: Vec::new(),
        }
    }

    /// Ascending `j != i` accepted by `allow` with `g_ij` at least `bound`.
    pub(crate) fn partners(&mut self, i: usize, bound: f64, allow: impl Fn(usize) -> bool) -> Vec<usize> {
        for &r in self.supports.support(i) {
            for &j in &self.rows[r] {
                if j != i && allow(j) {
                    if self.counts[j] == 0 {
                        self.touched.push(j);
                    }
                    self.counts[j] += 1;
                }
            }
        }
        let mut out: Vec<usize> = self
            .touched
            .iter()
            .copied()
            .filter(|&j| at_least(self.counts[j], bound))
            .collect();
        for &j in &self.touched {
            self.counts[j] = 0;
        }
        self.touched.clear();
        out.sort_unstable();
        out
    }
}

/// Result of a clustering step.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ClusterOutcome {
    pub columns_added: usize,
    /// Batch entries left unassigned because `Â` had no free column.
    pub dropped: usize,
}

/// Greedy clustering of unmatched partial supports into new encoder columns.
///
/// Seeds are taken largest support first (batch order among equals). Each
/// unassigned seed starts column `η`; every other unassigned support
/// overlapping the seed in at least `2εd` rows joins it, in the same order,
/// unless the column would exceed `d` ones. Each member writes its singleton
/// to `X̂[η, origin]`.
pub fn cluster_and_add<T: Scalar>(
    batch: &ExtractionBatch<T>,
    state: &mut FactorisationState<T>,
    params: &StepParams<T>,
) -> ClusterOutcome {
    state.counters.cluster_calls += 1;
    let bound = params.thresholds().overlap;
    let p = batch.len();
    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by_key(|&i| std::cmp::Reverse(batch.supports.cardinality(i)));
    let mut rank = vec![0; p];
    for (r, &i) in order.iter().enumerate() {
        rank[i] = r;
    }
    let mut assigned = vec![false; p];
    let mut gram = SupportGram::new(&batch.supports);
    let mut outcome = ClusterOutcome::default();
    for &i in &order {
        if assigned[i] {
            continue;
        }
        let eta = state.eta;
        if !state.ensure_column(eta) {
            outcome.dropped = assigned.iter().filter(|&&b| !b).count();
            break;
        }
        let mut members = gram.partners(i, bound, |j| !assigned[j]);
        members.sort_by_key(|&j| rank[j]);
        for j in std::iter::once(i).chain(members) {
            let support = batch.supports.support(j);
            if j != i && state.union_size(eta, support) > params.d {
                continue;
            }
            assigned[j] = true;
            state.or_column(eta, support);
            state.write_x(eta, batch.origins[j], batch.values[j]);
        }
        outcome.columns_added += 1;
        state.eta = state.next_zero_column(eta + 1);
    }
    if outcome.dropped > 0 {
        log::debug!("cluster step dropped {} supports: no free encoder column", outcome.dropped);
    }
    outcome
}
