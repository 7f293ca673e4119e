use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::sparse::{BinaryColumnMatrix, SparseCodeMatrix};
use crate::thresholds::Thresholds;

/// Tolerance and expansion parameters shared by every factorisation step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepParams<T> {
    pub epsilon: f64,
    pub d: usize,
    pub tol: T,
}

impl<T: Scalar> StepParams<T> {
    pub fn new(epsilon: f64, d: usize) -> Self {
        Self {
            epsilon,
            d,
            tol: T::default_tolerance(),
        }
    }

    pub fn with_tol(mut self, tol: T) -> Self {
        self.tol = tol;
        self
    }

    pub fn thresholds(&self) -> Thresholds {
        Thresholds::new(self.epsilon, self.d)
    }
}

/// Row-to-column incidence of the encoder reconstruction, kept in sync with
/// every update so that overlaps `Âᵀw` cost `O(|w| * row weight)`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ColumnIndex {
    rows: Vec<Vec<usize>>,
}

impl ColumnIndex {
    pub fn build(a: &BinaryColumnMatrix) -> Self {
        Self { rows: a.row_supports() }
    }

    fn insert(&mut self, row: usize, col: usize) {
        let list = &mut self.rows[row];
        if let Err(pos) = list.binary_search(&col) {
            list.insert(pos, col);
        }
    }

    fn remove(&mut self, row: usize, col: usize) {
        let list = &mut self.rows[row];
        if let Ok(pos) = list.binary_search(&col) {
            list.remove(pos);
        }
    }

    /// Column maximising `|supp(a_col) ∩ w|` among columns accepted by
    /// `allow`, with the smallest index winning ties. `None` when no allowed
    /// column meets `w`.
    pub fn best_match(&self, w: &[usize], allow: impl Fn(usize) -> bool) -> Option<(usize, usize)> {
        self.ranked_match(w, allow).map(|(best, _)| best)
    }

    /// Best column as in [`best_match`](Self::best_match), together with the
    /// overlap of the runner-up (0 if there is none).
    pub fn ranked_match(&self, w: &[usize], allow: impl Fn(usize) -> bool) -> Option<((usize, usize), usize)> {
        let mut hits: Vec<usize> = w
            .iter()
            .flat_map(|&r| self.rows[r].iter().copied())
            .filter(|&c| allow(c))
            .collect();
        if hits.is_empty() {
            return None;
        }
        hits.sort_unstable();
        let mut best = (hits[0], 0);
        let mut second = 0;
        let mut i = 0;
        while i < hits.len() {
            let mut j = i + 1;
            while j < hits.len() && hits[j] == hits[i] {
                j += 1;
            }
            if j - i > best.1 {
                second = best.1;
                best = (hits[i], j - i);
            } else if j - i > second {
                second = j - i;
            }
            i = j;
        }
        Some((best, second))
    }
}

/// Reconstructions `(Â, X̂)` evolved by the factorisation drivers.
///
/// Nonzero columns of `Â` are added left to right; `eta` is the smallest
/// index of a zero column.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorisationState<T> {
    pub(crate) ahat: BinaryColumnMatrix,
    pub(crate) xhat: SparseCodeMatrix<T>,
    pub(crate) index: ColumnIndex,
    pub(crate) eta: usize,
    pub(crate) growable: bool,
    /// Set when any entry of `Â` or `X̂` changed during the current iteration.
    pub updated: bool,
    /// Driver iterations run on this state so far.
    pub iteration: usize,
    pub counters: StepCounters,
}

/// Call counts, used to audit which work a driver performed.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StepCounters {
    pub extract_calls: usize,
    pub cluster_calls: usize,
    pub decode_calls: usize,
    pub merge_calls: usize,
}

impl<T: Scalar> FactorisationState<T> {
    /// Empty reconstructions for an `m x n` encoder and `samples` columns.
    pub fn new(m: usize, n: usize, samples: usize) -> Self {
        Self::from_parts(BinaryColumnMatrix::zeros(m, n), SparseCodeMatrix::zeros(n, samples))
            .expect("shapes agree")
    }

    /// Reconstruction whose encoder grows a column at a time, for when `n` is
    /// not known in advance.
    pub fn growable(m: usize, samples: usize) -> Self {
        let mut s = Self::new(m, 0, samples);
        s.growable = true;
        s
    }

    pub fn from_parts(ahat: BinaryColumnMatrix, xhat: SparseCodeMatrix<T>) -> Result<Self> {
        if ahat.cols() != xhat.rows() {
            return Err(Error::Shape(format!(
                "Â has {} columns but X̂ has {} rows",
                ahat.cols(),
                xhat.rows()
            )));
        }
        let index = ColumnIndex::build(&ahat);
        let mut s = Self {
            ahat,
            xhat,
            index,
            eta: 0,
            growable: false,
            updated: false,
            iteration: 0,
            counters: StepCounters::default(),
        };
        s.eta = s.next_zero_column(0);
        Ok(s)
    }

    pub fn ahat(&self) -> &BinaryColumnMatrix {
        &self.ahat
    }

    pub fn xhat(&self) -> &SparseCodeMatrix<T> {
        &self.xhat
    }

    pub fn index(&self) -> &ColumnIndex {
        &self.index
    }

    pub fn eta(&self) -> usize {
        self.eta
    }

    pub fn is_growable(&self) -> bool {
        self.growable
    }

    pub fn into_parts(self) -> (BinaryColumnMatrix, SparseCodeMatrix<T>) {
        (self.ahat, self.xhat)
    }

    pub fn rows(&self) -> usize {
        self.ahat.rows()
    }

    pub fn samples(&self) -> usize {
        self.xhat.cols()
    }

    pub(crate) fn next_zero_column(&self, from: usize) -> usize {
        (from..self.ahat.cols())
            .find(|&c| self.ahat.is_zero_column(c))
            .unwrap_or(self.ahat.cols())
    }

    /// Makes column `col` addressable, growing the reconstruction when allowed.
    pub(crate) fn ensure_column(&mut self, col: usize) -> bool {
        if col < self.ahat.cols() {
            return true;
        }
        if !self.growable {
            return false;
        }
        while self.ahat.cols() <= col {
            self.ahat.push_column(Vec::new());
        }
        self.xhat.grow_rows(self.ahat.cols());
        true
    }

    /// `â_col <- σ(â_col + w)`; returns true if any row was added.
    pub(crate) fn or_column(&mut self, col: usize, rows: &[usize]) -> bool {
        let added = self.ahat.or_column(col, rows);
        for &r in &added {
            self.index.insert(r, col);
        }
        !added.is_empty()
    }

    /// `|supp(â_col) ∪ rows|`.
    pub(crate) fn union_size(&self, col: usize, rows: &[usize]) -> usize {
        let current = self.ahat.support(col);
        current.len() + rows.iter().filter(|r| current.binary_search(r).is_err()).count()
    }

    pub(crate) fn write_x(&mut self, row: usize, col: usize, value: T) -> bool {
        self.xhat.set(row, col, value)
    }

    pub(crate) fn clear_column(&mut self, col: usize) -> Vec<usize> {
        let rows = self.ahat.take_column(col);
        for &r in &rows {
            self.index.remove(r, col);
        }
        rows
    }

    /// Clears every nonzero column of `Â` whose row of `X̂` is empty, so that
    /// a reconstruction no measurement uses can be rebuilt. Returns how many
    /// were cleared.
    pub(crate) fn release_unused(&mut self) -> usize {
        let mut used = vec![false; self.ahat.cols()];
        for xc in self.xhat.columns() {
            for (l, _) in xc.iter() {
                used[l] = true;
            }
        }
        let idle: Vec<usize> = (0..self.ahat.cols())
            .filter(|&c| !used[c] && !self.ahat.is_zero_column(c))
            .collect();
        for &c in &idle {
            self.clear_column(c);
        }
        if !idle.is_empty() {
            self.eta = self.next_zero_column(0);
        }
        idle.len()
    }

    /// Clears every nonzero column of `Â` that some column of `X̂` uses but
    /// only columns flagged in `unfitted` use, skipping supports already in
    /// `released`, to which the cleared supports are added. Returns how many
    /// were cleared.
    pub(crate) fn release_unfitted(&mut self, unfitted: &[bool], released: &mut HashSet<Vec<usize>>) -> usize {
        let cols = self.ahat.cols();
        let mut users = vec![0usize; cols];
        let mut fitted_users = vec![0usize; cols];
        for (c, xc) in self.xhat.columns().iter().enumerate() {
            for (l, _) in xc.iter() {
                users[l] += 1;
                fitted_users[l] += usize::from(!unfitted[c]);
            }
        }
        let doomed: Vec<usize> = (0..cols)
            .filter(|&l| users[l] > 0 && fitted_users[l] == 0 && !released.contains(self.ahat.support(l)))
            .collect();
        for &l in &doomed {
            released.insert(self.clear_column(l));
            for xc in self.xhat.columns_mut() {
                xc.set(l, T::zero());
            }
        }
        if !doomed.is_empty() {
            self.eta = self.next_zero_column(0);
        }
        doomed.len()
    }

    /// Mask of columns with exactly `d` ones.
    pub fn complete_columns(&self, d: usize) -> Vec<bool> {
        (0..self.ahat.cols()).map(|c| self.ahat.cardinality(c) == d).collect()
    }

    pub fn nonzero_columns(&self) -> usize {
        (0..self.ahat.cols()).filter(|&c| !self.ahat.is_zero_column(c)).count()
    }

    /// Appends `count` zero columns to `X̂` for newly arrived measurements.
    pub fn append_samples(&mut self, count: usize) {
        let rows = self.xhat.rows();
        for _ in 0..count {
            self.xhat
                .push_column(crate::sparse::SparseRealVector::zeros(rows))
                .expect("dimension matches");
        }
    }

    /// Moves the nonzero columns of `Â` (and rows of `X̂`) to the front,
    /// preserving their relative order.
    pub(crate) fn compact(&mut self) {
        let cols = self.ahat.cols();
        let mut order: Vec<usize> = (0..cols).filter(|&c| !self.ahat.is_zero_column(c)).collect();
        let live = order.len();
        order.extend((0..cols).filter(|&c| self.ahat.is_zero_column(c)));
        if order.iter().enumerate().all(|(i, &c)| i == c) {
            self.eta = live;
            return;
        }
        self.ahat = self.ahat.permute_columns(&order);
        self.xhat = self.xhat.permute_rows(&order);
        self.index = ColumnIndex::build(&self.ahat);
        self.eta = live;
    }
}

/// Unmatched singleton values and their partial supports gathered from one or
/// more residual columns.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtractionBatch<T> {
    /// Singleton values `q`.
    pub values: Vec<T>,
    /// Partial supports `W`, column `i` paired with `values[i]`.
    pub supports: BinaryColumnMatrix,
    /// Residual column each value was taken from (`h`).
    pub origins: Vec<usize>,
}

impl<T: Scalar> ExtractionBatch<T> {
    pub fn new(rows: usize) -> Self {
        Self {
            values: Vec::new(),
            supports: BinaryColumnMatrix::zeros(rows, 0),
            origins: Vec::new(),
        }
    }

    pub fn push(&mut self, value: T, support: Vec<usize>, origin: usize) {
        self.values.push(value);
        self.supports.push_column(support);
        self.origins.push(origin);
    }

    /// Number of entries `p`.
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn append(&mut self, other: ExtractionBatch<T>) {
        let ExtractionBatch {
            values,
            supports,
            origins,
        } = other;
        self.values.extend(values);
        for s in supports.supports() {
            self.supports.push_column(s.clone());
        }
        self.origins.extend(origins);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn best_match_prefers_overlap_then_lowest_index() {
        let a = BinaryColumnMatrix::from_supports(8, vec![vec![0, 1], vec![1, 2, 3], vec![2, 3, 4]]).unwrap();
        let idx = ColumnIndex::build(&a);
        assert_eq!(idx.best_match(&[1, 2, 3], |_| true), Some((1, 3)));
        assert_eq!(idx.best_match(&[2, 3], |_| true), Some((1, 2)));
        assert_eq!(idx.best_match(&[2, 3], |c| c != 1), Some((2, 2)));
        assert_eq!(idx.best_match(&[7], |_| true), None);
        assert_eq!(idx.ranked_match(&[1, 2, 3], |_| true), Some(((1, 3), 2)));
        assert_eq!(idx.ranked_match(&[2, 3], |_| true), Some(((1, 2), 2)));
    }

    #[test]
    fn eta_tracks_first_zero_column() {
        let a = BinaryColumnMatrix::from_supports(4, vec![vec![0], vec![], vec![1]]).unwrap();
        let s = FactorisationState::<f64>::from_parts(a, SparseCodeMatrix::zeros(3, 2)).unwrap();
        assert_eq!(s.eta(), 1);
    }

    #[test]
    fn growable_state_extends_both_factors() {
        let mut s = FactorisationState::<f64>::growable(5, 2);
        assert_eq!(s.ahat().cols(), 0);
        assert!(s.ensure_column(2));
        assert_eq!(s.ahat().cols(), 3);
        assert_eq!(s.xhat().rows(), 3);
        let mut fixed = FactorisationState::<f64>::new(5, 1, 2);
        assert!(!fixed.ensure_column(1));
    }

    #[test]
    fn compact_moves_live_columns_forward() {
        let a = BinaryColumnMatrix::from_supports(4, vec![vec![], vec![0], vec![], vec![2]]).unwrap();
        let mut x = SparseCodeMatrix::zeros(4, 1);
        x.set(1, 0, 2.0);
        x.set(3, 0, 3.0);
        let mut s = FactorisationState::from_parts(a, x).unwrap();
        s.compact();
        assert_eq!(s.eta(), 2);
        assert_eq!(s.ahat().support(0), &[0]);
        assert_eq!(s.ahat().support(1), &[2]);
        assert_eq!(s.xhat().get(0, 0), 2.0);
        assert_eq!(s.xhat().get(1, 0), 3.0);
        assert_eq!(s.index().best_match(&[2], |_| true), Some((1, 1)));
    }

    #[test]
    fn release_unfitted_spares_columns_with_a_fitted_user() {
        let a = BinaryColumnMatrix::from_supports(6, vec![vec![0, 1], vec![2, 3], vec![4, 5]]).unwrap();
        let x = SparseCodeMatrix::from_dense(&[vec![1.0, 0.0], vec![2.0, 3.0], vec![0.0, 4.0]]).unwrap();
        let mut s = FactorisationState::from_parts(a, x).unwrap();
        let mut released = HashSet::new();
        assert_eq!(s.release_unfitted(&[false, true], &mut released), 1);
        assert!(s.ahat().is_zero_column(2));
        assert_eq!(s.xhat().get(2, 1), 0.0);
        assert_eq!(s.xhat().get(1, 1), 3.0);
        assert_eq!(s.eta(), 2);
        assert!(released.contains(&vec![4, 5]));
        s.or_column(2, &[4, 5]);
        s.write_x(2, 1, 4.0);
        assert_eq!(s.release_unfitted(&[false, true], &mut released), 0);
    }
}
