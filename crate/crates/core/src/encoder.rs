//! Random expander encoders, brute-force expansion oracles and the
//! column-ordering protocol.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::rng::{rng_from_seed, shuffle};
use crate::scalar::Scalar;
use crate::sparse::{compare_as_binary, BinaryColumnMatrix, SparseCodeMatrix};
use crate::thresholds::{at_least, exceeds};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EncoderParams {
    pub m: usize,
    pub n: usize,
    pub d: usize,
    pub seed: u64,
}

impl EncoderParams {
    pub fn new(m: usize, n: usize, d: usize, seed: u64) -> Result<Self> {
        let p = Self { m, n, d, seed };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.d == 0 || self.d > self.m {
            return Err(Error::InvalidParameter(format!(
                "need 0 < d <= m, got d = {}, m = {}",
                self.d, self.m
            )));
        }
        if self.n == 0 {
            return Err(Error::InvalidParameter("n must be positive".into()));
        }
        Ok(())
    }

    /// Columns assigned per drawn permutation, `⌊m/d⌋`.
    pub fn columns_per_permutation(&self) -> usize {
        self.m / self.d
    }

    /// Number of permutations drawn, `⌈n/⌊m/d⌋⌉`; also the maximum row weight.
    pub fn max_row_weight(&self) -> usize {
        self.n.div_ceil(self.columns_per_permutation())
    }
}

/// Samples an `m x n` encoder with exactly `d` ones per column and at most
/// `⌈n/⌊m/d⌋⌉` ones per row.
///
/// Columns are filled in blocks of `⌊m/d⌋`: each block draws one uniform
/// permutation of the rows and hands out consecutive runs of `d` entries, so
/// columns within a block have disjoint supports.
pub fn generate_encoder(params: &EncoderParams) -> Result<BinaryColumnMatrix> {
    params.validate()?;
    let EncoderParams { m, n, d, seed } = *params;
    let per_block = params.columns_per_permutation();
    let mut rng = rng_from_seed(seed);
    let mut supports = Vec::with_capacity(n);
    let mut perm: Vec<usize> = (0..m).collect();
    while supports.len() < n {
        shuffle(&mut rng, &mut perm);
        let take = per_block.min(n - supports.len());
        for j in 0..take {
            supports.push(perm[j * d..(j + 1) * d].to_vec());
        }
    }
    BinaryColumnMatrix::from_supports(m, supports)
}

/// Size guard for exhaustive subset enumeration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnumerationLimits {
    pub max_cols: usize,
    pub max_set_size: usize,
}

impl Default for EnumerationLimits {
    fn default() -> Self {
        Self {
            max_cols: 24,
            max_set_size: 5,
        }
    }
}

impl EnumerationLimits {
    fn check(&self, a: &BinaryColumnMatrix, k: usize) -> Result<()> {
        if a.cols() > self.max_cols || k > self.max_set_size {
            return Err(Error::EnumerationGuard(format!(
                "n = {}, k = {} (limits n <= {}, k <= {})",
                a.cols(),
                k,
                self.max_cols,
                self.max_set_size
            )));
        }
        Ok(())
    }
}

/// Common column weight of a left-regular matrix.
pub fn column_degree(a: &BinaryColumnMatrix) -> Result<usize> {
    let d = a.cardinality(0);
    if (0..a.cols()).any(|c| a.cardinality(c) != d) {
        return Err(Error::InvalidParameter("encoder columns differ in weight".into()));
    }
    Ok(d)
}

/// Neighbourhood statistics of one column subset.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SubsetStats {
    pub size: usize,
    /// `|N(S)|`
    pub neighbours: usize,
    /// `|N₁(S)|`
    pub unique_neighbours: usize,
    /// `|∩_{l∈S} supp(a_l)|`
    pub common: usize,
}

/// Depth-first walk over all subsets of `[n]` with `1..=k` elements in
/// lexicographic order, maintaining per-row neighbour counts incrementally.
fn for_each_subset(a: &BinaryColumnMatrix, k: usize, mut visit: impl FnMut(&[usize], SubsetStats)) {
    struct Walk<'a, F> {
        a: &'a BinaryColumnMatrix,
        k: usize,
        counts: Vec<usize>,
        set: Vec<usize>,
        neighbours: usize,
        unique: usize,
        visit: F,
    }

    impl<F: FnMut(&[usize], SubsetStats)> Walk<'_, F> {
        fn recurse(&mut self, start: usize) {
            for col in start..self.a.cols() {
                for &r in self.a.support(col) {
                    let c = &mut self.counts[r];
                    match *c {
                        0 => {
                            self.neighbours += 1;
                            self.unique += 1;
                        }
                        1 => self.unique -= 1,
                        _ => {}
                    }
                    *c += 1;
                }
                self.set.push(col);
                let size = self.set.len();
                // Rows shared by every member must lie in the first member's support.
                let common = self.a.support(self.set[0]).iter().filter(|&&r| self.counts[r] == size).count();
                let stats = SubsetStats {
                    size,
                    neighbours: self.neighbours,
                    unique_neighbours: self.unique,
                    common,
                };
                (self.visit)(&self.set, stats);
                if size < self.k {
                    self.recurse(col + 1);
                }
                self.set.pop();
                for &r in self.a.support(col) {
                    let c = &mut self.counts[r];
                    *c -= 1;
                    match *c {
                        0 => {
                            self.neighbours -= 1;
                            self.unique -= 1;
                        }
                        1 => self.unique += 1,
                        _ => {}
                    }
                }
            }
        }
    }

    let mut walk = Walk {
        a,
        k,
        counts: vec![0; a.rows()],
        set: Vec::with_capacity(k),
        neighbours: 0,
        unique: 0,
        visit: &mut visit,
    };
    walk.recurse(0);
}

/// Tight expansion parameter over all sets of at most `k` columns.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpansionReport {
    pub k: usize,
    /// `max_S (1 - |N(S)| / (d|S|))`. The matrix is a `(k, ε, d)`-expander for
    /// every `ε > epsilon_hat`.
    pub epsilon_hat: f64,
    pub worst_set: Vec<usize>,
    pub worst_neighbours: usize,
}

pub fn expansion_oracle(a: &BinaryColumnMatrix, k: usize, limits: EnumerationLimits) -> Result<ExpansionReport> {
    limits.check(a, k)?;
    if a.cols() == 0 || k == 0 {
        return Ok(ExpansionReport {
            k,
            epsilon_hat: 0.0,
            worst_set: Vec::new(),
            worst_neighbours: 0,
        });
    }
    let d = column_degree(a)?;
    let mut best = ExpansionReport {
        k,
        epsilon_hat: f64::NEG_INFINITY,
        worst_set: Vec::new(),
        worst_neighbours: 0,
    };
    // Compare deficits as exact fractions: 1 - N/(d s) is larger when N/s is smaller.
    let mut best_ratio: Option<(usize, usize)> = None;
    for_each_subset(a, k, |set, stats| {
        let worse = match best_ratio {
            None => true,
            Some((bn, bs)) => stats.neighbours * bs < bn * stats.size,
        };
        if worse {
            best_ratio = Some((stats.neighbours, stats.size));
            best.worst_set = set.to_vec();
            best.worst_neighbours = stats.neighbours;
        }
    });
    let (n_s, s) = best_ratio.expect("at least one subset");
    best.epsilon_hat = if d == 0 { 0.0 } else { 1.0 - n_s as f64 / (d * s) as f64 };
    Ok(best)
}

/// `|N₁(S)|`: rows adjacent to exactly one column of `set`.
pub fn unique_neighbour_count(a: &BinaryColumnMatrix, set: &[usize]) -> usize {
    let mut rows: Vec<usize> = set.iter().flat_map(|&c| a.support(c).iter().copied()).collect();
    rows.sort_unstable();
    let mut unique = 0;
    let mut i = 0;
    while i < rows.len() {
        let mut j = i + 1;
        while j < rows.len() && rows[j] == rows[i] {
            j += 1;
        }
        if j - i == 1 {
            unique += 1;
        }
        i = j;
    }
    unique
}

/// Which of the three adjacency properties of an expander failed first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OverlapViolation {
    Expansion(Vec<usize>),
    UniqueNeighbours(Vec<usize>),
    CommonSupport(Vec<usize>),
}

/// Checks, for every set of `1..=k` columns, that `|N(S)| > (1-ε)d|S|`,
/// `|N₁(S)| > (1-2ε)d|S|`, and (for `|S| >= 2`) that the common support has
/// fewer than `2εd` rows. Returns the first violating set, if any.
pub fn find_overlap_violation(
    a: &BinaryColumnMatrix,
    epsilon: f64,
    k: usize,
    limits: EnumerationLimits,
) -> Result<Option<OverlapViolation>> {
    limits.check(a, k)?;
    if a.cols() == 0 {
        return Ok(None);
    }
    let d = column_degree(a)? as f64;
    let mut violation = None;
    for_each_subset(a, k, |set, stats| {
        if violation.is_some() {
            return;
        }
        let s = stats.size as f64;
        if !exceeds(stats.neighbours, (1.0 - epsilon) * d * s) {
            violation = Some(OverlapViolation::Expansion(set.to_vec()));
        } else if !exceeds(stats.unique_neighbours, (1.0 - 2.0 * epsilon) * d * s) {
            violation = Some(OverlapViolation::UniqueNeighbours(set.to_vec()));
        } else if stats.size >= 2 && at_least(stats.common, 2.0 * epsilon * d) {
            violation = Some(OverlapViolation::CommonSupport(set.to_vec()));
        }
    });
    Ok(violation)
}

pub fn overlap_bound_check(a: &BinaryColumnMatrix, epsilon: f64, k: usize, limits: EnumerationLimits) -> Result<bool> {
    Ok(find_overlap_violation(a, epsilon, k, limits)?.is_none())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Direction {
    Ascending,
    #[default]
    Descending,
}

/// Result of reordering encoder columns by their binary-number value.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderedColumns<T> {
    pub encoder: BinaryColumnMatrix,
    pub codes: Option<SparseCodeMatrix<T>>,
    /// `permutation[new] = old`.
    pub permutation: Vec<usize>,
}

/// Sorts columns as `m`-bit numbers (row 0 most significant) and applies the
/// same permutation to the rows of `codes`.
///
/// With `strict`, duplicate columns are an error since they leave the order
/// ambiguous.
pub fn order_columns<T: Scalar>(
    a: &BinaryColumnMatrix,
    codes: Option<&SparseCodeMatrix<T>>,
    direction: Direction,
    strict: bool,
) -> Result<OrderedColumns<T>> {
    if let Some(x) = codes {
        if x.rows() != a.cols() {
            return Err(Error::Shape(format!(
                "encoder has {} columns but codes have {} rows",
                a.cols(),
                x.rows()
            )));
        }
    }
    let mut permutation: Vec<usize> = (0..a.cols()).collect();
    let cmp = |&i: &usize, &j: &usize| -> Ordering {
        let o = compare_as_binary(a.support(i), a.support(j));
        match direction {
            Direction::Ascending => o,
            Direction::Descending => o.reverse(),
        }
    };
    permutation.sort_by(cmp);
    if strict {
        if let Some(w) = permutation.windows(2).find(|w| a.support(w[0]) == a.support(w[1])) {
            return Err(Error::DuplicateColumns(w[0].min(w[1]), w[0].max(w[1])));
        }
    }
    Ok(OrderedColumns {
        encoder: a.permute_columns(&permutation),
        codes: codes.map(|x| x.permute_rows(&permutation)),
        permutation,
    })
}
