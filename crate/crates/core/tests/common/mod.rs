//! Brute-force reference implementations shared by the integration tests.
//! They deliberately avoid the library's own enumeration and grouping code.
#![allow(dead_code)]

use psb_factor::rng::{below, derive_seed, partial_shuffle, rng_from_seed, unit_f64};
use psb_factor::{BinaryColumnMatrix, SparseRealVector};

/// Column supports as bitsets.
pub struct Bitsets {
    words: usize,
    cols: Vec<Vec<u64>>,
}

impl Bitsets {
    pub fn new(a: &BinaryColumnMatrix) -> Self {
        let words = a.rows().div_ceil(64).max(1);
        let cols = (0..a.cols())
            .map(|c| {
                let mut w = vec![0u64; words];
                for &r in a.support(c) {
                    w[r / 64] |= 1 << (r % 64);
                }
                w
            })
            .collect();
        Self { words, cols }
    }

    /// (|N(S)|, |N₁(S)|, |∩ supp|) for the columns in `set`.
    pub fn stats(&self, set: &[usize]) -> (usize, usize, usize) {
        let mut once = vec![0u64; self.words];
        let mut twice = vec![0u64; self.words];
        let mut all = vec![u64::MAX; self.words];
        for &c in set {
            for w in 0..self.words {
                let col = self.cols[c][w];
                twice[w] |= once[w] & col;
                once[w] = (once[w] ^ col) & !twice[w];
                all[w] &= col;
            }
        }
        let count = |v: &[u64]| v.iter().map(|x| x.count_ones() as usize).sum::<usize>();
        let union: Vec<u64> = once.iter().zip(&twice).map(|(a, b)| a | b).collect();
        (count(&union), count(&once), if set.is_empty() { 0 } else { count(&all) })
    }
}

/// Every subset of `0..n` with `1..=k` elements.
pub fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current = Vec::new();
    fn go(start: usize, n: usize, k: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        for c in start..n {
            current.push(c);
            out.push(current.clone());
            if current.len() < k {
                go(c + 1, n, k, current, out);
            }
            current.pop();
        }
    }
    go(0, n, k, &mut current, &mut out);
    out
}

/// `max_S 1 - |N(S)| / (d |S|)` over subsets of at most `k` columns.
pub fn brute_epsilon_hat(a: &BinaryColumnMatrix, k: usize) -> f64 {
    let d = a.cardinality(0) as f64;
    let bits = Bitsets::new(a);
    subsets(a.cols(), k)
        .iter()
        .map(|s| 1.0 - bits.stats(s).0 as f64 / (d * s.len() as f64))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Checks the three adjacency properties of a `(k, ε, d)`-expander directly.
pub fn brute_adjacency_properties(a: &BinaryColumnMatrix, k: usize, epsilon: f64) -> bool {
    let d = a.cardinality(0) as f64;
    let bits = Bitsets::new(a);
    subsets(a.cols(), k).iter().all(|s| {
        let (n, n1, common) = bits.stats(s);
        let size = s.len() as f64;
        let p1 = n as f64 > (1.0 - epsilon) * d * size;
        let p2 = n1 as f64 > (1.0 - 2.0 * epsilon) * d * size;
        let p3 = s.len() < 2 || (common as f64) < 2.0 * epsilon * d;
        p1 && p2 && p3
    })
}

/// Unique neighbour count by per-row tallies.
pub fn brute_unique(a: &BinaryColumnMatrix, set: &[usize]) -> usize {
    let dense = a.to_dense();
    dense
        .iter()
        .filter(|row| set.iter().filter(|&&c| row[c] == 1).count() == 1)
        .count()
}

/// Pairwise comparison of all subset sums (including the empty one).
pub fn brute_dissociated(values: &[f64], tol: f64) -> bool {
    let s = values.len();
    let sums: Vec<f64> = (0..1usize << s)
        .map(|mask| (0..s).filter(|i| mask >> i & 1 == 1).map(|i| values[i]).sum())
        .collect();
    for i in 0..sums.len() {
        for j in i + 1..sums.len() {
            if (sums[i] - sums[j]).abs() <= tol {
                return false;
            }
        }
    }
    true
}

pub fn close(reference: f64, other: f64, tol: f64) -> bool {
    (other - reference).abs() <= tol * reference.abs().max(1.0)
}

/// Dense scan for the rows of `r` equal to `alpha`.
pub fn brute_locations(alpha: f64, r: &[f64], tol: f64) -> Vec<usize> {
    (0..r.len()).filter(|&i| r[i] != 0.0 && close(alpha, r[i], tol)).collect()
}

/// Dense `A z`.
pub fn dense_product(a: &BinaryColumnMatrix, z: &[f64]) -> Vec<f64> {
    let dense = a.to_dense();
    dense
        .iter()
        .map(|row| row.iter().zip(z).filter(|(&b, _)| b == 1).map(|(_, &v)| v).sum())
        .collect()
}

/// Matrix with `n` columns of `d` uniformly chosen rows each (not
/// necessarily an expander).
pub fn random_binary(m: usize, n: usize, d: usize, seed: u64) -> BinaryColumnMatrix {
    let mut rng = rng_from_seed(seed);
    let mut rows: Vec<usize> = (0..m).collect();
    let supports = (0..n)
        .map(|_| {
            partial_shuffle(&mut rng, &mut rows, d);
            rows[..d].to_vec()
        })
        .collect();
    BinaryColumnMatrix::from_supports(m, supports).unwrap()
}

/// A `k`-sparse vector with coefficients uniform on `[0.1, 10.1]`.
pub fn random_sparse(n: usize, k: usize, seed: u64) -> SparseRealVector<f64> {
    let mut rng = rng_from_seed(seed);
    let mut idx: Vec<usize> = (0..n).collect();
    partial_shuffle(&mut rng, &mut idx, k);
    let entries = idx[..k].iter().map(|&i| (i, 0.1 + 10.0 * unit_f64(&mut rng))).collect();
    SparseRealVector::from_entries(n, entries).unwrap()
}

/// Small integer coefficients, so subset sums collide now and then.
pub fn random_integers(len: usize, seed: u64) -> Vec<f64> {
    let mut rng = rng_from_seed(seed);
    (0..len).map(|_| 1.0 + below(&mut rng, 6) as f64).collect()
}

/// True iff every set of at most `k` columns has more than `5/6 · d|S|`
/// neighbours, compared in integers.
pub fn brute_one_sixth_expander(a: &BinaryColumnMatrix, k: usize) -> bool {
    let d = a.cardinality(0);
    let bits = Bitsets::new(a);
    subsets(a.cols(), k).iter().all(|s| 6 * bits.stats(s).0 > 5 * d * s.len())
}

/// Expander of the library's generator whose tight expansion over sets of at
/// most `k` columns, checked by brute force, is below `1/6`.
pub fn verified_expander(m: usize, n: usize, d: usize, k: usize, seed: u64) -> BinaryColumnMatrix {
    for attempt in 0u64.. {
        let params = psb_factor::EncoderParams::new(m, n, d, derive_seed(seed, &[attempt])).unwrap();
        let a = psb_factor::generate_encoder(&params).unwrap();
        if brute_one_sixth_expander(&a, k) {
            return a;
        }
    }
    unreachable!()
}

/// Sorted column supports, for comparing encoders up to permutation.
pub fn sorted_supports(a: &BinaryColumnMatrix) -> Vec<Vec<usize>> {
    let mut s = a.supports().to_vec();
    s.sort();
    s
}
