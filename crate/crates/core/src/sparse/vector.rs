use crate::error::{Error, Result};
use crate::scalar::{approx_eq, Scalar};

/// Sparse real vector with strictly increasing indices and no stored zeros.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseRealVector<T> {
    dim: usize,
    indices: Vec<usize>,
    values: Vec<T>,
}

impl<T: Scalar> SparseRealVector<T> {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            indices: Vec::new(),
            values: Vec::new(),
        }
    }

    /// Builds from `(index, value)` pairs in any order. Exact zeros are dropped.
    pub fn from_entries(dim: usize, mut entries: Vec<(usize, T)>) -> Result<Self> {
        entries.sort_by_key(|&(i, _)| i);
        let mut out = Self::zeros(dim);
        for (i, v) in entries {
            if i >= dim {
                return Err(Error::Shape(format!("index {i} out of range (dim = {dim})")));
            }
            if out.indices.last() == Some(&i) {
                return Err(Error::Shape(format!("duplicate index {i}")));
            }
            if v.is_zero() {
                continue;
            }
            out.indices.push(i);
            out.values.push(v);
        }
        Ok(out)
    }

    pub fn from_dense(dense: &[T]) -> Self {
        Self::from_dense_pruned(dense, |_, v| v.is_zero())
    }

    /// Keeps entry `j` unless `is_dust(j, value)` holds.
    pub fn from_dense_pruned(dense: &[T], mut is_dust: impl FnMut(usize, T) -> bool) -> Self {
        let mut out = Self::zeros(dense.len());
        for (j, &v) in dense.iter().enumerate() {
            if !v.is_zero() && !is_dust(j, v) {
                out.indices.push(j);
                out.values.push(v);
            }
        }
        out
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    #[inline]
    pub fn is_zero(&self) -> bool {
        self.indices.is_empty()
    }

    #[inline]
    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    #[inline]
    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, T)> + '_ {
        self.indices.iter().copied().zip(self.values.iter().copied())
    }

    pub fn get(&self, index: usize) -> T {
        match self.indices.binary_search(&index) {
            Ok(pos) => self.values[pos],
            Err(_) => T::zero(),
        }
    }

    /// Sets entry `index`; a zero value removes it. Returns true if the stored
    /// value changed.
    pub fn set(&mut self, index: usize, value: T) -> bool {
        debug_assert!(index < self.dim);
        match self.indices.binary_search(&index) {
            Ok(pos) if value.is_zero() => {
                self.indices.remove(pos);
                self.values.remove(pos);
                true
            }
            Ok(pos) => {
                let changed = self.values[pos] != value;
                self.values[pos] = value;
                changed
            }
            Err(_) if value.is_zero() => false,
            Err(pos) => {
                self.indices.insert(pos, index);
                self.values.insert(pos, value);
                true
            }
        }
    }

    pub fn to_dense(&self) -> Vec<T> {
        let mut dense = vec![T::zero(); self.dim];
        self.scatter_into(&mut dense);
        dense
    }

    pub fn scatter_into(&self, dense: &mut [T]) {
        for (i, v) in self.iter() {
            dense[i] = v;
        }
    }

    pub fn norm_squared(&self) -> T {
        self.values.iter().fold(T::zero(), |acc, &v| acc + v * v)
    }
}

/// A run of tolerance-equal values in a vector and the rows where it occurs.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueGroup<T> {
    /// Value at the first (lowest-row) occurrence.
    pub value: T,
    pub locations: Vec<usize>,
}

impl<T> ValueGroup<T> {
    #[inline]
    pub fn count(&self) -> usize {
        self.locations.len()
    }
}

/// `f(alpha, r)`: number of entries of `r` equal to `alpha` within tolerance.
pub fn frequency<T: Scalar>(alpha: T, r: &SparseRealVector<T>, tol: T) -> Result<usize> {
    if alpha.is_zero() {
        return Err(Error::ZeroValue);
    }
    Ok(r.values().iter().filter(|&&v| approx_eq(alpha, v, tol)).count())
}

/// `g(alpha, r)`: sorted rows where `alpha` occurs in `r`.
pub fn locations<T: Scalar>(alpha: T, r: &SparseRealVector<T>, tol: T) -> Result<Vec<usize>> {
    if alpha.is_zero() {
        return Err(Error::ZeroValue);
    }
    Ok(r.iter()
        .filter(|&(_, v)| approx_eq(alpha, v, tol))
        .map(|(i, _)| i)
        .collect())
}

/// Partitions the nonzeros of `r` into groups of tolerance-equal values,
/// ordered by first occurrence.
///
/// Sorts by value and merges each run whose members lie within tolerance of
/// the run's smallest value, then restores scan order.
pub fn group_values<T: Scalar>(r: &SparseRealVector<T>, tol: T) -> Vec<ValueGroup<T>> {
    let mut order: Vec<usize> = (0..r.nnz()).collect();
    let values = r.values();
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap_or(std::cmp::Ordering::Equal).then(a.cmp(&b)));

    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut anchor = T::zero();
    for pos in order {
        let v = values[pos];
        match groups.last_mut() {
            Some(g) if approx_eq(anchor, v, tol) => g.push(pos),
            _ => {
                anchor = v;
                groups.push(vec![pos]);
            }
        }
    }

    let indices = r.indices();
    let mut out: Vec<ValueGroup<T>> = groups
        .into_iter()
        .map(|mut g| {
            g.sort_unstable();
            ValueGroup {
                value: values[g[0]],
                locations: g.iter().map(|&p| indices[p]).collect(),
            }
        })
        .collect();
    out.sort_by_key(|g| g.locations[0]);
    out
}
