use std::cmp::Ordering;

use crate::error::{Error, Result};

/// `m x n` binary matrix stored as one sorted support list per column.
///
/// Used for the encoder `A`, its reconstruction and batches of partial supports.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BinaryColumnMatrix {
    rows: usize,
    supports: Vec<Vec<usize>>,
}

impl BinaryColumnMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            supports: vec![Vec::new(); cols],
        }
    }

    /// Builds from per-column supports; each list is sorted and deduplicated.
    pub fn from_supports(rows: usize, mut supports: Vec<Vec<usize>>) -> Result<Self> {
        for (col, s) in supports.iter_mut().enumerate() {
            s.sort_unstable();
            s.dedup();
            if let Some(&last) = s.last() {
                if last >= rows {
                    return Err(Error::Shape(format!(
                        "row {last} out of range in column {col} (rows = {rows})"
                    )));
                }
            }
        }
        Ok(Self { rows, supports })
    }

    pub fn from_dense(dense: &[Vec<u8>]) -> Result<Self> {
        let rows = dense.len();
        let cols = dense.first().map_or(0, Vec::len);
        let mut supports = vec![Vec::new(); cols];
        for (r, row) in dense.iter().enumerate() {
            if row.len() != cols {
                return Err(Error::Shape("ragged dense matrix".into()));
            }
            for (c, &v) in row.iter().enumerate() {
                if v != 0 {
                    supports[c].push(r);
                }
            }
        }
        Ok(Self { rows, supports })
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.supports.len()
    }

    #[inline]
    pub fn support(&self, col: usize) -> &[usize] {
        &self.supports[col]
    }

    #[inline]
    pub fn cardinality(&self, col: usize) -> usize {
        self.supports[col].len()
    }

    pub fn supports(&self) -> &[Vec<usize>] {
        &self.supports
    }

    pub fn nnz(&self) -> usize {
        self.supports.iter().map(Vec::len).sum()
    }

    pub fn is_zero_column(&self, col: usize) -> bool {
        self.supports[col].is_empty()
    }

    pub fn get(&self, row: usize, col: usize) -> bool {
        self.supports[col].binary_search(&row).is_ok()
    }

    /// `a_col <- sigma(a_col + w)`. Returns the rows that were newly set.
    pub fn or_column(&mut self, col: usize, rows: &[usize]) -> Vec<usize> {
        let current = &self.supports[col];
        let mut added = Vec::new();
        let mut merged = Vec::with_capacity(current.len() + rows.len());
        let (mut i, mut j) = (0, 0);
        while i < current.len() || j < rows.len() {
            match (current.get(i), rows.get(j)) {
                (Some(&a), Some(&b)) if a == b => {
                    merged.push(a);
                    i += 1;
                    j += 1;
                }
                (Some(&a), Some(&b)) if a < b => {
                    merged.push(a);
                    i += 1;
                }
                (Some(_), Some(&b)) | (None, Some(&b)) => {
                    merged.push(b);
                    added.push(b);
                    j += 1;
                }
                (Some(&a), None) => {
                    merged.push(a);
                    i += 1;
                }
                (None, None) => unreachable!(),
            }
        }
        if !added.is_empty() {
            self.supports[col] = merged;
        }
        added
    }

    pub fn set_column(&mut self, col: usize, mut support: Vec<usize>) {
        support.sort_unstable();
        support.dedup();
        debug_assert!(support.last().map_or(true, |&r| r < self.rows));
        self.supports[col] = support;
    }

    pub fn take_column(&mut self, col: usize) -> Vec<usize> {
        std::mem::take(&mut self.supports[col])
    }

    pub fn push_column(&mut self, mut support: Vec<usize>) -> usize {
        support.sort_unstable();
        support.dedup();
        debug_assert!(support.last().map_or(true, |&r| r < self.rows));
        self.supports.push(support);
        self.supports.len() - 1
    }

    /// Row view: for every row, the sorted list of columns with a one in it.
    pub fn row_supports(&self) -> Vec<Vec<usize>> {
        let mut rows = vec![Vec::new(); self.rows];
        for (c, s) in self.supports.iter().enumerate() {
            for &r in s {
                rows[r].push(c);
            }
        }
        rows
    }

    /// New matrix whose column `i` is column `perm[i]` of `self`.
    pub fn permute_columns(&self, perm: &[usize]) -> Self {
        Self {
            rows: self.rows,
            supports: perm.iter().map(|&p| self.supports[p].clone()).collect(),
        }
    }

    pub fn to_dense(&self) -> Vec<Vec<u8>> {
        let mut dense = vec![vec![0u8; self.cols()]; self.rows];
        for (c, s) in self.supports.iter().enumerate() {
            for &r in s {
                dense[r][c] = 1;
            }
        }
        dense
    }
}

/// `|supp(a) ∩ supp(b)|` for sorted support lists.
pub fn inner_product(a: &[usize], b: &[usize]) -> usize {
    let (mut i, mut j, mut count) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            Ordering::Less => i += 1,
            Ordering::Greater => j += 1,
            Ordering::Equal => {
                count += 1;
                i += 1;
                j += 1;
            }
        }
    }
    count
}

/// Compares two columns read as `m`-bit binary numbers with row 0 the most
/// significant bit.
pub fn compare_as_binary(a: &[usize], b: &[usize]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        if x != y {
            // The column holding the smaller row index has the higher bit set.
            return y.cmp(x);
        }
    }
    a.len().cmp(&b.len())
}
