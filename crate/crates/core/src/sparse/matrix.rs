use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::sparse::{BinaryColumnMatrix, SparseRealVector};

/// Real matrix stored column by column as sparse vectors.
///
/// Holds the sparse codes `X`, their reconstructions, and measurement or
/// residual matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseCodeMatrix<T> {
    rows: usize,
    columns: Vec<SparseRealVector<T>>,
}

impl<T: Scalar> SparseCodeMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            columns: vec![SparseRealVector::zeros(rows); cols],
        }
    }

    pub fn from_columns(rows: usize, columns: Vec<SparseRealVector<T>>) -> Result<Self> {
        if let Some((i, c)) = columns.iter().enumerate().find(|(_, c)| c.dim() != rows) {
            return Err(Error::Shape(format!(
                "column {i} has dimension {} but matrix has {rows} rows",
                c.dim()
            )));
        }
        Ok(Self { rows, columns })
    }

    pub fn from_dense(dense: &[Vec<T>]) -> Result<Self> {
        let rows = dense.len();
        let cols = dense.first().map_or(0, Vec::len);
        if dense.iter().any(|r| r.len() != cols) {
            return Err(Error::Shape("ragged dense matrix".into()));
        }
        let columns = (0..cols)
            .map(|c| {
                let col: Vec<T> = dense.iter().map(|r| r[c]).collect();
                SparseRealVector::from_dense(&col)
            })
            .collect();
        Ok(Self { rows, columns })
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.columns.len()
    }

    #[inline]
    pub fn column(&self, col: usize) -> &SparseRealVector<T> {
        &self.columns[col]
    }

    #[inline]
    pub fn column_mut(&mut self, col: usize) -> &mut SparseRealVector<T> {
        &mut self.columns[col]
    }

    pub fn columns(&self) -> &[SparseRealVector<T>] {
        &self.columns
    }

    pub fn columns_mut(&mut self) -> &mut [SparseRealVector<T>] {
        &mut self.columns
    }

    pub fn push_column(&mut self, column: SparseRealVector<T>) -> Result<()> {
        if column.dim() != self.rows {
            return Err(Error::Shape(format!(
                "column of dimension {} pushed onto {}-row matrix",
                column.dim(),
                self.rows
            )));
        }
        self.columns.push(column);
        Ok(())
    }

    /// Appends zero rows so that the matrix has `rows` rows.
    pub fn grow_rows(&mut self, rows: usize) {
        if rows <= self.rows {
            return;
        }
        self.rows = rows;
        for c in &mut self.columns {
            let entries: Vec<(usize, T)> = c.iter().collect();
            *c = SparseRealVector::from_entries(rows, entries).expect("indices already valid");
        }
    }

    pub fn get(&self, row: usize, col: usize) -> T {
        self.columns[col].get(row)
    }

    pub fn set(&mut self, row: usize, col: usize, value: T) -> bool {
        self.columns[col].set(row, value)
    }

    pub fn nnz(&self) -> usize {
        self.columns.iter().map(SparseRealVector::nnz).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.columns.iter().all(SparseRealVector::is_zero)
    }

    pub fn frobenius_norm(&self) -> T {
        self.columns
            .iter()
            .fold(T::zero(), |acc, c| acc + c.norm_squared())
            .sqrt()
    }

    /// Row-wise view: for every row the `(column, value)` entries.
    pub fn row_entries(&self) -> Vec<Vec<(usize, T)>> {
        let mut out = vec![Vec::new(); self.rows];
        for (c, col) in self.columns.iter().enumerate() {
            for (r, v) in col.iter() {
                out[r].push((c, v));
            }
        }
        out
    }

    pub fn nonzero_rows(&self) -> Vec<bool> {
        let mut out = vec![false; self.rows];
        for col in &self.columns {
            for &r in col.indices() {
                out[r] = true;
            }
        }
        out
    }

    /// New matrix whose row `i` is row `perm[i]` of `self`.
    pub fn permute_rows(&self, perm: &[usize]) -> Self {
        let mut inverse = vec![usize::MAX; self.rows];
        for (new, &old) in perm.iter().enumerate() {
            inverse[old] = new;
        }
        let columns = self
            .columns
            .iter()
            .map(|c| {
                let entries = c.iter().map(|(r, v)| (inverse[r], v)).collect();
                SparseRealVector::from_entries(perm.len(), entries).expect("valid permutation")
            })
            .collect();
        Self {
            rows: perm.len(),
            columns,
        }
    }

    pub fn to_dense(&self) -> Vec<Vec<T>> {
        let mut dense = vec![vec![T::zero(); self.cols()]; self.rows];
        for (c, col) in self.columns.iter().enumerate() {
            for (r, v) in col.iter() {
                dense[r][c] = v;
            }
        }
        dense
    }
}

/// Dense scatter of `A x` into `out` (which must be zeroed by the caller).
pub fn accumulate_product<T: Scalar>(a: &BinaryColumnMatrix, x: &SparseRealVector<T>, out: &mut [T]) {
    for (l, v) in x.iter() {
        for &r in a.support(l) {
            out[r] = out[r] + v;
        }
    }
}

/// `A X` for a binary `A`.
pub fn product<T: Scalar>(a: &BinaryColumnMatrix, x: &SparseCodeMatrix<T>) -> Result<SparseCodeMatrix<T>> {
    if a.cols() != x.rows() {
        return Err(Error::Shape(format!(
            "cannot multiply {}x{} by {}x{}",
            a.rows(),
            a.cols(),
            x.rows(),
            x.cols()
        )));
    }
    let mut dense = vec![T::zero(); a.rows()];
    let columns = x
        .columns()
        .iter()
        .map(|col| {
            dense.iter_mut().for_each(|v| *v = T::zero());
            accumulate_product(a, col, &mut dense);
            SparseRealVector::from_dense(&dense)
        })
        .collect();
    SparseCodeMatrix::from_columns(a.rows(), columns)
}

/// One column of `y - A x`, with entries `|r_j| <= tol * max(1, |y_j|)` pruned.
///
/// `scratch` must have length `y.dim()`; it is left zeroed.
pub fn residual_column<T: Scalar>(
    y: &SparseRealVector<T>,
    a: &BinaryColumnMatrix,
    x: &SparseRealVector<T>,
    tol: T,
    scratch: &mut [T],
) -> SparseRealVector<T> {
    debug_assert_eq!(scratch.len(), y.dim());
    let mut touched: Vec<usize> = Vec::with_capacity(y.nnz());
    for (j, v) in y.iter() {
        scratch[j] = v;
        touched.push(j);
    }
    for (l, v) in x.iter() {
        for &r in a.support(l) {
            scratch[r] = scratch[r] - v;
            touched.push(r);
        }
    }
    touched.sort_unstable();
    touched.dedup();
    let mut entries = Vec::with_capacity(touched.len());
    for &j in &touched {
        let r = scratch[j];
        scratch[j] = T::zero();
        let scale = y.get(j).abs().max(T::one());
        if !r.is_zero() && r.abs() > tol * scale {
            entries.push((j, r));
        }
    }
    SparseRealVector::from_entries(y.dim(), entries).expect("indices sorted and in range")
}

/// `R = Y - Â X̂`, pruning entries below `tol * max(1, |Y_ji|)`.
///
/// `tol = 0` keeps every nonzero difference.
pub fn residual<T: Scalar>(
    y: &SparseCodeMatrix<T>,
    ahat: &BinaryColumnMatrix,
    xhat: &SparseCodeMatrix<T>,
    tol: T,
) -> Result<SparseCodeMatrix<T>> {
    if ahat.rows() != y.rows() || ahat.cols() != xhat.rows() || xhat.cols() != y.cols() {
        return Err(Error::Shape(format!(
            "Y is {}x{}, Â is {}x{}, X̂ is {}x{}",
            y.rows(),
            y.cols(),
            ahat.rows(),
            ahat.cols(),
            xhat.rows(),
            xhat.cols()
        )));
    }
    let mut scratch = vec![T::zero(); y.rows()];
    let columns = y
        .columns()
        .iter()
        .zip(xhat.columns())
        .map(|(yc, xc)| residual_column(yc, ahat, xc, tol, &mut scratch))
        .collect();
    SparseCodeMatrix::from_columns(y.rows(), columns)
}
