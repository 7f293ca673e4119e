//! Executable correctness predicates: matching reconstructions to ground truth
//! up to a column permutation, the accuracy conditions maintained by the
//! drivers, the singleton-existence bound, and a uniqueness certificate.

use std::collections::{HashMap, HashSet};

use crate::error::{Error, Result};
use crate::psb::{verify_dissociated, DISSOCIATED_GUARD};
use crate::scalar::{approx_eq, Scalar};
use crate::sparse::{product, residual, BinaryColumnMatrix, SparseCodeMatrix, SparseRealVector};
use crate::thresholds::{at_least, exceeds};

/// Correspondence between reconstructed and true encoder columns.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PermutationMatch {
    /// `mapping[l]` is the true column containing `supp(â_l)`; `None` for zero
    /// or unmatched columns.
    pub mapping: Vec<Option<usize>>,
    /// Bijective, with `Â Pᵀ = A` and `P X̂ = X`.
    pub exact: bool,
    /// `supp(Â Pᵀ) ⊆ supp(A)`, `supp(P X̂) ⊆ supp(X)` and equal values on
    /// `supp(X̂)`.
    pub containment: bool,
}

impl PermutationMatch {
    pub fn matched_columns(&self) -> usize {
        self.mapping.iter().flatten().count()
    }
}

fn check_shapes<T: Scalar>(
    ahat: &BinaryColumnMatrix,
    xhat: &SparseCodeMatrix<T>,
    a: &BinaryColumnMatrix,
    x: &SparseCodeMatrix<T>,
) -> Result<()> {
    if ahat.rows() != a.rows()
        || ahat.cols() != xhat.rows()
        || a.cols() != x.rows()
        || xhat.cols() != x.cols()
        || ahat.cols() != a.cols()
    {
        return Err(Error::Shape(format!(
            "Â {}x{}, X̂ {}x{}, A {}x{}, X {}x{}",
            ahat.rows(),
            ahat.cols(),
            xhat.rows(),
            xhat.cols(),
            a.rows(),
            a.cols(),
            x.rows(),
            x.cols()
        )));
    }
    Ok(())
}

/// True columns whose support contains `support`.
fn containing_columns(rows: &[Vec<usize>], support: &[usize]) -> Vec<usize> {
    let Some((&first, rest)) = support.split_first() else {
        return Vec::new();
    };
    let mut candidates = rows[first].clone();
    for &r in rest {
        let other = &rows[r];
        candidates.retain(|c| other.binary_search(c).is_ok());
        if candidates.is_empty() {
            break;
        }
    }
    candidates
}

fn rows_equal<T: Scalar>(a: &[(usize, T)], b: &[(usize, T)], tol: T) -> bool {
    a.len() == b.len()
        && a.iter()
            .zip(b)
            .all(|(&(i, u), &(j, v))| i == j && approx_eq(v, u, tol))
}

/// Greedy containment matching of `(Â, X̂)` against `(A, X)`.
///
/// Each nonzero column of `Â` is mapped to the unique column of `A` whose
/// support contains it. More than one candidate is an error: it cannot happen
/// for sufficiently large partial columns of an expander.
pub fn match_up_to_permutation<T: Scalar>(
    ahat: &BinaryColumnMatrix,
    xhat: &SparseCodeMatrix<T>,
    a: &BinaryColumnMatrix,
    x: &SparseCodeMatrix<T>,
    tol: T,
) -> Result<PermutationMatch> {
    check_shapes(ahat, xhat, a, x)?;
    let a_rows = a.row_supports();
    let xhat_rows = xhat.row_entries();
    let x_rows = x.row_entries();
    let mut mapping = vec![None; ahat.cols()];
    let mut taken = vec![false; a.cols()];
    let mut containment = true;
    for l in 0..ahat.cols() {
        if ahat.is_zero_column(l) {
            if !xhat_rows[l].is_empty() {
                containment = false;
            }
            continue;
        }
        let candidates = containing_columns(&a_rows, ahat.support(l));
        match candidates.len() {
            0 => containment = false,
            1 => {
                let j = candidates[0];
                if taken[j] {
                    containment = false;
                    continue;
                }
                taken[j] = true;
                mapping[l] = Some(j);
                let values_ok = xhat_rows[l].iter().all(|&(c, v)| {
                    let truth = x.get(j, c);
                    !truth.is_zero() && approx_eq(truth, v, tol)
                });
                containment &= values_ok;
            }
            _ => {
                return Err(Error::AmbiguousContainment {
                    column: l,
                    candidates,
                })
            }
        }
    }
    let exact = containment
        && mapping.iter().all(Option::is_some)
        && mapping.iter().enumerate().all(|(l, j)| {
            let j = j.expect("all mapped");
            ahat.support(l) == a.support(j) && rows_equal(&xhat_rows[l], &x_rows[j], tol)
        });
    Ok(PermutationMatch {
        mapping,
        exact,
        containment,
    })
}

/// True iff some column permutation `P` gives `Â Pᵀ = A` and `P X̂ = X`
/// (values within `tol`). Tolerates duplicate columns in `A`.
pub fn exact_recovery<T: Scalar>(
    ahat: &BinaryColumnMatrix,
    xhat: &SparseCodeMatrix<T>,
    a: &BinaryColumnMatrix,
    x: &SparseCodeMatrix<T>,
    tol: T,
) -> bool {
    if check_shapes(ahat, xhat, a, x).is_err() {
        return false;
    }
    let mut by_support: HashMap<&[usize], Vec<usize>> = HashMap::new();
    for (j, s) in a.supports().iter().enumerate() {
        by_support.entry(s.as_slice()).or_default().push(j);
    }
    let xhat_rows = xhat.row_entries();
    let x_rows = x.row_entries();
    let mut taken = vec![false; a.cols()];
    for (l, s) in ahat.supports().iter().enumerate() {
        let Some(candidates) = by_support.get(s.as_slice()) else {
            return false;
        };
        let hit = candidates
            .iter()
            .copied()
            .find(|&j| !taken[j] && rows_equal(&xhat_rows[l], &x_rows[j], tol));
        match hit {
            Some(j) => taken[j] = true,
            None => return false,
        }
    }
    true
}

/// The accuracy predicate maintained by both drivers: nonzero columns of `Â`
/// correspond to nonzero rows of `X̂`, each holds more than `(1 - 2ε)d` ones,
/// and the containment matching succeeds.
pub fn accuracy_predicate<T: Scalar>(
    ahat: &BinaryColumnMatrix,
    xhat: &SparseCodeMatrix<T>,
    a: &BinaryColumnMatrix,
    x: &SparseCodeMatrix<T>,
    epsilon: f64,
    d: usize,
    tol: T,
) -> Result<bool> {
    let live_rows = xhat.nonzero_rows();
    let floor = (1.0 - 2.0 * epsilon) * d as f64;
    for l in 0..ahat.cols() {
        let nonzero = !ahat.is_zero_column(l);
        if nonzero != live_rows[l] || (nonzero && !exceeds(ahat.cardinality(l), floor)) {
            return Ok(false);
        }
    }
    Ok(match_up_to_permutation(ahat, xhat, a, x, tol)?.containment)
}

/// Checks the singleton-existence bound for `r = A z`: the number of nonzeros
/// `z_l` occurring more than `(1 - 2ε)d` times in `r` is at least
/// `|supp(z)| / ((1 + 2ε)d)`.
pub fn singleton_bound_check<T: Scalar>(
    a: &BinaryColumnMatrix,
    z: &SparseRealVector<T>,
    epsilon: f64,
    d: usize,
    tol: T,
) -> Result<bool> {
    let r = product_column(a, z)?;
    let floor = (1.0 - 2.0 * epsilon) * d as f64;
    let frequent = z
        .values()
        .iter()
        .filter(|&&v| {
            let count = r.values().iter().filter(|&&u| approx_eq(v, u, tol)).count();
            exceeds(count, floor)
        })
        .count();
    let bound = z.nnz() as f64 / ((1.0 + 2.0 * epsilon) * d as f64);
    Ok(at_least(frequent, bound))
}

fn product_column<T: Scalar>(a: &BinaryColumnMatrix, z: &SparseRealVector<T>) -> Result<SparseRealVector<T>> {
    let single = SparseCodeMatrix::from_columns(z.dim(), vec![z.clone()])?;
    Ok(product(a, &single)?.column(0).clone())
}

/// Certifies that `(Â, X̂)` is a factorisation of `Y` of the recoverable
/// class: zero residual, every nonzero encoder column of weight `d`, nonzero
/// columns exactly matching nonzero code rows, pairwise distinct columns, and
/// dissociated code columns (checked when small enough to enumerate).
pub fn uniqueness_certificate<T: Scalar>(
    y: &SparseCodeMatrix<T>,
    ahat: &BinaryColumnMatrix,
    xhat: &SparseCodeMatrix<T>,
    d: usize,
    tol: T,
) -> Result<bool> {
    if !residual(y, ahat, xhat, tol)?.is_zero() {
        return Ok(false);
    }
    let live_rows = xhat.nonzero_rows();
    let mut seen: HashSet<&[usize]> = HashSet::new();
    for (l, s) in ahat.supports().iter().enumerate() {
        if s.is_empty() {
            if live_rows[l] {
                return Ok(false);
            }
            continue;
        }
        if s.len() != d || !live_rows[l] || !seen.insert(s.as_slice()) {
            return Ok(false);
        }
    }
    for c in xhat.columns() {
        if c.nnz() <= DISSOCIATED_GUARD && !verify_dissociated(c, tol, DISSOCIATED_GUARD)? {
            return Ok(false);
        }
    }
    Ok(true)
}
