//! Sampling from the permuted striped block model: a random expander encoder
//! `A`, a random column-sparse code `X`, and their product `Y = A X`.

use crate::encoder::{generate_encoder, EncoderParams};
use crate::error::{Error, Result};
use crate::rng::{below, derive_seed, rng_from_seed, unit_f64};
use crate::scalar::Scalar;
use crate::sparse::{product, BinaryColumnMatrix, SparseCodeMatrix, SparseRealVector};

const ENCODER_STREAM: u64 = 0xA;
const CODE_STREAM: u64 = 0xC;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsbParams {
    pub d: usize,
    pub k: usize,
    pub m: usize,
    pub n: usize,
    /// Number of measurement columns `N`.
    pub samples: usize,
    pub coeff_low: f64,
    pub coeff_high: f64,
    pub seed: u64,
}

impl PsbParams {
    /// Parameters with coefficients uniform on `[0.1, 10.1]`.
    pub fn new(d: usize, k: usize, m: usize, n: usize, samples: usize, seed: u64) -> Self {
        Self {
            d,
            k,
            m,
            n,
            samples,
            coeff_low: 0.1,
            coeff_high: 10.1,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 || self.k > self.n {
            return Err(Error::InvalidParameter(format!(
                "need 1 <= k <= n, got k = {}, n = {}",
                self.k, self.n
            )));
        }
        if self.k >= self.m {
            return Err(Error::InvalidParameter(format!(
                "need k < m, got k = {}, m = {}",
                self.k, self.m
            )));
        }
        if !(self.coeff_low > 0.0 && self.coeff_low < self.coeff_high) {
            return Err(Error::InvalidParameter(format!(
                "need 0 < coeff_low < coeff_high, got [{}, {}]",
                self.coeff_low, self.coeff_high
            )));
        }
        self.encoder_params().validate()
    }

    pub fn encoder_params(&self) -> EncoderParams {
        EncoderParams {
            m: self.m,
            n: self.n,
            d: self.d,
            seed: derive_seed(self.seed, &[ENCODER_STREAM]),
        }
    }

    /// Seed of code column `col`; columns can be sampled independently.
    pub fn column_seed(&self, col: usize) -> u64 {
        derive_seed(self.seed, &[CODE_STREAM, col as u64])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PsbInstance<T> {
    pub encoder: BinaryColumnMatrix,
    pub codes: SparseCodeMatrix<T>,
    pub measurements: SparseCodeMatrix<T>,
}

/// Samples one `k`-sparse code column. `buffer` must hold a permutation of
/// `0..n`; it is restored before returning.
fn sample_column<T: Scalar>(params: &PsbParams, col: usize, buffer: &mut [usize]) -> SparseRealVector<T> {
    let mut rng = rng_from_seed(params.column_seed(col));
    let n = buffer.len();
    let mut swaps = Vec::with_capacity(params.k);
    for i in 0..params.k {
        let j = i + below(&mut rng, (n - i) as u64) as usize;
        buffer.swap(i, j);
        swaps.push(j);
    }
    let width = params.coeff_high - params.coeff_low;
    let rows = buffer[..params.k].to_vec();
    for (i, &j) in swaps.iter().enumerate().rev() {
        buffer.swap(i, j);
    }
    loop {
        let entries: Vec<(usize, T)> = rows
            .iter()
            .map(|&row| (row, T::from_f64_lossy(params.coeff_low + width * unit_f64(&mut rng))))
            .collect();
        let column = SparseRealVector::from_entries(n, entries).expect("distinct in-range rows");
        let checkable = params.k <= DISSOCIATED_GUARD;
        if !checkable || verify_dissociated(&column, T::default_tolerance(), DISSOCIATED_GUARD).unwrap_or(true) {
            return column;
        }
    }
}

/// Samples `X`: `N` independent columns, each with a uniformly random support
/// of size `k` and coefficients i.i.d. uniform on `[coeff_low, coeff_high]`.
/// When `k` is small enough to enumerate subset sums, coefficients are
/// redrawn until the column is dissociated at the scalar's default tolerance.
pub fn sample_x<T: Scalar>(params: &PsbParams) -> Result<SparseCodeMatrix<T>> {
    if params.k == 0 || params.k > params.n {
        return Err(Error::InvalidParameter(format!(
            "need 1 <= k <= n, got k = {}, n = {}",
            params.k, params.n
        )));
    }
    let mut buffer: Vec<usize> = (0..params.n).collect();
    let columns = (0..params.samples)
        .map(|c| sample_column(params, c, &mut buffer))
        .collect();
    SparseCodeMatrix::from_columns(params.n, columns)
}

/// Single code column, identical to column `col` of [`sample_x`].
pub fn sample_x_column<T: Scalar>(params: &PsbParams, col: usize) -> SparseRealVector<T> {
    let mut buffer: Vec<usize> = (0..params.n).collect();
    sample_column(params, col, &mut buffer)
}

pub fn sample_instance<T: Scalar>(params: &PsbParams) -> Result<PsbInstance<T>> {
    params.validate()?;
    let encoder = generate_encoder(&params.encoder_params())?;
    let codes = sample_x(params)?;
    let measurements = product(&encoder, &codes)?;
    Ok(PsbInstance {
        encoder,
        codes,
        measurements,
    })
}

/// Largest support [`verify_dissociated`] enumerates by default.
pub const DISSOCIATED_GUARD: usize = 14;

/// True iff all `2^s` subset sums of the nonzeros of `x` differ pairwise by
/// more than `tol`.
pub fn verify_dissociated<T: Scalar>(x: &SparseRealVector<T>, tol: T, guard: usize) -> Result<bool> {
    let s = x.nnz();
    if s > guard {
        return Err(Error::EnumerationGuard(format!("support {s} exceeds guard {guard}")));
    }
    let values = x.values();
    let mut sums = vec![T::zero(); 1 << s];
    for mask in 1usize..(1 << s) {
        let low = mask.trailing_zeros() as usize;
        sums[mask] = sums[mask & (mask - 1)] + values[low];
    }
    sums.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    Ok(sums.windows(2).all(|w| w[1] - w[0] > tol))
}

/// `β (μ (n/k) ln n + 1)` rounded up: the number of measurement columns after
/// which every row of `X` holds at least `β` nonzeros with probability above
/// `(1 - n^{-(μ-1)})^β`.
pub fn sample_size_bound_for_beta(beta: f64, n: usize, k: usize, mu: f64) -> Result<u64> {
    if !(mu > 1.0) || k == 0 || n == 0 || !(beta > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "need mu > 1, beta > 0, n, k >= 1; got mu = {mu}, beta = {beta}, n = {n}, k = {k}"
        )));
    }
    let v = beta * (mu * (n as f64 / k as f64) * (n as f64).ln() + 1.0);
    Ok(v.ceil() as u64)
}

/// [`sample_size_bound_for_beta`] with `β = (1 + 2ε) d L`.
pub fn sample_size_bound(n: usize, k: usize, d: usize, epsilon: f64, mu: f64, l: usize) -> Result<u64> {
    let mut beta = (1.0 + 2.0 * epsilon) * d as f64 * l as f64;
    if (beta - beta.round()).abs() < 1e-9 {
        beta = beta.round();
    }
    sample_size_bound_for_beta(beta, n, k, mu)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn columns_have_k_nonzeros_in_range() {
        let p = PsbParams::new(2, 2, 4, 8, 3, 17);
        let x: SparseCodeMatrix<f64> = sample_x(&p).unwrap();
        assert_eq!(x.cols(), 3);
        for c in x.columns() {
            assert_eq!(c.nnz(), 2);
            assert!(c.values().iter().all(|&v| (0.1..=10.1).contains(&v)));
        }
    }

    #[test]
    fn full_support_when_k_equals_n() {
        let p = PsbParams::new(1, 5, 6, 5, 4, 1);
        let x: SparseCodeMatrix<f64> = sample_x(&p).unwrap();
        assert!(x.columns().iter().all(|c| c.nnz() == 5));
    }

    #[test]
    fn rejects_k_above_n() {
        let p = PsbParams::new(1, 6, 8, 5, 4, 1);
        assert!(sample_x::<f64>(&p).is_err());
        assert!(p.validate().is_err());
    }

    #[test]
    fn single_columns_match_the_batch() {
        let p = PsbParams::new(3, 4, 20, 30, 25, 5);
        let x: SparseCodeMatrix<f64> = sample_x(&p).unwrap();
        for c in [0, 7, 24] {
            assert_eq!(&sample_x_column::<f64>(&p, c), x.column(c));
        }
    }

    #[test]
    fn dissociated_examples() {
        let yes = SparseRealVector::from_dense(&[1.0, 2.0, 4.0]);
        let no = SparseRealVector::from_dense(&[1.0, 2.0, 3.0]);
        assert!(verify_dissociated(&yes, 1e-9, DISSOCIATED_GUARD).unwrap());
        assert!(!verify_dissociated(&no, 1e-9, DISSOCIATED_GUARD).unwrap());
        let big = SparseRealVector::from_dense(&[1.0; 15]);
        assert!(verify_dissociated(&big, 1e-9, DISSOCIATED_GUARD).is_err());
    }

    #[test]
    fn instance_product_on_disjoint_encoder() {
        let a = BinaryColumnMatrix::from_supports(6, vec![vec![0, 1], vec![2, 3], vec![4, 5]]).unwrap();
        let x = SparseCodeMatrix::from_dense(&[vec![5.0], vec![0.0], vec![0.0]]).unwrap();
        let y = product(&a, &x).unwrap();
        assert_eq!(y.column(0).indices(), &[0, 1]);
        assert_eq!(y.column(0).values(), &[5.0, 5.0]);
    }

    #[test]
    fn sample_instance_has_no_zero_measurements() {
        let p = PsbParams::new(4, 3, 24, 30, 40, 9);
        let inst: PsbInstance<f64> = sample_instance(&p).unwrap();
        assert!(inst.measurements.columns().iter().all(|c| !c.is_zero()));
        assert_eq!(inst.measurements.rows(), 24);
    }

    #[test]
    fn sample_size_examples() {
        assert_eq!(sample_size_bound_for_beta(1.0, 100, 10, 2.0).unwrap(), 94);
        let near_one = sample_size_bound_for_beta(1.0, 100, 10, 1.0001).unwrap();
        assert!(near_one < 94);
        let doubled = sample_size_bound_for_beta(1.0, 200, 10, 2.0).unwrap();
        assert!(doubled > 2 * 94 - 1);
        // β = (1 + 1/3) * 10 * 3 = 40
        let n = sample_size_bound(200, 10, 10, 1.0 / 6.0, 2.0, 3).unwrap();
        assert_eq!(n, (40.0 * (2.0 * 20.0 * 200f64.ln() + 1.0)).ceil() as u64);
        assert!(sample_size_bound_for_beta(1.0, 100, 10, 1.0).is_err());
    }
}
