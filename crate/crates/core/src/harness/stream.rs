use crate::debf::{debf_continue, decode, DebfOptions, Factorisation, FactorisationState, RunError, StepCounters};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::sparse::{residual, residual_column, SparseCodeMatrix, SparseRealVector};

/// What one call to [`StreamIngest::ingest`] did.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct IngestReport {
    pub columns: usize,
    /// The batch was decoded against a stable encoder instead of running the
    /// driver.
    pub direct: bool,
    /// Driver iterations run for this batch.
    pub iterations: usize,
    /// The warm-started pass left a residual, so the driver was re-run from
    /// empty reconstructions over every retained column.
    pub restarted: bool,
    /// Columns of a direct batch left with a nonzero residual. Any such
    /// column ends stability and the driver then runs on the batch.
    pub unresolved: usize,
}

/// Online factorisation of measurement columns that arrive in batches.
///
/// Every column received so far is retained. Each batch triggers a driver
/// run over all retained columns, warm-started from the current state; if
/// that run cannot fit the retained columns exactly it is repeated from
/// scratch, so the state after a batch that leaves a residual is exactly
/// the batch result on everything received. Once the estimate holds `n`
/// complete columns and fits every retained column, new columns are only
/// decoded, until one of them cannot be fitted. When `n` is not given `Â`
/// grows as needed and never counts as stable.
#[derive(Debug, Clone)]
pub struct StreamIngest<T: Scalar> {
    y: SparseCodeMatrix<T>,
    state: FactorisationState<T>,
    opts: DebfOptions<T>,
    n: Option<usize>,
    stable: bool,
}

impl<T: Scalar> StreamIngest<T> {
    pub fn new(m: usize, n: Option<usize>, opts: DebfOptions<T>) -> Result<Self> {
        opts.validate()?;
        let mut stream = Self {
            y: SparseCodeMatrix::zeros(m, 0),
            state: FactorisationState::new(m, 0, 0),
            opts,
            n,
            stable: false,
        };
        stream.state = stream.fresh_state();
        Ok(stream)
    }

    pub fn ingest(&mut self, batch: Vec<SparseRealVector<T>>) -> Result<IngestReport> {
        let mut report = IngestReport {
            columns: batch.len(),
            ..IngestReport::default()
        };
        if batch.is_empty() {
            return Ok(report);
        }
        if let Some(bad) = batch.iter().find(|c| c.dim() != self.y.rows()) {
            return Err(Error::Shape(format!(
                "column of length {} fed to a stream of {} rows",
                bad.dim(),
                self.y.rows()
            )));
        }
        let first = self.y.cols();
        self.state.append_samples(batch.len());
        for column in batch {
            self.y.push_column(column)?;
        }
        if self.stable {
            report.direct = true;
            let params = self.opts.step_params();
            let mut scratch = vec![T::zero(); self.y.rows()];
            for c in first..self.y.cols() {
                decode(self.y.column(c), &mut self.state, c, &params);
                let r = residual_column(
                    self.y.column(c),
                    self.state.ahat(),
                    self.state.xhat().column(c),
                    self.opts.tol,
                    &mut scratch,
                );
                report.unresolved += usize::from(!r.is_zero());
            }
            if report.unresolved == 0 {
                return Ok(report);
            }
            self.stable = false;
        }
        let mut out = self.drive()?;
        report.iterations = out.iterations;
        if !out.is_exact_fit() {
            let counters = self.state.counters;
            self.state = self.fresh_state();
            self.state.counters = counters;
            out = self.drive()?;
            report.restarted = true;
            report.iterations += out.iterations;
        }
        if let Some(n) = self.n {
            let complete = self.state.complete_columns(self.opts.d).iter().filter(|&&c| c).count();
            self.stable = complete == n && out.is_exact_fit();
        }
        Ok(report)
    }

    fn fresh_state(&self) -> FactorisationState<T> {
        match self.n {
            Some(n) => FactorisationState::new(self.y.rows(), n, self.y.cols()),
            None => FactorisationState::growable(self.y.rows(), self.y.cols()),
        }
    }

    fn drive(&mut self) -> Result<Factorisation<T>> {
        match debf_continue(&self.y, &mut self.state, &self.opts, |_, _| {}) {
            Ok(out) => Ok(out),
            Err(RunError::IterationLimit { partial, .. }) => Ok(*partial),
            Err(RunError::Invalid(e)) => Err(e),
        }
    }

    pub fn is_stable(&self) -> bool {
        self.stable
    }

    pub fn state(&self) -> &FactorisationState<T> {
        &self.state
    }

    pub fn counters(&self) -> StepCounters {
        self.state.counters
    }

    /// All columns received so far.
    pub fn measurements(&self) -> &SparseCodeMatrix<T> {
        &self.y
    }

    pub fn residual(&self) -> Result<SparseCodeMatrix<T>> {
        residual(&self.y, self.state.ahat(), self.state.xhat(), self.opts.tol)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparse::{product, BinaryColumnMatrix};

    fn disjoint() -> BinaryColumnMatrix {
        BinaryColumnMatrix::from_supports(9, vec![vec![0, 1, 2], vec![3, 4, 5], vec![6, 7, 8]]).unwrap()
    }

    fn columns(x: &[Vec<f64>]) -> Vec<SparseRealVector<f64>> {
        let y = product(&disjoint(), &SparseCodeMatrix::from_dense(x).unwrap()).unwrap();
        y.columns().to_vec()
    }

    #[test]
    fn empty_batch_is_a_no_op() {
        let mut s = StreamIngest::<f64>::new(9, Some(3), DebfOptions::new(3)).unwrap();
        assert_eq!(s.ingest(vec![]).unwrap(), IngestReport::default());
        assert_eq!(s.measurements().cols(), 0);
        assert_eq!(s.counters(), StepCounters::default());
    }

    #[test]
    fn stable_stream_decodes_new_columns_directly() {
        let mut s = StreamIngest::<f64>::new(9, Some(3), DebfOptions::new(3)).unwrap();
        let first = columns(&[vec![1.0, 0.0], vec![2.0, 0.0], vec![0.0, 3.0]]);
        assert!(!s.ingest(first).unwrap().direct);
        assert!(s.is_stable());
        let before = s.counters();
        let report = s.ingest(columns(&[vec![0.5], vec![0.0], vec![4.0]])).unwrap();
        assert!(report.direct);
        assert_eq!(report.unresolved, 0);
        let after = s.counters();
        assert_eq!(after.cluster_calls, before.cluster_calls);
        assert_eq!(after.extract_calls, before.extract_calls);
        assert_eq!(after.decode_calls, before.decode_calls + 1);
        assert!(s.residual().unwrap().is_zero());
    }

    #[test]
    fn unknown_width_grows_the_encoder() {
        let mut s = StreamIngest::<f64>::new(9, None, DebfOptions::new(3)).unwrap();
        s.ingest(columns(&[vec![1.0], vec![0.0], vec![0.0]])).unwrap();
        s.ingest(columns(&[vec![0.0, 2.0], vec![5.0, 0.0], vec![0.0, 7.0]])).unwrap();
        assert!(!s.is_stable());
        assert_eq!(s.state().nonzero_columns(), 3);
        assert!(s.residual().unwrap().is_zero());
    }

    #[test]
    fn wrong_length_is_rejected() {
        let mut s = StreamIngest::<f64>::new(9, Some(3), DebfOptions::new(3)).unwrap();
        assert!(s.ingest(vec![SparseRealVector::zeros(4)]).is_err());
    }

    #[test]
    fn unfittable_column_ends_stability() {
        let mut s = StreamIngest::<f64>::new(9, Some(3), DebfOptions::new(3)).unwrap();
        s.ingest(columns(&[vec![1.0, 0.0], vec![2.0, 0.0], vec![0.0, 3.0]])).unwrap();
        assert!(s.is_stable());
        let stray = SparseRealVector::from_entries(9, vec![(0, 5.0), (4, 1.0)]).unwrap();
        let report = s.ingest(vec![stray]).unwrap();
        assert!(report.direct);
        assert_eq!(report.unresolved, 1);
        assert!(report.iterations > 0);
        assert!(!s.is_stable());
    }
}
