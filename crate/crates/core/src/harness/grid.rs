use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;

use crate::debf::{debf_run, RunError};
use crate::error::Result;
use crate::harness::config::{GridConfig, TrialConfig};
use crate::psb::sample_instance;
use crate::rng::derive_seed;
use crate::scalar::Scalar;
use crate::verify::exact_recovery;

/// Outcome of one seeded trial.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialResult {
    /// `100 ‖Y - ÂX̂‖_F / ‖Y‖_F`.
    pub residual_pct: f64,
    /// Driver while-iterations.
    pub iterations: usize,
    pub exact: bool,
    pub wall_ms: u64,
}

/// Seed of trial `trial` in cell `(k, N)`; cells can be re-run individually.
pub fn trial_seed(master: u64, k: usize, samples: usize, trial: usize) -> u64 {
    derive_seed(master, &[k as u64, samples as u64, trial as u64])
}

/// Samples a fresh instance for `trial` and factorises it. Hitting the
/// iteration limit is not an error: the partial reconstruction is scored.
pub fn run_trial<T: Scalar>(cfg: &TrialConfig, trial: usize) -> Result<TrialResult> {
    let start = Instant::now();
    let params = cfg.psb_params(trial_seed(cfg.seed, cfg.k, cfg.samples, trial));
    let inst = sample_instance::<T>(&params)?;
    let out = match debf_run(&inst.measurements, cfg.n, &cfg.options()) {
        Ok(out) => out,
        Err(RunError::IterationLimit { partial, .. }) => *partial,
        Err(RunError::Invalid(e)) => return Err(e),
    };
    let exact = exact_recovery(
        &out.ahat,
        &out.xhat,
        &inst.encoder,
        &inst.codes,
        T::from_f64_lossy(cfg.tol),
    );
    Ok(TrialResult {
        residual_pct: out.residual_pct(&inst.measurements),
        iterations: out.iterations,
        exact,
        wall_ms: start.elapsed().as_millis() as u64,
    })
}

/// Averages over the successful trials of one cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CellSummary {
    pub k: usize,
    pub samples: usize,
    pub k_over_n_pct: f64,
    pub mean_residual_pct: f64,
    pub mean_iterations: f64,
    pub exact_count: usize,
    pub mean_wall_ms: f64,
    /// Trials that could not be run, e.g. because sampling failed.
    pub failures: usize,
}

impl CellSummary {
    pub const CSV_HEADER: &'static str =
        "k,N,k_over_n_pct,mean_residual_pct,mean_iterations,exact_count,mean_wall_ms,failures";

    pub fn summarise(cfg: &TrialConfig, results: &[Result<TrialResult>]) -> Self {
        let ok: Vec<&TrialResult> = results.iter().filter_map(|r| r.as_ref().ok()).collect();
        let mean = |f: &dyn Fn(&TrialResult) -> f64| {
            if ok.is_empty() {
                f64::NAN
            } else {
                ok.iter().map(|r| f(r)).sum::<f64>() / ok.len() as f64
            }
        };
        CellSummary {
            k: cfg.k,
            samples: cfg.samples,
            k_over_n_pct: 100.0 * cfg.k as f64 / cfg.n as f64,
            mean_residual_pct: mean(&|r| r.residual_pct),
            mean_iterations: mean(&|r| r.iterations as f64),
            exact_count: ok.iter().filter(|r| r.exact).count(),
            mean_wall_ms: mean(&|r| r.wall_ms as f64),
            failures: results.len() - ok.len(),
        }
    }

    /// One CSV line; the timing column is 0 unless `timing` is set.
    pub fn csv_row(&self, timing: bool) -> String {
        format!(
            "{},{},{},{:.6},{:.3},{},{:.3},{}",
            self.k,
            self.samples,
            self.k_over_n_pct,
            self.mean_residual_pct,
            self.mean_iterations,
            self.exact_count,
            if timing { self.mean_wall_ms } else { 0.0 },
            self.failures
        )
    }
}

/// Runs every trial of every cell and summarises each cell, in the order of
/// [`GridConfig::cells`] whatever order the trials finish in.
pub fn run_grid<T: Scalar>(grid: &GridConfig, parallel: bool) -> Result<Vec<CellSummary>> {
    grid.validate()?;
    let cells = grid.cells();
    let jobs: Vec<(usize, usize)> = cells
        .iter()
        .enumerate()
        .flat_map(|(c, cfg)| (0..cfg.trials).map(move |t| (c, t)))
        .collect();
    let run = |&(c, t): &(usize, usize)| {
        let r = run_trial::<T>(&cells[c], t);
        if let Err(e) = &r {
            log::warn!("k = {}, N = {}, trial {t} failed: {e}", cells[c].k, cells[c].samples);
        }
        r
    };
    let results: Vec<Result<TrialResult>> = if parallel {
        jobs.par_iter().map(run).collect()
    } else {
        jobs.iter().map(run).collect()
    };
    let mut results = results.into_iter();
    Ok(cells
        .iter()
        .map(|cfg| {
            let chunk: Vec<_> = results.by_ref().take(cfg.trials).collect();
            CellSummary::summarise(cfg, &chunk)
        })
        .collect())
}

pub fn write_grid_csv<W: Write>(mut w: W, cells: &[CellSummary], timing: bool) -> Result<()> {
    writeln!(w, "{}", CellSummary::CSV_HEADER)?;
    for cell in cells {
        writeln!(w, "{}", cell.csv_row(timing))?;
    }
    Ok(())
}
