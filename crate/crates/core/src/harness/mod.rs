//! Experiment orchestration: configuration files, seeded trial grids and
//! streaming ingest.

pub mod config;
pub mod grid;
pub mod stream;

pub use config::{EpsilonMode, GridConfig, Settings, TrialConfig};
pub use grid::{run_grid, run_trial, trial_seed, write_grid_csv, CellSummary, TrialResult};
pub use stream::{IngestReport, StreamIngest};
