mod common;

use std::io::Write;

use common::sorted_supports;
use psb_factor::harness::{run_grid, trial_seed, write_grid_csv, GridConfig, Settings, StreamIngest};
use psb_factor::*;

fn grid_csv(grid: &GridConfig, parallel: bool) -> Vec<u8> {
    let cells = run_grid::<f64>(grid, parallel).unwrap();
    let mut out = Vec::new();
    write_grid_csv(&mut out, &cells, grid.timing).unwrap();
    out
}

fn small_grid() -> GridConfig {
    let s = Settings::parse("n = 60\nm = 48\nd = 6\nk = 2, 4\nN = 40, 80\ntrials = 3\nseed = 11").unwrap();
    GridConfig::from_settings(&s).unwrap()
}

#[test]
fn grid_csv_is_a_function_of_the_configuration() {
    let g = small_grid();
    let first = grid_csv(&g, true);
    assert_eq!(first, grid_csv(&g, true));
    assert_eq!(first, grid_csv(&g, false));
    let text = String::from_utf8(first).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 5);
    assert!(lines[0].starts_with("k,N,k_over_n_pct,mean_residual_pct,mean_iterations,exact_count,mean_wall_ms"));
    let mut other = g.clone();
    other.base.seed = 12;
    assert_ne!(text.into_bytes(), grid_csv(&other, true));
}

#[test]
fn single_cell_grid_gives_one_row() {
    let s = Settings::parse("n = 40\nm = 32\nd = 4\nk = 3\nN = 30\ntrials = 2").unwrap();
    let csv = grid_csv(&GridConfig::from_settings(&s).unwrap(), true);
    assert_eq!(String::from_utf8(csv).unwrap().lines().count(), 2);
}

#[test]
fn exact_trials_leave_only_float_dust() {
    let g = small_grid();
    for cfg in g.cells() {
        for t in 0..cfg.trials {
            let r = psb_factor::harness::run_trial::<f64>(&cfg, t).unwrap();
            assert!(r.residual_pct >= 0.0);
            if r.exact {
                assert!(r.residual_pct < 1e-6, "{r:?}");
            }
        }
    }
}

#[test]
fn trial_seeds_depend_on_every_coordinate() {
    let mut seen = std::collections::HashSet::new();
    for k in 1..5 {
        for samples in [100, 200] {
            for trial in 0..10 {
                assert!(seen.insert(trial_seed(3, k, samples, trial)));
            }
        }
    }
}

#[test]
fn settings_files_are_read_and_overridden() {
    let mut file = tempfile::NamedTempFile::new().unwrap();
    writeln!(file, "# small sweep\nn = 50\nm = 40 # rows\nd = 5\nk_pct = 2..6:2\nN = 30\ntrials = 1").unwrap();
    let mut s = Settings::load(file.path()).unwrap();
    s.set("N", "20, 40");
    let g = GridConfig::from_settings(&s).unwrap();
    assert_eq!(g.ks, vec![1, 2, 3]);
    assert_eq!(g.sample_counts, vec![20, 40]);
    assert_eq!(g.cells().len(), 6);
    assert_eq!((g.cells()[0].k, g.cells()[0].samples), (1, 20));
    assert_eq!((g.cells()[3].k, g.cells()[3].samples), (1, 40));
    assert!(Settings::load(file.path().with_extension("missing")).is_err());
}

fn stream_all(y: &CodeMatrix, n: usize, d: usize, batch: usize) -> StreamIngest<f64> {
    let mut s = StreamIngest::new(y.rows(), Some(n), Options::new(d)).unwrap();
    for chunk in y.columns().chunks(batch) {
        s.ingest(chunk.to_vec()).unwrap();
    }
    s
}

#[test]
fn streaming_matches_the_batch_run() {
    for seed in 0..8 {
        let inst: Instance = sample_instance(&PsbParams::new(6, 3, 48, 60, 150, seed)).unwrap();
        let y = &inst.measurements;
        let batch = match debf_run(y, 60, &Options::new(6)) {
            Ok(out) => out,
            Err(RunError::IterationLimit { partial, .. }) => *partial,
            Err(e) => panic!("{e:?}"),
        };
        for size in [1, 50] {
            let s = stream_all(y, 60, 6, size);
            let st = s.state();
            assert_eq!(sorted_supports(st.ahat()), sorted_supports(&batch.ahat), "seed {seed} batch {size}");
            assert_eq!(
                exact_recovery(st.ahat(), st.xhat(), &inst.encoder, &inst.codes, 1e-9),
                exact_recovery(&batch.ahat, &batch.xhat, &inst.encoder, &inst.codes, 1e-9)
            );
        }
    }
}

#[test]
fn stream_after_stabilising_only_decodes() {
    let inst: Instance = sample_instance(&PsbParams::new(6, 3, 48, 60, 400, 2)).unwrap();
    let y = &inst.measurements;
    let mut s = StreamIngest::new(y.rows(), Some(60), Options::new(6)).unwrap();
    let cols = y.columns();
    s.ingest(cols[..300].to_vec()).unwrap();
    assert!(s.is_stable());
    for c in &cols[300..] {
        let before = s.counters();
        let report = s.ingest(vec![c.clone()]).unwrap();
        let after = s.counters();
        assert!(report.direct && report.iterations == 0);
        assert_eq!(report.unresolved, 0);
        assert_eq!(after.decode_calls, before.decode_calls + 1);
        assert_eq!(after.cluster_calls, before.cluster_calls);
        assert_eq!(after.extract_calls, before.extract_calls);
    }
    assert!(s.residual().unwrap().is_zero());
}
