mod common;

use common::*;
use psb_factor::debf::{decode, StepParams};
use psb_factor::ndebf::ndebf_observed;
use psb_factor::psb::sample_x;
use psb_factor::sparse::product;
use psb_factor::verify::accuracy_predicate;
use psb_factor::*;

const EPS: f64 = 1.0 / 6.0;
const D: usize = 12;

struct Case<T> {
    a: BinaryColumnMatrix,
    x: SparseCodeMatrix<T>,
    y: SparseCodeMatrix<T>,
}

fn verified_case<T: Scalar>(seed: u64, samples: usize) -> Case<T> {
    let a = verified_expander(180, 20, D, 3, seed);
    let x = sample_x::<T>(&PsbParams::new(D, 3, 180, 20, samples, seed)).unwrap();
    let y = product(&a, &x).unwrap();
    Case { a, x, y }
}

/// An encoder column that no measurement uses cannot be recovered, so exact
/// recovery and a zero residual coincide only when every row of `X` is used.
fn every_row_used<T: Scalar>(x: &SparseCodeMatrix<T>) -> bool {
    x.nonzero_rows().iter().all(|&b| b)
}

fn finish<T: Scalar>(r: psb_factor::debf::RunResult<T>) -> Factorisation<T> {
    match r {
        Ok(out) => out,
        Err(RunError::IterationLimit { partial, .. }) => *partial,
        Err(RunError::Invalid(e)) => panic!("{e}"),
    }
}

#[test]
fn debf_reconstructions_stay_accurate_on_expanders() {
    let mut exact_runs = 0;
    for seed in 0..30 {
        let c = verified_case::<f64>(seed, 10 + 3 * seed as usize);
        let out = finish(debf_observed(&c.y, 20, &Options::new(D), |state, _| {
            assert!(accuracy_predicate(state.ahat(), state.xhat(), &c.a, &c.x, EPS, D, 1e-9).unwrap());
        }));
        let m = match_up_to_permutation(&out.ahat, &out.xhat, &c.a, &c.x, 1e-9).unwrap();
        assert!(m.containment);
        assert_eq!(m.exact, out.residual.is_zero() && every_row_used(&c.x), "seed {seed}");
        assert_eq!(m.exact, exact_recovery(&out.ahat, &out.xhat, &c.a, &c.x, 1e-9));
        exact_runs += usize::from(m.exact);
    }
    assert!(exact_runs >= 15, "{exact_runs}");
}

#[test]
fn ndebf_adds_one_complete_correct_column_per_iteration() {
    for seed in 0..20 {
        let c = verified_case::<f64>(seed, 60);
        let out = finish(ndebf_observed(&c.y, 20, &Options::new(D), |state, eta| {
            for l in 0..20 {
                let expected = if l < eta { D } else { 0 };
                assert_eq!(state.ahat().cardinality(l), expected, "seed {seed} eta {eta} col {l}");
            }
            assert!(accuracy_predicate(state.ahat(), state.xhat(), &c.a, &c.x, EPS, D, 1e-9).unwrap());
        }));
        let m = match_up_to_permutation(&out.ahat, &out.xhat, &c.a, &c.x, 1e-9).unwrap();
        assert!(m.containment);
        assert_eq!(m.exact, out.residual.is_zero() && every_row_used(&c.x), "seed {seed}");
    }
}

#[test]
fn ndebf_success_implies_debf_success_on_expanders() {
    for seed in 0..20 {
        let c = verified_case::<f64>(100 + seed, 15 + 2 * seed as usize);
        let nd = finish(ndebf_run(&c.y, 20, &Options::new(D)));
        let db = finish(debf_run(&c.y, 20, &Options::new(D)));
        if exact_recovery(&nd.ahat, &nd.xhat, &c.a, &c.x, 1e-9) {
            assert!(exact_recovery(&db.ahat, &db.xhat, &c.a, &c.x, 1e-9), "seed {seed}");
        }
    }
}

#[test]
fn true_encoder_decodes_every_column() {
    for seed in 0..10 {
        let c = verified_case::<f64>(seed, 30);
        let mut state = FactorisationState::from_parts(c.a.clone(), SparseCodeMatrix::zeros(20, 30)).unwrap();
        let params = StepParams::new(EPS, D);
        for col in 0..30 {
            let out = decode(c.y.column(col), &mut state, col, &params);
            assert!(!out.capped && out.passes <= 3);
        }
        for col in 0..30 {
            for (l, v) in c.x.column(col).iter() {
                assert!(close(v, state.xhat().get(l, col), 1e-9));
            }
            assert_eq!(state.xhat().column(col).nnz(), 3);
        }
    }
}

#[test]
fn single_precision_runs_end_to_end() {
    for seed in 0..5 {
        let c = verified_case::<f32>(seed, 60);
        let out = finish(debf_run(&c.y, 20, &DebfOptions::<f32>::new(D)));
        assert!(out.is_exact_fit());
        assert!(exact_recovery(&out.ahat, &out.xhat, &c.a, &c.x, 1e-4));
    }
}

#[test]
fn practical_mode_recovers_verified_instances() {
    for seed in 0..10 {
        let c = verified_case::<f64>(seed, 60);
        let out = finish(debf_run(&c.y, 20, &Options::practical(D)));
        assert!(exact_recovery(&out.ahat, &out.xhat, &c.a, &c.x, 1e-9), "seed {seed}");
    }
}

#[test]
fn scheduling_does_not_change_results() {
    let inst: Instance = sample_instance(&PsbParams::new(8, 6, 80, 100, 300, 17)).unwrap();
    let serial = finish(debf_run(&inst.measurements, 100, &Options::new(8).with_parallel(false)));
    let parallel = finish(debf_run(&inst.measurements, 100, &Options::new(8).with_parallel(true)));
    let again = finish(debf_run(&inst.measurements, 100, &Options::new(8).with_parallel(true)));
    assert_eq!(serial.ahat, parallel.ahat);
    assert_eq!(serial.xhat, parallel.xhat);
    assert_eq!(parallel.xhat, again.xhat);
    assert_eq!(serial.iterations, parallel.iterations);
}

#[test]
fn ordering_makes_recovery_absolute() {
    for seed in 0..5 {
        let c = verified_case::<f64>(seed, 60);
        let before = order_columns(&c.a, Some(&c.x), Direction::Descending, true).unwrap();
        let x = before.codes.unwrap();
        let y = product(&before.encoder, &x).unwrap();
        let out = finish(debf_run(&y, 20, &Options::new(D)));
        let after = order_columns(&out.ahat, Some(&out.xhat), Direction::Descending, true).unwrap();
        assert_eq!(after.encoder, before.encoder);
        let xhat = after.codes.unwrap();
        for col in 0..x.cols() {
            assert_eq!(xhat.column(col).indices(), x.column(col).indices());
            for (l, v) in x.column(col).iter() {
                assert!(close(v, xhat.get(l, col), 1e-9));
            }
        }
    }
}

#[test]
fn iteration_limit_returns_the_partial_reconstruction() {
    let inst: Instance = sample_instance(&PsbParams::new(8, 6, 80, 100, 200, 4)).unwrap();
    match debf_run(&inst.measurements, 100, &Options::new(8).with_max_iterations(1)) {
        Err(RunError::IterationLimit { limit, partial }) => {
            assert_eq!(limit, 1);
            assert_eq!(partial.iterations, 1);
            assert_eq!(partial.exit, ExitReason::IterationLimit);
        }
        other => panic!("{:?}", other.map(|o| o.exit)),
    }
}

#[test]
fn malformed_inputs_are_rejected() {
    let y = SparseCodeMatrix::<f64>::zeros(10, 3);
    assert!(matches!(debf_run(&y, 5, &Options::new(0)), Err(RunError::Invalid(_))));
    assert!(matches!(ndebf_run(&y, 0, &Options::new(3)), Err(RunError::Invalid(_))));
    assert!(matches!(
        debf_run(&y, 5, &Options::new(3).with_epsilon(0.5)),
        Err(RunError::Invalid(_))
    ));
    let mut state = FactorisationState::<f64>::new(10, 5, 2);
    assert!(matches!(
        debf_continue(&y, &mut state, &Options::new(3), |_, _| {}),
        Err(RunError::Invalid(Error::Shape(_)))
    ));
}
