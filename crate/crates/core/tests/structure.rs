//! Structural properties of expanders whose expansion has been verified by
//! brute force, exercised through the library's thresholds and checkers.

mod common;

use common::*;
use proptest::prelude::*;
use psb_factor::sparse::{group_values, product};
use psb_factor::thresholds::{at_least, exceeds, Thresholds};
use psb_factor::*;

const EPS: f64 = 1.0 / 6.0;
const M: usize = 180;
const N: usize = 20;
const D: usize = 12;
const K: usize = 3;

fn measure(a: &BinaryColumnMatrix, z: &RealVector) -> RealVector {
    product(a, &SparseCodeMatrix::from_columns(a.cols(), vec![z.clone()]).unwrap())
        .unwrap()
        .column(0)
        .clone()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn verified_encoders_have_the_adjacency_properties(seed in any::<u64>()) {
        let a = verified_expander(M, N, D, K, seed);
        prop_assert!(brute_adjacency_properties(&a, K, EPS));
        prop_assert!(overlap_bound_check(&a, EPS, K, EnumerationLimits::default()).unwrap());
    }

    #[test]
    fn frequent_values_are_singletons(seed in any::<u64>(), k in 1usize..=K) {
        let a = verified_expander(M, N, D, K, seed);
        let z = random_sparse(N, k, seed ^ 0xabc);
        prop_assert!(singleton_bound_check(&a, &z, EPS, D, 1e-9).unwrap());
        let thr = Thresholds::new(EPS, D);
        for g in group_values(&measure(&a, &z), 1e-9) {
            if exceeds(g.count(), thr.singleton) {
                prop_assert!(z.values().iter().any(|&v| v == g.value));
            }
        }
    }

    #[test]
    fn partial_supports_cluster_by_origin(seed in any::<u64>()) {
        let a = verified_expander(M, N, D, K, seed);
        let thr = Thresholds::new(EPS, D);
        let mut partials: Vec<(usize, Vec<usize>)> = Vec::new();
        for t in 0..6u64 {
            let z = random_sparse(N, K, seed.wrapping_add(t));
            let r = measure(&a, &z);
            for g in group_values(&r, 1e-9) {
                if !exceeds(g.count(), thr.singleton) {
                    continue;
                }
                let origin = z.iter().find(|&(_, v)| v == g.value).map(|(l, _)| l).unwrap();
                prop_assert!(g.locations.iter().all(|row| a.support(origin).contains(row)));
                partials.push((origin, g.locations));
            }
        }
        for (i, (oi, wi)) in partials.iter().enumerate() {
            for (oj, wj) in &partials[i + 1..] {
                let overlap = psb_factor::sparse::inner_product(wi, wj);
                prop_assert_eq!(at_least(overlap, thr.overlap), oi == oj);
            }
        }
    }
}

#[test]
fn unique_neighbours_exceed_the_bound_on_every_small_set() {
    let a = verified_expander(M, N, D, K, 5);
    let floor = (1.0 - 2.0 * EPS) * D as f64;
    for set in subsets(N, K) {
        assert!(exceeds(unique_neighbour_count(&a, &set), floor * set.len() as f64));
    }
}

#[test]
fn duplicated_column_breaks_the_common_support_property() {
    let mut supports = verified_expander(M, N, D, K, 9).supports().to_vec();
    supports[1] = supports[0].clone();
    let a = BinaryColumnMatrix::from_supports(M, supports).unwrap();
    assert!(!overlap_bound_check(&a, EPS, K, EnumerationLimits::default()).unwrap());
    assert!(!brute_adjacency_properties(&a, K, EPS));
}
