//! Cross-validation of the graph enumerator.
//!
//! The oracle in `common` enumerates classes by degree sequences and raw
//! edge assignments with permutation dedup, sharing no search machinery with
//! the library's insertion-order enumeration. Low orders must agree class by
//! class, and the structural bounds implied by validity must hold across
//! everything the enumerator produces.

mod common;

use std::collections::BTreeSet;

use common::{min_rep, oracle_classes, Rep};
use graphstar::enumerate_classes;

fn enumerated_reps(n_ext: usize, k: i64) -> BTreeSet<Rep> {
    enumerate_classes(n_ext, k, None)
        .iter()
        .map(|c| min_rep(n_ext, c.graph.internal_weights(), c.graph.edges()))
        .collect()
}

#[test]
fn two_argument_classes_match_oracle_through_order_three() {
    for k in 0..=3 {
        let ours = enumerated_reps(2, k);
        let oracle = oracle_classes(2, k);
        assert_eq!(
            ours, oracle,
            "class sets differ at order {k}: {} enumerated vs {} oracle",
            ours.len(),
            oracle.len()
        );
    }
}

#[test]
fn three_argument_classes_match_oracle_through_order_two() {
    for k in 0..=2 {
        let ours = enumerated_reps(3, k);
        let oracle = oracle_classes(3, k);
        assert_eq!(
            ours, oracle,
            "class sets differ at order {k}: {} enumerated vs {} oracle",
            ours.len(),
            oracle.len()
        );
    }
}

#[test]
fn known_low_order_counts() {
    assert_eq!(enumerate_classes(2, 0, None).len(), 1);
    assert_eq!(enumerate_classes(2, 1, None).len(), 1);
    assert_eq!(enumerate_classes(2, 2, None).len(), 5);
}

#[test]
fn structural_bounds_hold_through_order_four() {
    for k in 1..=4i64 {
        let classes = enumerate_classes(2, k, None);
        assert!(!classes.is_empty());
        for c in &classes {
            let g = &c.graph;
            assert!(g.is_valid());
            assert_eq!(g.total_weight(), k);
            let light = g.internal_weights().iter().filter(|&&w| w == -1).count() as i64;
            let t = g.n_int() as i64;
            let e = g.edge_count() as i64;
            assert!(light <= 2 * k - 2, "light vertices {light} at order {k}");
            assert!(t <= 2 * k - 2, "internals {t} at order {k}");
            assert!(e <= 3 * k - 2, "edges {e} at order {k}");
        }
    }
}

#[test]
fn duplicate_free_output() {
    for k in 0..=3i64 {
        let classes = enumerate_classes(2, k, None);
        let forms: BTreeSet<_> = classes.iter().map(|c| c.canonical.clone()).collect();
        assert_eq!(forms.len(), classes.len());
    }
}
