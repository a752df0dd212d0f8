//! Randomized law tests across the algebra layers: jet arithmetic behaves
//! like truncated Taylor expansion, canonical forms ignore internal
//! relabelling, series bookkeeping is consistent, and multi-indices count
//! what they claim to count.

use graphstar::verify::{random_point, random_polynomial};
use graphstar::{
    canonicalize, enumerate_classes, relabel, Dir, FormalSeries, Jet, MultiIndex,
};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn jets(seed: u64, m: usize, depth: usize, count: usize) -> Vec<Jet> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let point = random_point(&mut rng, m, 0.5);
    (0..count)
        .map(|_| {
            random_polynomial(&mut rng, m, 3)
                .eval_jet(&point, depth)
                .expect("polynomials evaluate everywhere")
        })
        .collect()
}

fn series(leading: i64, parts: &[(f64, f64)]) -> FormalSeries<Complex64> {
    let coeffs = parts.iter().map(|&(re, im)| Complex64::new(re, im)).collect();
    FormalSeries::new(leading, coeffs)
}

fn close(a: &FormalSeries<Complex64>, b: &FormalSeries<Complex64>) -> bool {
    let lo = a.leading().max(b.leading());
    let hi = a.trunc().min(b.trunc());
    (lo..=hi).all(|n| {
        let x = a.get(n).copied().unwrap_or_default();
        let y = b.get(n).copied().unwrap_or_default();
        (x - y).norm() < 1e-9
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn jet_product_commutes_and_associates(
        seed in any::<u64>(),
        m in 1usize..=2,
        depth in 0usize..=3,
    ) {
        let j = jets(seed, m, depth, 3);
        let ab = j[0].checked_mul(&j[1]).unwrap();
        let ba = j[1].checked_mul(&j[0]).unwrap();
        prop_assert!(ab.checked_sub(&ba).unwrap().max_abs() < 1e-9);
        let left = ab.checked_mul(&j[2]).unwrap();
        let right = j[0].checked_mul(&j[1].checked_mul(&j[2]).unwrap()).unwrap();
        prop_assert!(left.checked_sub(&right).unwrap().max_abs() < 1e-9);
    }

    #[test]
    fn jet_product_distributes_over_sums(
        seed in any::<u64>(),
        m in 1usize..=2,
        depth in 0usize..=3,
    ) {
        let j = jets(seed, m, depth, 3);
        let left = j[0].checked_mul(&j[1].checked_add(&j[2]).unwrap()).unwrap();
        let right = j[0]
            .checked_mul(&j[1])
            .unwrap()
            .checked_add(&j[0].checked_mul(&j[2]).unwrap())
            .unwrap();
        prop_assert!(left.checked_sub(&right).unwrap().max_abs() < 1e-9);
    }

    #[test]
    fn jet_derivative_is_a_derivation(
        seed in any::<u64>(),
        m in 1usize..=2,
        depth in 1usize..=3,
        holo in any::<bool>(),
    ) {
        let j = jets(seed, m, depth, 2);
        let dir = if holo { Dir::Holo(m - 1) } else { Dir::AntiHolo(m - 1) };
        let lhs = j[0].checked_mul(&j[1]).unwrap().derive(dir).unwrap();
        let rhs = j[0]
            .derive(dir)
            .unwrap()
            .checked_mul(&j[1].truncate(depth - 1))
            .unwrap()
            .checked_add(&j[0].truncate(depth - 1).checked_mul(&j[1].derive(dir).unwrap()).unwrap())
            .unwrap();
        prop_assert!(lhs.checked_sub(&rhs).unwrap().max_abs() < 1e-9);
    }

    #[test]
    fn mixed_jet_derivatives_commute(
        seed in any::<u64>(),
        m in 1usize..=2,
        depth in 2usize..=3,
    ) {
        let j = jets(seed, m, depth, 1);
        let hb = j[0].derive(Dir::Holo(0)).unwrap().derive(Dir::AntiHolo(m - 1)).unwrap();
        let bh = j[0].derive(Dir::AntiHolo(m - 1)).unwrap().derive(Dir::Holo(0)).unwrap();
        prop_assert!(hb.checked_sub(&bh).unwrap().max_abs() < 1e-9);
    }

    #[test]
    fn canonical_form_ignores_internal_relabelling(
        k in 0i64..=3,
        pick in any::<prop::sample::Index>(),
        perm_seed in any::<u64>(),
    ) {
        let classes = enumerate_classes(2, k, None);
        let class = &classes[pick.index(classes.len())];
        let t = class.graph.n_int();
        let mut internals: Vec<u32> = (2..(2 + t) as u32).collect();
        internals.shuffle(&mut ChaCha8Rng::seed_from_u64(perm_seed));
        let mut perm = vec![0u32, 1];
        perm.extend(internals);
        let relabelled = relabel(&class.graph, &perm);
        prop_assert!(relabelled.validate().is_ok());
        let info = canonicalize(&relabelled);
        prop_assert_eq!(&info.form, &class.canonical);
        prop_assert_eq!(info.auts, class.auts);
    }

    #[test]
    fn series_algebra_commutes_and_distributes(
        la in -2i64..=2,
        lb in -2i64..=2,
        lc in -2i64..=2,
        pa in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..5),
        pb in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..5),
        pc in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..5),
    ) {
        let a = series(la, &pa);
        let b = series(lb, &pb);
        let c = series(lc, &pc);
        prop_assert!(close(&a.mul(&b), &b.mul(&a)));
        prop_assert!(close(&a.mul(&b).mul(&c), &a.mul(&b.mul(&c))));
        if b.leading().max(c.leading()) <= b.trunc().min(c.trunc()) {
            prop_assert!(close(&a.mul(&b.add(&c)), &a.mul(&b).add(&a.mul(&c))));
        }
    }

    #[test]
    fn series_shifts_relocate_orders(
        leading in -2i64..=2,
        parts in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..5),
        shift in -3i64..=3,
    ) {
        let a = series(leading, &parts);
        let shifted = a.shifted(shift);
        prop_assert_eq!(shifted.leading(), a.leading() + shift);
        for n in a.leading()..=a.trunc() {
            prop_assert_eq!(shifted.get(n + shift), a.get(n));
        }
    }

    #[test]
    fn multi_index_counts_orders_and_factorials(
        labels in prop::collection::vec(0u8..3, 0..8),
    ) {
        let mi = MultiIndex::from_labels(3, labels.iter().copied());
        prop_assert_eq!(mi.order() as usize, labels.len());
        let mut counts = [0u64; 3];
        for &l in &labels {
            counts[l as usize] += 1;
        }
        let want: u64 = counts.iter().map(|&c| (1..=c).product::<u64>()).product();
        prop_assert_eq!(mi.factorial(), want);
    }
}
