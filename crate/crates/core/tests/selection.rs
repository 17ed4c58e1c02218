use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use proptest::prelude::*;
use psearch_core::selection::weighted_median_with;
use psearch_core::{boxsort_plain, boxsort_plain_seeded, plain_median, weighted_median, Error, Scalar, WeightedKey};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Sort by key, merge equal keys, scan exact prefix sums.
fn reference_median(entries: &[WeightedKey]) -> Scalar {
    let mut sorted: Vec<&WeightedKey> = entries.iter().collect();
    sorted.sort_by(|a, b| a.key.cmp(&b.key));
    let exact = |w: f64| BigRational::from_float(w).unwrap();
    let total: BigRational = sorted.iter().map(|e| exact(e.weight)).fold(BigRational::zero(), |a, b| a + b);
    let two = BigRational::from_integer(BigInt::from(2));
    let mut prefix = BigRational::zero();
    let mut i = 0;
    while i < sorted.len() {
        let key = &sorted[i].key;
        while i < sorted.len() && &sorted[i].key == key {
            prefix += exact(sorted[i].weight);
            i += 1;
        }
        if &prefix * &two >= total {
            return key.clone();
        }
    }
    unreachable!()
}

fn random_entries(rng: &mut ChaCha8Rng, len: usize, distinct: i64, spread: f64) -> Vec<WeightedKey> {
    (0..len)
        .map(|_| {
            let key = Scalar::new(rng.random_range(-distinct..=distinct), rng.random_range(1..4)).unwrap();
            let weight = 10f64.powf(-spread * rng.random::<f64>());
            WeightedKey::new(key, weight)
        })
        .collect()
}

#[test]
fn spec_examples() {
    let wk = |k: i64, w: f64| WeightedKey::new(k.into(), w);
    assert_eq!(weighted_median(&[wk(1, 1.0), wk(2, 1.0), wk(3, 1.0)]).unwrap(), 2.into());
    assert_eq!(weighted_median(&[wk(1, 0.1), wk(2, 0.1), wk(3, 0.8)]).unwrap(), 3.into());
    assert_eq!(weighted_median(&[wk(7, 5.0)]).unwrap(), 7.into());
    assert_eq!(weighted_median(&[wk(1, 0.5), wk(2, 0.25), wk(3, 0.25)]).unwrap(), 1.into());
    assert!(matches!(weighted_median(&[]), Err(Error::EmptyInput)));
    assert!(matches!(weighted_median(&[wk(1, 0.0)]), Err(Error::InvalidWeight(_))));
    assert!(matches!(weighted_median(&[wk(1, f64::NAN)]), Err(Error::InvalidWeight(_))));
    assert_eq!(plain_median(&[3.into(), 1.into(), 2.into()]).unwrap(), 2.into());
    assert_eq!(plain_median(&[4.into(), 1.into()]).unwrap(), 1.into());
    assert!(matches!(plain_median(&[]), Err(Error::EmptyInput)));
}

#[test]
fn large_inputs_match_sort_and_scan() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for (distinct, spread) in [(1_000_000, 0.0), (50, 300.0), (2_000, 12.0), (5, 1.0)] {
        let entries = random_entries(&mut rng, 100_000, distinct, spread);
        assert_eq!(weighted_median(&entries).unwrap(), reference_median(&entries));
    }
}

#[test]
fn many_small_inputs_match_sort_and_scan() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for round in 0..20_000u64 {
        let len = rng.random_range(1..40);
        let spread = [0.0, 1.0, 300.0][(round % 3) as usize];
        let distinct = rng.random_range(1..20);
        let entries = random_entries(&mut rng, len, distinct, spread);
        let mut pivots = ChaCha8Rng::seed_from_u64(round);
        assert_eq!(weighted_median_with(&entries, &mut pivots).unwrap(), reference_median(&entries));
    }
}

#[test]
fn exact_half_boundary() {
    // 2⁻⁶⁰ is lost in a naive float sum, so the split must be exact
    let tiny = 2f64.powi(-60);
    let wk = |k: i64, w: f64| WeightedKey::new(k.into(), w);
    let entries = [wk(1, 0.5), wk(2, tiny), wk(3, 0.5)];
    assert_eq!(weighted_median(&entries).unwrap(), 2.into());
    let entries = [wk(1, 0.5), wk(2, tiny), wk(3, 0.5 - 2f64.powi(-54))];
    assert_eq!(weighted_median(&entries).unwrap(), 1.into());
    assert_eq!(reference_median(&entries), 1.into());
}

#[test]
fn plain_median_matches_sort() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let keys: Vec<Scalar> = (0..10_000).map(|_| Scalar::from(rng.random_range(-500i64..500))).collect();
    let mut sorted = keys.clone();
    sorted.sort();
    assert_eq!(plain_median(&keys).unwrap(), sorted[keys.len().div_ceil(2) - 1]);
}

#[test]
fn boxsort_plain_matches_reference_sort() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for round in 0..1000u64 {
        let len = rng.random_range(1..=500);
        let range = rng.random_range(1..1000);
        let items: Vec<i32> = (0..len).map(|_| rng.random_range(0..range)).collect();
        let mut want = items.clone();
        want.sort();
        assert_eq!(boxsort_plain_seeded(&items, i32::cmp, round), want, "round {round}");
    }
    let rev: Vec<u32> = (0..1000).rev().collect();
    assert_eq!(boxsort_plain(&rev, u32::cmp), (0..1000).collect::<Vec<_>>());
}

proptest! {
    #[test]
    fn plain_equals_unit_weighted(keys in prop::collection::vec(-50i64..50, 1..200)) {
        let scalars: Vec<Scalar> = keys.iter().map(|&k| k.into()).collect();
        let unit: Vec<WeightedKey> = scalars.iter().map(|k| WeightedKey::new(k.clone(), 1.0)).collect();
        prop_assert_eq!(plain_median(&scalars).unwrap(), weighted_median(&unit).unwrap());
    }

    #[test]
    fn weighted_matches_reference(
        raw in prop::collection::vec((-30i64..30, -300.0f64..0.0), 1..300),
        seed: u64,
    ) {
        let entries: Vec<WeightedKey> =
            raw.iter().map(|&(k, e)| WeightedKey::new(k.into(), 10f64.powf(e))).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        prop_assert_eq!(weighted_median_with(&entries, &mut rng).unwrap(), reference_median(&entries));
    }

    #[test]
    fn boxsort_plain_sorts(items in prop::collection::vec(any::<i16>(), 0..300), seed: u64) {
        let mut want = items.clone();
        want.sort();
        prop_assert_eq!(boxsort_plain_seeded(&items, i16::cmp, seed), want);
    }
}
