//! Median selection over comparison roots.
//!
//! Both medians use the lower convention. The weighted variant runs a
//! randomized three-way quickselect (expected linear time) and compares
//! weight sums exactly, so its answer depends only on the multiset of entries
//! and never on their order or on the pivot sequence.

use std::cmp::Ordering;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Error;
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq)]
pub struct WeightedKey {
    pub key: Scalar,
    pub weight: f64,
}

impl WeightedKey {
    pub fn new(key: Scalar, weight: f64) -> Self {
        WeightedKey { key, weight }
    }
}

/// Exact sum of `f64` values, kept as non-overlapping partials.
#[derive(Clone, Debug, Default)]
pub struct ExactSum {
    partials: Vec<f64>,
}

impl ExactSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, mut x: f64) {
        let mut i = 0;
        for j in 0..self.partials.len() {
            let mut y = self.partials[j];
            if x.abs() < y.abs() {
                std::mem::swap(&mut x, &mut y);
            }
            let hi = x + y;
            let lo = y - (hi - x);
            if lo != 0.0 {
                self.partials[i] = lo;
                i += 1;
            }
            x = hi;
        }
        self.partials.truncate(i);
        self.partials.push(x);
    }

    pub fn add_sum(&mut self, other: &ExactSum) {
        for &p in &other.partials {
            self.add(p);
        }
    }

    /// Sign of the exact sum.
    pub fn signum(&self) -> Ordering {
        self.partials
            .iter()
            .rev()
            .find(|p| **p != 0.0)
            .map_or(Ordering::Equal, |p| p.partial_cmp(&0.0).unwrap())
    }

    /// Compares `2 * self` with `total` exactly.
    pub fn doubled_cmp(&self, total: &ExactSum) -> Ordering {
        let mut diff = ExactSum::new();
        for &p in &self.partials {
            diff.add(2.0 * p);
        }
        for &p in &total.partials {
            diff.add(-p);
        }
        diff.signum()
    }

    /// Rounded value.
    pub fn value(&self) -> f64 {
        self.partials.iter().sum()
    }
}

/// Reorders `items` and returns the index of an element carrying the lower
/// weighted median key: the smallest key `k` such that entries with key ≤ `k`
/// hold at least half the total weight. Returns `None` for an empty slice.
///
/// Weights must be positive and finite; this is not checked here.
pub fn select_weighted_median<T, K, FK, FW, R>(
    items: &mut [T],
    key: FK,
    weight: FW,
    rng: &mut R,
) -> Option<usize>
where
    K: Ord + ?Sized,
    FK: Fn(&T) -> &K,
    FW: Fn(&T) -> f64,
    R: Rng + ?Sized,
{
    if items.is_empty() {
        return None;
    }
    let mut total = ExactSum::new();
    for it in items.iter() {
        total.add(weight(it));
    }
    // Weight of entries already discarded to the left of [lo, hi).
    let mut below = ExactSum::new();
    let (mut lo, mut hi) = (0usize, items.len());
    loop {
        let p = rng.random_range(lo..hi);
        items.swap(lo, p);
        // Three-way partition of items[lo..hi] around the key at `lo`:
        // [lo, lt) < pivot, [lt, gt) == pivot, [gt, hi) > pivot.
        let (mut lt, mut i, mut gt) = (lo, lo + 1, hi);
        while i < gt {
            match key(&items[i]).cmp(key(&items[lt])) {
                Ordering::Less => {
                    items.swap(lt, i);
                    lt += 1;
                    i += 1;
                }
                Ordering::Equal => i += 1,
                Ordering::Greater => {
                    gt -= 1;
                    items.swap(i, gt);
                }
            }
        }
        let mut with_less = below.clone();
        for it in &items[lo..lt] {
            with_less.add(weight(it));
        }
        if lt > lo && with_less.doubled_cmp(&total) != Ordering::Less {
            hi = lt;
            continue;
        }
        let mut with_equal = with_less;
        for it in &items[lt..gt] {
            with_equal.add(weight(it));
        }
        if with_equal.doubled_cmp(&total) != Ordering::Less || gt == hi {
            return Some(lt);
        }
        below = with_equal;
        lo = gt;
    }
}

fn check_weights(entries: &[WeightedKey]) -> Result<(), Error> {
    if entries.is_empty() {
        return Err(Error::EmptyInput);
    }
    match entries.iter().find(|e| !(e.weight > 0.0 && e.weight.is_finite())) {
        Some(bad) => Err(Error::InvalidWeight(bad.weight)),
        None => Ok(()),
    }
}

/// Lower weighted median of `entries`, using `rng` for pivots.
pub fn weighted_median_with<R: Rng + ?Sized>(
    entries: &[WeightedKey],
    rng: &mut R,
) -> Result<Scalar, Error> {
    check_weights(entries)?;
    let mut refs: Vec<&WeightedKey> = entries.iter().collect();
    let at = select_weighted_median(&mut refs, |e| &e.key, |e| e.weight, rng)
        .expect("nonempty");
    Ok(refs[at].key.clone())
}

/// Lower weighted median of `entries`.
pub fn weighted_median(entries: &[WeightedKey]) -> Result<Scalar, Error> {
    weighted_median_with(entries, &mut ChaCha8Rng::seed_from_u64(0x5e1ec7))
}

/// Index (into the reordered slice) of the ⌈k/2⌉-th smallest key.
pub fn select_plain_median<T, K, FK>(items: &mut [T], key: FK) -> Option<usize>
where
    K: Ord + ?Sized,
    FK: Fn(&T) -> &K,
{
    if items.is_empty() {
        return None;
    }
    let k = items.len().div_ceil(2) - 1;
    items.select_nth_unstable_by(k, |a, b| key(a).cmp(key(b)));
    Some(k)
}

/// Lower median of `keys`.
pub fn plain_median(keys: &[Scalar]) -> Result<Scalar, Error> {
    let mut refs: Vec<&Scalar> = keys.iter().collect();
    let at = select_plain_median(&mut refs, |k| *k).ok_or(Error::EmptyInput)?;
    Ok(refs[at].clone())
}
