use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{line_form, Line};
use crate::engine::{ComparisonForm, OracleAnswer, Problem, SearchInterval};
use crate::error::Error;
use crate::scalar::Scalar;

/// Coefficient numerators and denominators are drawn from `1..=DEFAULT_COEFF_MAX`.
pub const DEFAULT_COEFF_MAX: u64 = 10_000;

/// An odd number of lines with positive slopes and distinct x-axis roots. λ* is
/// the median root: the crossing with as many lines above the axis as below.
#[derive(Clone, Debug)]
pub struct MedianOfLines {
    lines: Vec<Line>,
    roots: Vec<Scalar>,
}

impl MedianOfLines {
    pub fn new(lines: Vec<Line>) -> Result<Self, Error> {
        if lines.len().is_multiple_of(2) {
            return Err(Error::Instance(format!(
                "median-of-lines needs an odd number of lines, got {}",
                lines.len()
            )));
        }
        if let Some(i) = lines.iter().position(|l| !l.a.is_positive()) {
            return Err(Error::Instance(format!("line {i} has non-positive slope {}", lines[i].a)));
        }
        let roots: Vec<Scalar> = lines.iter().map(Line::axis_root).collect();
        let mut seen = HashSet::with_capacity(roots.len());
        for (i, r) in roots.iter().enumerate() {
            if !seen.insert(r) {
                return Err(Error::Instance(format!("line {i} repeats axis root {r}")));
            }
        }
        Ok(MedianOfLines { lines, roots })
    }

    pub fn lines(&self) -> &[Line] {
        &self.lines
    }

    pub fn roots(&self) -> &[Scalar] {
        &self.roots
    }
}

impl Problem for MedianOfLines {
    fn item_count(&self) -> usize {
        self.lines.len()
    }

    fn compare(&self, i: usize, j: usize) -> ComparisonForm {
        line_form(&self.lines[i], &self.lines[j], i, j)
    }

    fn oracle(&self, lambda: &Scalar) -> OracleAnswer {
        // With a > 0, a·λ + b < 0 exactly when λ < −b/a, so signs come from
        // the precomputed roots.
        let (mut neg, mut pos) = (0usize, 0usize);
        for r in &self.roots {
            match lambda.cmp(r) {
                std::cmp::Ordering::Less => neg += 1,
                std::cmp::Ordering::Greater => pos += 1,
                std::cmp::Ordering::Equal => {}
            }
        }
        let half = (self.lines.len() - 1) / 2;
        if neg > half {
            OracleAnswer::Below
        } else if pos > half {
            OracleAnswer::Above
        } else {
            OracleAnswer::At
        }
    }

    fn recover(&self, perm: &[usize], interval: &SearchInterval) -> Result<Scalar, Error> {
        if let Some(star) = interval.found() {
            return Ok(star.clone());
        }
        let mid = perm
            .get(perm.len() / 2)
            .ok_or_else(|| Error::Instance("empty permutation".into()))?;
        Ok(self.roots[*mid].clone())
    }

    fn value_at(&self, item: usize, lambda: &Scalar) -> Option<Scalar> {
        Some(self.lines[item].value_at(lambda))
    }
}

/// Median of the axis roots by full sort.
pub fn mol_brute(instance: &MedianOfLines) -> Scalar {
    let mut roots = instance.roots.clone();
    roots.sort();
    roots.swap_remove(roots.len() / 2)
}

fn draw_ratio<R: Rng>(rng: &mut R, coeff_max: u64) -> Scalar {
    let p = rng.random_range(1..=coeff_max);
    let q = rng.random_range(1..=coeff_max);
    Scalar::new(p, q).expect("q >= 1")
}

/// Random median-of-lines instance: `a = p/q`, `b = ±p'/q'` with all of
/// `p, q, p', q'` uniform in `1..=coeff_max`. Lines whose root collides with
/// an earlier one are redrawn.
pub fn gen_mol(n: usize, seed: u64, coeff_max: u64) -> Result<MedianOfLines, Error> {
    if n.is_multiple_of(2) {
        return Err(Error::Instance(format!("n must be odd, got {n}")));
    }
    if coeff_max == 0 {
        return Err(Error::Instance("coeff_max must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut lines = Vec::with_capacity(n);
    let mut roots = HashSet::with_capacity(n);
    let mut attempts = 0u64;
    while lines.len() < n {
        attempts += 1;
        if attempts > 64 * n as u64 + 1024 {
            return Err(Error::Instance(format!(
                "could not draw {n} distinct roots with coeff_max {coeff_max}"
            )));
        }
        let a = draw_ratio(&mut rng, coeff_max);
        let mut b = draw_ratio(&mut rng, coeff_max);
        if rng.random_bool(0.5) {
            b = -b;
        }
        let line = Line::new(a, b);
        if roots.insert(line.axis_root()) {
            lines.push(line);
        }
    }
    MedianOfLines::new(lines)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::finalize;

    fn unit_slopes(bs: &[i64]) -> MedianOfLines {
        MedianOfLines::new(bs.iter().map(|&b| Line::new(1.into(), b.into())).collect()).unwrap()
    }

    #[test]
    fn oracle_examples() {
        let inst = unit_slopes(&[-1, -2, -3]);
        assert_eq!(inst.oracle(&2.into()), OracleAnswer::At);
        assert_eq!(inst.oracle(&0.into()), OracleAnswer::Below);
        assert_eq!(inst.oracle(&10.into()), OracleAnswer::Above);
        assert_eq!(inst.oracle(&"5/2".parse().unwrap()), OracleAnswer::Above);
    }

    #[test]
    fn oracle_matches_direct_evaluation() {
        let inst = gen_mol(31, 3, 50).unwrap();
        for probe in inst.roots().iter().chain([Scalar::from(-1000), Scalar::from(1000)].iter()) {
            let (mut neg, mut pos) = (0, 0);
            for l in inst.lines() {
                let v = l.value_at(probe);
                if v.is_negative() {
                    neg += 1;
                } else if v.is_positive() {
                    pos += 1;
                }
            }
            let direct = if neg > 15 {
                OracleAnswer::Below
            } else if pos > 15 {
                OracleAnswer::Above
            } else {
                OracleAnswer::At
            };
            assert_eq!(inst.oracle(probe), direct);
        }
    }

    #[test]
    fn recover_examples() {
        let inst = unit_slopes(&[-1, -2, -3]);
        // at λ* = 2 values are 1, 0, −1
        let perm = [2, 1, 0];
        assert_eq!(finalize(&inst, &perm, &SearchInterval::unbounded()).unwrap(), Scalar::from(2));
        let five = unit_slopes(&[-1, -2, -3, -4, -5]);
        assert_eq!(five.recover(&[4, 3, 2, 1, 0], &SearchInterval::unbounded()).unwrap(), Scalar::from(3));
        let one = MedianOfLines::new(vec![Line::new(2.into(), (-4).into())]).unwrap();
        assert_eq!(finalize(&one, &[0], &SearchInterval::unbounded()).unwrap(), Scalar::from(2));
    }

    #[test]
    fn recover_outside_interval_is_fatal() {
        let inst = unit_slopes(&[-1, -2, -3]);
        let iv = SearchInterval::new(Some(5.into()), None);
        assert!(matches!(finalize(&inst, &[2, 1, 0], &iv), Err(Error::RecoverOutOfRange { .. })));
    }

    #[test]
    fn brute_force() {
        assert_eq!(mol_brute(&unit_slopes(&[-1, -2, -3])), Scalar::from(2));
        assert_eq!(mol_brute(&unit_slopes(&[-5])), Scalar::from(5));
    }

    #[test]
    fn instance_validation() {
        assert!(MedianOfLines::new(vec![]).is_err());
        let flat = vec![Line::new(0.into(), 1.into())];
        assert!(MedianOfLines::new(flat).is_err());
        let neg = vec![Line::new((-1).into(), 1.into())];
        assert!(MedianOfLines::new(neg).is_err());
        // same root through different slopes
        let dup = vec![
            Line::new(1.into(), (-1).into()),
            Line::new(2.into(), (-2).into()),
            Line::new(1.into(), 0.into()),
        ];
        assert!(MedianOfLines::new(dup).is_err());
        assert!(gen_mol(4, 0, 10).is_err());
    }

    #[test]
    fn generator_is_deterministic() {
        let a = gen_mol(101, 42, DEFAULT_COEFF_MAX).unwrap();
        let b = gen_mol(101, 42, DEFAULT_COEFF_MAX).unwrap();
        assert_eq!(a.lines(), b.lines());
        let c = gen_mol(101, 43, DEFAULT_COEFF_MAX).unwrap();
        assert_ne!(a.lines(), c.lines());
        let one = gen_mol(1, 9, DEFAULT_COEFF_MAX).unwrap();
        assert_eq!(mol_brute(&one), one.lines()[0].axis_root());
    }

    #[test]
    fn generator_coefficient_ranges() {
        let inst = gen_mol(201, 5, 7).unwrap();
        for l in inst.lines() {
            assert!(l.a.is_positive());
            assert!(l.a <= Scalar::from(7) && l.a >= Scalar::new(1, 7).unwrap());
            assert!(l.b.abs() <= Scalar::from(7) && l.b.abs() >= Scalar::new(1, 7).unwrap());
            assert!(l.a.denom() <= 7.into() && l.b.denom() <= 7.into());
        }
        // too few distinct roots available
        assert!(gen_mol(101, 0, 1).is_err());
    }
}
