use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{line_form, Line, DEFAULT_COEFF_MAX};
use crate::engine::{ComparisonForm, OracleAnswer, Problem, SearchInterval};
use crate::error::Error;
use crate::scalar::Scalar;

/// Random lines sorted at a λ* chosen in advance as the crossing of one pair.
///
/// The oracle compares against the plant directly. Because λ* is the root of
/// a comparison every correct sort must make, a run can only settle that
/// comparison through an oracle call answering `At`, so `recover` reads λ*
/// from the interval.
#[derive(Clone, Debug)]
pub struct PlantedInstance {
    lines: Vec<Line>,
    star: Scalar,
    pair: (usize, usize),
}

impl PlantedInstance {
    /// Plants λ* at the crossing of lines `pair.0` and `pair.1`.
    pub fn new(lines: Vec<Line>, pair: (usize, usize)) -> Result<Self, Error> {
        let (i, j) = pair;
        if i == j || i >= lines.len() || j >= lines.len() {
            return Err(Error::Instance(format!("bad planted pair {pair:?}")));
        }
        let mut seen = HashSet::with_capacity(lines.len());
        for (k, l) in lines.iter().enumerate() {
            if l.a.is_zero() {
                return Err(Error::Instance(format!("line {k} has zero slope")));
            }
            if !seen.insert(l) {
                return Err(Error::Instance(format!("line {k} is a duplicate")));
            }
        }
        let star = match line_form(&lines[i], &lines[j], i, j) {
            ComparisonForm::Pivotal(p) => p.root,
            ComparisonForm::Constant(_) => {
                return Err(Error::Instance(format!("planted lines {i} and {j} are parallel")))
            }
        };
        Ok(PlantedInstance { lines, star, pair })
    }

    pub fn lines(&self) -> &[Line] {
        &self.lines
    }

    pub fn star(&self) -> &Scalar {
        &self.star
    }

    pub fn pair(&self) -> (usize, usize) {
        self.pair
    }
}

impl Problem for PlantedInstance {
    fn item_count(&self) -> usize {
        self.lines.len()
    }

    fn compare(&self, i: usize, j: usize) -> ComparisonForm {
        line_form(&self.lines[i], &self.lines[j], i, j)
    }

    fn oracle(&self, lambda: &Scalar) -> OracleAnswer {
        match lambda.cmp(&self.star) {
            std::cmp::Ordering::Less => OracleAnswer::Below,
            std::cmp::Ordering::Equal => OracleAnswer::At,
            std::cmp::Ordering::Greater => OracleAnswer::Above,
        }
    }

    fn recover(&self, _perm: &[usize], interval: &SearchInterval) -> Result<Scalar, Error> {
        interval.found().cloned().ok_or_else(|| {
            Error::Instance(format!("planted optimum never confirmed; interval {interval}"))
        })
    }

    fn value_at(&self, item: usize, lambda: &Scalar) -> Option<Scalar> {
        Some(self.lines[item].value_at(lambda))
    }
}

/// [`planted_make_with`] using the default coefficient range.
pub fn planted_make(n: usize, seed: u64) -> Result<PlantedInstance, Error> {
    planted_make_with(n, seed, DEFAULT_COEFF_MAX)
}

/// `n ≥ 2` distinct lines with nonzero slopes `±p/q` and intercepts `±p'/q'`;
/// λ* is the crossing of a uniformly chosen non-parallel pair.
pub fn planted_make_with(n: usize, seed: u64, coeff_max: u64) -> Result<PlantedInstance, Error> {
    if n < 2 {
        return Err(Error::Instance(format!("planted instance needs n >= 2, got {n}")));
    }
    if coeff_max < 2 {
        return Err(Error::Instance("planted instance needs coeff_max >= 2".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draw = |rng: &mut ChaCha8Rng| {
        let p = rng.random_range(1..=coeff_max);
        let q = rng.random_range(1..=coeff_max);
        let v = Scalar::new(p, q).expect("q >= 1");
        if rng.random_bool(0.5) {
            -v
        } else {
            v
        }
    };
    let mut lines = Vec::with_capacity(n);
    let mut seen = HashSet::with_capacity(n);
    while lines.len() < n {
        let line = Line::new(draw(&mut rng), draw(&mut rng));
        if seen.insert(line.clone()) {
            lines.push(line);
        }
    }
    loop {
        let i = rng.random_range(0..n);
        let j = rng.random_range(0..n);
        if i != j && lines[i].a != lines[j].a {
            return PlantedInstance::new(lines, (i, j));
        }
        // all slopes equal: redraw one line
        if lines.iter().all(|l| l.a == lines[0].a) {
            let k = rng.random_range(0..n);
            let line = Line::new(draw(&mut rng), draw(&mut rng));
            if !lines.contains(&line) {
                lines[k] = line;
            }
        }
    }
}
