//! The contract between a parametric-search driver and a concrete problem,
//! plus the shared state every driver threads through a run: the interval
//! known to contain λ*, root resolution against it, and counters.

use std::fmt;

use crate::error::Error;
use crate::scalar::Scalar;

/// Answer of the decision algorithm for a probe λ.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum OracleAnswer {
    /// λ < λ*
    Below,
    /// λ = λ*
    At,
    /// λ > λ*
    Above,
}

impl fmt::Display for OracleAnswer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OracleAnswer::Below => "Below",
            OracleAnswer::At => "At",
            OracleAnswer::Above => "Above",
        })
    }
}

/// Position of λ* relative to a tested root ρ.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RootSide {
    /// λ* < ρ
    StarBelow,
    /// λ* = ρ
    StarAt,
    /// λ* > ρ
    StarAbove,
}

impl RootSide {
    pub fn from_answer(answer: OracleAnswer) -> Self {
        match answer {
            OracleAnswer::Below => RootSide::StarAbove,
            OracleAnswer::At => RootSide::StarAt,
            OracleAnswer::Above => RootSide::StarBelow,
        }
    }

    /// Side of λ* relative to `other`, given that this is its side relative to
    /// `root`, when that follows without further information.
    pub fn transfer(self, root: &Scalar, other: &Scalar) -> Option<RootSide> {
        match self {
            RootSide::StarAbove => (other <= root).then_some(RootSide::StarAbove),
            RootSide::StarBelow => (other >= root).then_some(RootSide::StarBelow),
            RootSide::StarAt => Some(match other.cmp(root) {
                std::cmp::Ordering::Less => RootSide::StarAbove,
                std::cmp::Ordering::Equal => RootSide::StarAt,
                std::cmp::Ordering::Greater => RootSide::StarBelow,
            }),
        }
    }
}

/// Outcome of comparing item `i` against item `j` at λ*.
///
/// Strict: problems break ties between equal values by item index, never
/// leaving it to the engine.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Order {
    /// `i` sorts before `j`.
    FirstLow,
    /// `i` sorts after `j`.
    FirstHigh,
}

impl Order {
    pub fn reverse(self) -> Order {
        match self {
            Order::FirstLow => Order::FirstHigh,
            Order::FirstHigh => Order::FirstLow,
        }
    }

    pub fn by_index(i: usize, j: usize) -> Order {
        if i < j {
            Order::FirstLow
        } else {
            Order::FirstHigh
        }
    }
}

/// A comparison between two items as a function of where λ* lies.
///
/// Only degree-one comparisons exist: either the order never changes, or it
/// flips at a single root.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ComparisonForm {
    Constant(Order),
    Pivotal(Pivot),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Pivot {
    pub root: Scalar,
    pub when_star_below: Order,
    pub when_star_at: Order,
    pub when_star_above: Order,
}

impl ComparisonForm {
    /// Builds a pivotal form, collapsing to `Constant` when the order does not
    /// depend on λ* at all.
    ///
    /// Panics if the order agrees on both sides of the root but differs at it,
    /// which no degree-one comparison can produce.
    pub fn pivotal(root: Scalar, below: Order, at: Order, above: Order) -> Self {
        if below == above {
            assert_eq!(below, at, "not a degree-one comparison at {root}");
            return ComparisonForm::Constant(below);
        }
        ComparisonForm::Pivotal(Pivot {
            root,
            when_star_below: below,
            when_star_at: at,
            when_star_above: above,
        })
    }

    pub fn root(&self) -> Option<&Scalar> {
        match self {
            ComparisonForm::Constant(_) => None,
            ComparisonForm::Pivotal(p) => Some(&p.root),
        }
    }

    /// The same comparison with its arguments swapped.
    pub fn mirrored(&self) -> Self {
        match self {
            ComparisonForm::Constant(o) => ComparisonForm::Constant(o.reverse()),
            ComparisonForm::Pivotal(p) => ComparisonForm::Pivotal(Pivot {
                root: p.root.clone(),
                when_star_below: p.when_star_below.reverse(),
                when_star_at: p.when_star_at.reverse(),
                when_star_above: p.when_star_above.reverse(),
            }),
        }
    }
}

/// Order selected by `form` once the side of λ* relative to its root is known.
/// `side` is ignored for constant forms.
pub fn apply_form(form: &ComparisonForm, side: RootSide) -> Order {
    match form {
        ComparisonForm::Constant(o) => *o,
        ComparisonForm::Pivotal(p) => match side {
            RootSide::StarBelow => p.when_star_below,
            RootSide::StarAt => p.when_star_at,
            RootSide::StarAbove => p.when_star_above,
        },
    }
}

/// What a run knows about λ*: it lies in the open interval `(lo, hi)`, and
/// equals `found` once an oracle call has answered `At`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SearchInterval {
    lo: Option<Scalar>,
    hi: Option<Scalar>,
    found: Option<Scalar>,
}

impl SearchInterval {
    /// `(−∞, +∞)`.
    pub fn unbounded() -> Self {
        Self::default()
    }

    /// Panics unless `lo < hi` when both are present.
    pub fn new(lo: Option<Scalar>, hi: Option<Scalar>) -> Self {
        if let (Some(l), Some(h)) = (&lo, &hi) {
            assert!(l < h, "empty interval ({l}, {h})");
        }
        SearchInterval { lo, hi, found: None }
    }

    pub fn lo(&self) -> Option<&Scalar> {
        self.lo.as_ref()
    }

    pub fn hi(&self) -> Option<&Scalar> {
        self.hi.as_ref()
    }

    pub fn found(&self) -> Option<&Scalar> {
        self.found.as_ref()
    }

    /// Side of λ* relative to `root` if the current knowledge settles it.
    pub fn side_of(&self, root: &Scalar) -> Option<RootSide> {
        if let Some(star) = &self.found {
            return RootSide::StarAt.transfer(star, root);
        }
        if self.lo.as_ref().is_some_and(|lo| root <= lo) {
            return Some(RootSide::StarAbove);
        }
        if self.hi.as_ref().is_some_and(|hi| root >= hi) {
            return Some(RootSide::StarBelow);
        }
        None
    }

    /// `lo < value < hi`, ignoring `found`.
    pub fn strictly_contains(&self, value: &Scalar) -> bool {
        self.lo.as_ref().is_none_or(|lo| lo < value) && self.hi.as_ref().is_none_or(|hi| value < hi)
    }

    /// `lo ≤ value ≤ hi`.
    pub fn closure_contains(&self, value: &Scalar) -> bool {
        self.lo.as_ref().is_none_or(|lo| lo <= value) && self.hi.as_ref().is_none_or(|hi| value <= hi)
    }

    /// Whether `(lo, hi)` of `self` lies inside that of `outer`.
    pub fn is_within(&self, outer: &SearchInterval) -> bool {
        let lo_ok = match (&outer.lo, &self.lo) {
            (None, _) => true,
            (Some(_), None) => false,
            (Some(o), Some(s)) => o <= s,
        };
        let hi_ok = match (&outer.hi, &self.hi) {
            (None, _) => true,
            (Some(_), None) => false,
            (Some(o), Some(s)) => s <= o,
        };
        lo_ok && hi_ok
    }

    /// Folds an oracle answer at `root` into the interval.
    pub fn record(&mut self, root: &Scalar, answer: OracleAnswer) -> Result<RootSide, Error> {
        let consistent = match answer {
            OracleAnswer::Below => {
                self.hi.as_ref().is_none_or(|hi| root < hi)
                    && self.found.as_ref().is_none_or(|f| root < f)
            }
            OracleAnswer::Above => {
                self.lo.as_ref().is_none_or(|lo| root > lo)
                    && self.found.as_ref().is_none_or(|f| root > f)
            }
            OracleAnswer::At => {
                self.strictly_contains(root) && self.found.as_ref().is_none_or(|f| f == root)
            }
        };
        if !consistent {
            return Err(Error::InconsistentOracle {
                root: root.clone(),
                answer: answer.to_string(),
                interval: Box::new(self.clone()),
            });
        }
        match answer {
            OracleAnswer::Below => {
                if self.lo.as_ref().is_none_or(|lo| root > lo) {
                    self.lo = Some(root.clone());
                }
            }
            OracleAnswer::Above => {
                if self.hi.as_ref().is_none_or(|hi| root < hi) {
                    self.hi = Some(root.clone());
                }
            }
            OracleAnswer::At => self.found = Some(root.clone()),
        }
        Ok(RootSide::from_answer(answer))
    }
}

impl fmt::Display for SearchInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.lo {
            Some(lo) => write!(f, "({lo}, ")?,
            None => f.write_str("(-inf, ")?,
        }
        match &self.hi {
            Some(hi) => write!(f, "{hi})")?,
            None => f.write_str("+inf)")?,
        }
        if let Some(star) = &self.found {
            write!(f, " found={star}")?;
        }
        Ok(())
    }
}

/// A problem whose optimum λ* can be found by sorting λ-parameterized items.
pub trait Problem {
    /// Number of items to sort; at least one.
    fn item_count(&self) -> usize;

    /// Order of items `i` and `j` at λ*, as a function of λ*.
    ///
    /// Must be deterministic, and for every placement of λ* the induced order
    /// must be a strict total order.
    fn compare(&self, i: usize, j: usize) -> ComparisonForm;

    /// The decision algorithm.
    fn oracle(&self, lambda: &Scalar) -> OracleAnswer;

    /// Extracts λ* from the items sorted at λ*. The result must lie in the
    /// closure of `interval`.
    fn recover(&self, perm: &[usize], interval: &SearchInterval) -> Result<Scalar, Error>;

    /// Value of item `i` at `lambda`, when the problem can evaluate items
    /// directly. Used only to verify sorted output.
    fn value_at(&self, _item: usize, _lambda: &Scalar) -> Option<Scalar> {
        None
    }
}

/// Counters for one run.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunStats {
    /// Median comparisons the driver asked to resolve.
    pub median_requests: u64,
    /// Requests that needed the oracle.
    pub oracle_calls: u64,
    /// Requests settled by the interval alone.
    pub free_resolutions: u64,
    /// Comparisons resolved by any means, including constant forms and sweeps.
    pub comparisons_resolved: u64,
    pub turns: u64,
    /// `(turn, total active weight)` at the start of each turn; boxsort only.
    pub active_weight_trace: Vec<(u64, f64)>,
    /// Every oracle probe in call order.
    pub oracle_log: Vec<(Scalar, OracleAnswer)>,
}

/// Decides where λ* lies relative to `root`, calling `oracle` only when the
/// interval does not already settle it.
pub fn resolve_root<F>(
    root: &Scalar,
    interval: &mut SearchInterval,
    mut oracle: F,
    stats: &mut RunStats,
) -> Result<RootSide, Error>
where
    F: FnMut(&Scalar) -> OracleAnswer,
{
    stats.median_requests += 1;
    if let Some(side) = interval.side_of(root) {
        stats.free_resolutions += 1;
        return Ok(side);
    }
    let answer = oracle(root);
    stats.oracle_calls += 1;
    stats.oracle_log.push((root.clone(), answer));
    interval.record(root, answer)
}

/// Recovers λ* from the sorted permutation and checks it against the interval.
pub fn finalize<P: Problem + ?Sized>(
    problem: &P,
    perm: &[usize],
    interval: &SearchInterval,
) -> Result<Scalar, Error> {
    let value = problem.recover(perm, interval)?;
    if !interval.closure_contains(&value) {
        return Err(Error::RecoverOutOfRange {
            value,
            interval: Box::new(interval.clone()),
        });
    }
    Ok(value)
}

/// Checks that oracle answers, replayed in order of λ, read
/// `Below… [At] Above…` with `At` at most at one λ.
pub fn is_monotone_log(log: &[(Scalar, OracleAnswer)]) -> bool {
    let mut sorted: Vec<&(Scalar, OracleAnswer)> = log.iter().collect();
    sorted.sort_by(|a, b| a.0.cmp(&b.0));
    let rank = |a: OracleAnswer| match a {
        OracleAnswer::Below => 0,
        OracleAnswer::At => 1,
        OracleAnswer::Above => 2,
    };
    let mut at: Option<&Scalar> = None;
    for w in sorted.windows(2) {
        if rank(w[0].1) > rank(w[1].1) {
            return false;
        }
        if w[0].0 == w[1].0 && w[0].1 != w[1].1 {
            return false;
        }
    }
    for (lambda, answer) in &sorted {
        if *answer == OracleAnswer::At {
            if at.is_some_and(|x| x != lambda) {
                return false;
            }
            at = Some(lambda);
        }
    }
    true
}
