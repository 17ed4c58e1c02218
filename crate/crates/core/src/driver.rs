//! Types shared by the boxsort and quicksort drivers.

use std::fmt;

use crate::engine::{Problem, RunStats, SearchInterval};
use crate::error::Error;
use crate::scalar::Scalar;
use crate::{boxsort, quicksort};

/// Deliberate defects for checking that the invariant suite catches them.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Fault {
    /// Routing steps pass their full weight to the next step instead of half.
    UnhalvedRouting,
}

#[derive(Clone, Debug, Default)]
pub struct DriverConfig {
    /// Subproblems smaller than this are sorted by all-pairs comparison.
    /// Defaults to `max(⌈log₂ N⌉, 4)`.
    pub base_threshold: Option<usize>,
    /// Record invariant violations while running.
    pub check_invariants: bool,
    pub fault: Option<Fault>,
}

impl DriverConfig {
    pub fn checked() -> Self {
        DriverConfig {
            check_invariants: true,
            ..Self::default()
        }
    }
}

/// `max(⌈log₂ n⌉, 4)`.
pub fn default_base_threshold(n: usize) -> usize {
    ceil_log2(n).max(4)
}

pub(crate) fn ceil_log2(n: usize) -> usize {
    if n <= 1 {
        0
    } else {
        (usize::BITS - (n - 1).leading_zeros()) as usize
    }
}

pub(crate) fn floor_log2(n: usize) -> usize {
    debug_assert!(n > 0);
    (usize::BITS - 1 - n.leading_zeros()) as usize
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum InvariantKind {
    /// An activation batch received more than half its trigger's weight.
    WeightRule,
    /// An activated comparison weighs less than 4^(−virtual depth).
    WeightFloor,
    /// The median's decided side held less than half the in-interval weight.
    MedianSplit,
    IntervalWidened,
    /// `median_requests ≠ oracle_calls + free_resolutions`.
    Counters,
    /// The oracle was consulted for a root the interval already settled.
    OracleOutsideInterval,
    NotSorted,
    OracleNotMonotone,
    /// A quicksort level used more oracle calls than ⌈log₂ k⌉ + 1.
    LevelBudget,
}

impl fmt::Display for InvariantKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            InvariantKind::WeightRule => "weight-rule",
            InvariantKind::WeightFloor => "weight-floor",
            InvariantKind::MedianSplit => "median-split",
            InvariantKind::IntervalWidened => "interval-widened",
            InvariantKind::Counters => "counters",
            InvariantKind::OracleOutsideInterval => "oracle-outside-interval",
            InvariantKind::NotSorted => "not-sorted",
            InvariantKind::OracleNotMonotone => "oracle-not-monotone",
            InvariantKind::LevelBudget => "level-budget",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Violation {
    pub turn: u64,
    pub kind: InvariantKind,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "turn {}: {}: {}", self.turn, self.kind, self.detail)
    }
}

/// Result of one driver run.
#[derive(Clone, Debug)]
pub struct Outcome {
    /// Items in sorted order at λ*.
    pub perm: Vec<usize>,
    pub lambda: Scalar,
    pub interval: SearchInterval,
    pub stats: RunStats,
    /// Empty unless invariant checking was enabled.
    pub violations: Vec<Violation>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Driver {
    Boxsort,
    Quicksort,
}

impl Driver {
    pub fn name(self) -> &'static str {
        match self {
            Driver::Boxsort => "boxsort",
            Driver::Quicksort => "quicksort",
        }
    }

    pub fn run<P: Problem + ?Sized>(
        self,
        problem: &P,
        seed: u64,
        config: &DriverConfig,
    ) -> Result<Outcome, Error> {
        match self {
            Driver::Boxsort => boxsort::run(problem, seed, config),
            Driver::Quicksort => quicksort::run(problem, seed, config),
        }
    }
}

impl fmt::Display for Driver {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Checks that `perm` lists the items in increasing value at `lambda`, equal
/// values ordered by index. `None` if the problem cannot evaluate items.
pub fn is_sorted_at<P: Problem + ?Sized>(problem: &P, perm: &[usize], lambda: &Scalar) -> Option<bool> {
    let mut prev: Option<(usize, Scalar)> = None;
    for &item in perm {
        let v = problem.value_at(item, lambda)?;
        if let Some((p, pv)) = &prev {
            if !(pv < &v || (pv == &v && *p < item)) {
                return Some(false);
            }
        }
        prev = Some((item, v));
    }
    Some(true)
}

/// Checks the counter identity and oracle monotonicity at the end of a run.
pub(crate) fn final_checks<P: Problem + ?Sized>(
    problem: &P,
    outcome: &mut Outcome,
) {
    let st = &outcome.stats;
    let turn = st.turns;
    if st.median_requests != st.oracle_calls + st.free_resolutions {
        outcome.violations.push(Violation {
            turn,
            kind: InvariantKind::Counters,
            detail: format!(
                "median_requests {} != oracle_calls {} + free_resolutions {}",
                st.median_requests, st.oracle_calls, st.free_resolutions
            ),
        });
    }
    if !crate::engine::is_monotone_log(&st.oracle_log) {
        outcome.violations.push(Violation {
            turn,
            kind: InvariantKind::OracleNotMonotone,
            detail: "oracle answers are not monotone in λ".into(),
        });
    }
    if is_sorted_at(problem, &outcome.perm, &outcome.lambda) == Some(false) {
        outcome.violations.push(Violation {
            turn,
            kind: InvariantKind::NotSorted,
            detail: format!("permutation not sorted at λ* = {}", outcome.lambda),
        });
    }
}
