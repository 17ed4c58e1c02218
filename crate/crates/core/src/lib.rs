//! Parametric search with weight-scheduled boxsort.
//!
//! A [`Problem`] supplies λ-dependent comparisons between items and a decision
//! oracle for λ*. The drivers sort the items at the unknown λ* while calling
//! the oracle as rarely as possible, then recover λ* from the sorted order.
//! [`boxsort`] schedules comparisons by weighted median and needs O(log n)
//! oracle calls with high probability; [`quicksort`] is the level-by-level
//! baseline.

pub mod boxsort;
pub mod driver;
pub mod engine;
pub mod error;
pub mod problems;
pub mod quicksort;
pub mod scalar;
pub mod selection;

pub use boxsort::{boxsort_plain, boxsort_plain_seeded};
pub use driver::{Driver, DriverConfig, Fault, InvariantKind, Outcome, Violation};
pub use engine::{
    apply_form, finalize, resolve_root, ComparisonForm, OracleAnswer, Order, Pivot, Problem, RootSide,
    RunStats, SearchInterval,
};
pub use error::Error;
pub use scalar::Scalar;
pub use selection::{plain_median, weighted_median, WeightedKey};
