//! Concrete problems: the median-of-lines problem and a planted-root problem with
//! a known optimum, plus generators, brute-force solvers and the line file
//! format.

mod format;
mod lines;
mod planted;

pub use format::{parse_lines, write_lines};
pub use lines::{gen_mol, mol_brute, MedianOfLines, DEFAULT_COEFF_MAX};
pub use planted::{planted_make, planted_make_with, PlantedInstance};

use crate::engine::{ComparisonForm, Order};
use crate::scalar::Scalar;

/// The line `y = a·x + b`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Line {
    pub a: Scalar,
    pub b: Scalar,
}

impl Line {
    pub fn new(a: Scalar, b: Scalar) -> Self {
        Line { a, b }
    }

    pub fn value_at(&self, x: &Scalar) -> Scalar {
        &(&self.a * x) + &self.b
    }

    /// Where the line meets the x-axis. Panics on a horizontal line.
    pub fn axis_root(&self) -> Scalar {
        -(&self.b / &self.a)
    }
}

/// Compares line `i` with line `j` by their values at λ*, ties broken by
/// index.
///
/// Panics if the two lines coincide.
pub fn line_form(li: &Line, lj: &Line, i: usize, j: usize) -> ComparisonForm {
    if li.a == lj.a {
        assert!(li.b != lj.b, "lines {i} and {j} coincide");
        let order = if li.b < lj.b { Order::FirstLow } else { Order::FirstHigh };
        return ComparisonForm::Constant(order);
    }
    let slope_diff = &li.a - &lj.a;
    let root = &(&lj.b - &li.b) / &slope_diff;
    // value_i − value_j = slope_diff · (λ − root)
    let below = if slope_diff.is_positive() { Order::FirstLow } else { Order::FirstHigh };
    ComparisonForm::pivotal(root, below, Order::by_index(i, j), below.reverse())
}
