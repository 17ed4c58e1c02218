use thiserror::Error;

use crate::engine::SearchInterval;
use crate::scalar::Scalar;

#[derive(Debug, Error)]
pub enum Error {
    /// The oracle contradicted answers it gave earlier in the run.
    #[error("oracle answer {answer} at {root} contradicts interval {interval}")]
    InconsistentOracle {
        root: Scalar,
        answer: String,
        interval: Box<SearchInterval>,
    },

    /// `recover` returned a value the final interval rules out.
    #[error("recovered value {value} lies outside {interval}")]
    RecoverOutOfRange {
        value: Scalar,
        interval: Box<SearchInterval>,
    },

    /// Duplicate win counts after an all-pairs sort: the comparator is not a
    /// strict total order.
    #[error("intransitive comparator: duplicate win counts among {items:?}")]
    Intransitive { items: Vec<usize> },

    #[error("invalid instance: {0}")]
    Instance(String),

    #[error("empty input")]
    EmptyInput,

    #[error("weight must be positive and finite, got {0}")]
    InvalidWeight(f64),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("line {line}: {msg}")]
    Format { line: usize, msg: String },
}
