use std::fmt;

use thiserror::Error;

/// Temporal and boolean operators, used to name the operator in errors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Operator {
    Comp,
    And,
    Or,
    Next,
    Always,
    Eventually,
    Until,
    Release,
}

impl fmt::Display for Operator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Operator::Comp => "Comp",
            Operator::And => "And",
            Operator::Or => "Or",
            Operator::Next => "Next",
            Operator::Always => "Always",
            Operator::Eventually => "Eventually",
            Operator::Until => "Until",
            Operator::Release => "Release",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("state index {index} out of range for path width {width}")]
    IndexOutOfRange { index: i64, width: usize },

    #[error("negation of {0} is not expressible in this constraint language")]
    UnsupportedNegation(Operator),

    #[error("relaxation factor must be positive for derivatives, got {0}")]
    NonpositiveGamma(f64),

    #[error("syntax error at byte {offset}: expected {expected}")]
    Syntax { offset: usize, expected: String },

    #[error("dimension mismatch: expected {expected_rows}x{expected_cols}, found {found_rows}x{found_cols}")]
    DimensionMismatch {
        expected_rows: usize,
        expected_cols: usize,
        found_rows: usize,
        found_cols: usize,
    },

    #[error("row {row}: expected {expected} values, found {found}")]
    RaggedRow {
        row: usize,
        expected: usize,
        found: usize,
    },

    #[error("row {row}: {message}")]
    BadValue { row: usize, message: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
