use alloc::string::String;
use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Operand shapes do not agree for `op`.
    DimensionMismatch {
        op: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    },
    /// The operation needs a tall (rows >= cols) operand.
    NotTall {
        op: &'static str,
        rows: usize,
        cols: usize,
    },
    NonFinite {
        op: &'static str,
    },
    NoConvergence {
        sweeps: usize,
        max_off_diagonal: f64,
    },
    /// The rotated sketch block is numerically singular.
    SingularSketch {
        condition: f64,
    },
    NotOrthonormal {
        deviation: f64,
    },
    InvalidParameter {
        name: &'static str,
        detail: String,
    },
    /// The requested check does not apply to these factors.
    NotApplicable(&'static str),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::DimensionMismatch { op, left, right } => {
                write!(f, "{op}: dimension mismatch between {}x{} and {}x{}", left.0, left.1, right.0, right.1)
            }
            Error::NotTall { op, rows, cols } => {
                write!(f, "{op}: expected rows >= cols, got {rows}x{cols}")
            }
            Error::NonFinite { op } => write!(f, "{op}: input contains NaN or infinite entries"),
            Error::NoConvergence { sweeps, max_off_diagonal } => write!(
                f,
                "Jacobi SVD did not converge after {sweeps} sweeps (max relative off-diagonal {max_off_diagonal:e})"
            ),
            Error::SingularSketch { condition } => {
                write!(f, "rotated sketch block is numerically singular (condition estimate {condition:e})")
            }
            Error::NotOrthonormal { deviation } => {
                write!(f, "basis is not orthonormal (max |X^T X - I| = {deviation:e})")
            }
            Error::InvalidParameter { name, detail } => write!(f, "invalid parameter `{name}`: {detail}"),
            Error::NotApplicable(why) => write!(f, "not applicable: {why}"),
        }
    }
}

impl core::error::Error for Error {}

pub(crate) fn invalid(name: &'static str, detail: impl Into<String>) -> Error {
    Error::InvalidParameter { name, detail: detail.into() }
}
