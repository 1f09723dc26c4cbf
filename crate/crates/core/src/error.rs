use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A configuration field is out of its admissible range.
    #[error("invalid config field `{field}`: {reason}")]
    Config { field: &'static str, reason: String },

    #[error("index ({l}, {k}) outside the {m}x{n} grid")]
    Index { l: usize, k: usize, m: usize, n: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: String, got: String },

    /// Quadrature or factorization produced a result that violates a structural invariant.
    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("degenerate configuration: {0}")]
    Degenerate(String),

    /// Wraps an error raised inside a Monte Carlo sweep with the point it came from.
    #[error("realization {realization}, snr {snr_db} dB: {source}")]
    Sweep {
        realization: usize,
        snr_db: f64,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn config(field: &'static str, reason: impl Into<String>) -> Self {
        Error::Config {
            field,
            reason: reason.into(),
        }
    }

    pub(crate) fn dim(expected: impl ToString, got: impl ToString) -> Self {
        Error::Dimension {
            expected: expected.to_string(),
            got: got.to_string(),
        }
    }

    /// True for errors caused by the numerics rather than the inputs.
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::Numerical(_) | Error::Degenerate(_) => true,
            Error::Sweep { source, .. } => source.is_numerical(),
            _ => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
