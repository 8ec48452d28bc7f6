use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed text input. `line` is 1-based.
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid {what}: {message}")]
    Invalid { what: &'static str, message: String },

    #[error("missing {kind} `{name}`")]
    Missing { kind: &'static str, name: String },

    #[error("rasters are not aligned: `{field}` differs")]
    Misaligned { field: &'static str },

    #[error("pairwise matrix is not reciprocal at ({row}, {col}): a_ij * a_ji = {product}")]
    NotReciprocal { row: usize, col: usize, product: f64 },

    #[error("power iteration did not converge within {0} iterations")]
    NoConvergence(usize),

    #[error("degenerate ordination: {0}")]
    Degenerate(String),

    #[error("consistency ratio {cr:.4} exceeds {limit}")]
    Inconsistent { cr: f64, limit: f64 },
}

impl Error {
    pub(crate) fn invalid(what: &'static str, message: impl Into<String>) -> Self {
        Error::Invalid {
            what,
            message: message.into(),
        }
    }

    pub(crate) fn missing(kind: &'static str, name: impl Into<String>) -> Self {
        Error::Missing {
            kind,
            name: name.into(),
        }
    }

    /// True for failures of the numerics rather than of the inputs.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::NoConvergence(_) | Error::Degenerate(_) | Error::Inconsistent { .. }
        )
    }
}
