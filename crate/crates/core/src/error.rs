use thiserror::Error;

/// Errors raised by every fallible operation in the crate.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// Malformed numeric token. `line` is 1-based when the token came from a file.
    #[error("{}cannot parse `{token}` as a rational number", line_prefix(.line))]
    Parse { token: String, line: Option<usize> },

    #[error("zero denominator in `{token}`")]
    ZeroDenominator { token: String },

    /// The multiset does not sum to zero; `residual` is the exact sum in `p/q` form.
    #[error("multiset is not zero-sum: elements sum to {residual}")]
    NonZeroSum { residual: String },

    /// Input outside the domain an operation is defined on.
    #[error("{0}")]
    Domain(String),

    /// A state-space or enumeration guard refused the request.
    #[error("{what} is {size}, which exceeds the limit of {limit}")]
    TooLarge {
        what: &'static str,
        size: String,
        limit: String,
    },

    #[error("i/o error: {0}")]
    Io(String),
}

fn line_prefix(line: &Option<usize>) -> String {
    match line {
        Some(l) => format!("line {l}: "),
        None => String::new(),
    }
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn too_large(what: &'static str, size: impl ToString, limit: impl ToString) -> Self {
        Error::TooLarge {
            what,
            size: size.to_string(),
            limit: limit.to_string(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
