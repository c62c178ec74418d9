use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },

    #[error("unknown identifier `{name}` at byte {pos}")]
    UnknownIdentifier { name: String, pos: usize },

    /// Evaluation hit a pole, a log branch or a non-finite value.
    #[error("domain error in `{subterm}`: {reason}")]
    Domain { subterm: String, reason: String },

    #[error("order {order} exceeds truncation horizon {horizon}")]
    HorizonExceeded { order: usize, horizon: usize },

    #[error("operand mismatch: {0}")]
    Mismatch(String),

    #[error("jet degree budget exhausted: need {needed}, have {available}")]
    DegreeBudget { needed: usize, available: usize },

    #[error("not boundedly extendable on the polydisc (t = {t}): {reason}")]
    NotExtendable { t: f64, reason: String },

    #[error("target tail {target:e} unreachable within order {max_order} on [{start}, {end}]")]
    TailUnreachable {
        target: f64,
        max_order: usize,
        start: f64,
        end: f64,
    },

    #[error("blow-up suspected: certified up to t = {reached} after {subintervals} subintervals ({reason})")]
    BlowUp {
        reached: f64,
        subintervals: usize,
        reason: String,
    },

    #[error("certificate does not match the request: {0}")]
    CertificateMismatch(String),

    #[error("size guard exceeded: {0}")]
    SizeGuard(String),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    pub fn domain(subterm: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Domain {
            subterm: subterm.into(),
            reason: reason.into(),
        }
    }

    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Invalid(format!("json: {e}"))
    }
}
