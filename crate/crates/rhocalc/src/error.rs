use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// Syntax error while parsing a net expression.
    #[error("syntax error at line {line}, column {col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },

    /// A net expression could not be evaluated at some grid point.
    #[error("evaluation error at eps={eps}: {msg} (in `{expr}`)")]
    Eval { eps: f64, msg: String, expr: String },

    /// Bad gauge or grid (rho outside (0,1], non-decreasing, empty grid, ...).
    #[error("invalid gauge: {0}")]
    Gauge(String),

    /// Construction of a generalized number failed the moderateness test.
    #[error("net is not moderate over the gauge: {0}")]
    NotModerate(String),

    /// An operation required an invertible number and did not get one.
    #[error("not invertible: {0}")]
    NotInvertible(String),

    /// Two operands live over different gauges.
    #[error("gauge mismatch: {0}")]
    GaugeMismatch(String),

    /// A probe or evaluation point fell outside the declared domain.
    #[error("point outside domain: {0}")]
    OutsideDomain(String),

    /// A quadrature failed to converge to its target accuracy.
    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    /// The operation's preconditions do not hold for the given input.
    #[error("invalid input: {0}")]
    Invalid(String),

    /// A certification step failed hard (not merely Undecidable).
    #[error("certification failed: {0}")]
    Certify(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }
}
