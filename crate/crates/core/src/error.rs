use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("quadrature did not converge on [{start}, {end}] (error estimate {estimate:e})")]
    Quadrature { start: f64, end: f64, estimate: f64 },

    #[error("coordinate {r} is outside the numeric range of the inverse arclength map")]
    OutOfRange { r: f64 },

    #[error("potential is not finite at r = {r}")]
    NonFinitePotential { r: f64 },

    #[error("grid too coarse: {nodes} nodes (need at least {required})")]
    GridTooCoarse { nodes: usize, required: usize },

    #[error("eigenvalue iteration did not converge (achieved residual {residual:e})")]
    NonConvergence { residual: f64 },

    #[error("empty input: {0}")]
    Empty(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
