use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("point is outside the upper half-plane (s = {0})")]
    NotInUpperHalfPlane(f64),

    #[error("bare hypergeometric value requested at z = 0 with min(n, m) = {0} > 0")]
    ZeroArgument(u32),

    #[error("quadrature did not converge: estimated error {achieved:e} against requested {requested:e}")]
    QuadratureNonConvergence {
        achieved: f64,
        requested: f64,
        estimate: f64,
    },

    #[error("under-resolved configuration at scale s = {scale}: {detail}")]
    UnderResolved { scale: f64, detail: String },

    #[error("grid mismatch between operands")]
    GridMismatch,

    #[error("disk of radius {radius} around ({x}, {s}) is not covered by the grid")]
    DiskNotCovered { x: f64, s: f64, radius: f64 },

    #[error("size mismatch: expected {expected}, got {got}")]
    SizeMismatch { expected: usize, got: usize },

    #[error("field has zero norm")]
    ZeroField,

    #[error("inconclusive: {0}")]
    Inconclusive(String),

    #[error("internal consistency failure: {0}")]
    Consistency(String),

    #[error("equality constraint is infeasible (relative residual {residual:e})")]
    Infeasible { residual: f64 },

    #[error("malformed container: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    /// True for errors caused by the caller's input rather than by the numerics.
    pub fn is_config_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidParameter(_)
                | Error::NotInUpperHalfPlane(_)
                | Error::SizeMismatch { .. }
                | Error::GridMismatch
                | Error::Json(_)
                | Error::Format(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
