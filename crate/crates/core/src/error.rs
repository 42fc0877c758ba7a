use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{function} is undefined at {value}")]
    Domain { function: &'static str, value: f64 },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("quadrature on [{a}, {b}] did not converge (estimate {estimate:.6e}, error {error:.3e})")]
    NonConvergence {
        a: f64,
        b: f64,
        estimate: f64,
        error: f64,
    },

    #[error("profile is not normalized: ∫ k h(k) dk = {total:.12} (tolerance {tolerance:.1e})")]
    NotNormalized { total: f64, tolerance: f64 },

    #[error("{positions} positions but {circulations} circulations")]
    LengthMismatch {
        positions: usize,
        circulations: usize,
    },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("empty region: {0}")]
    EmptyRegion(String),

    #[error("degenerate curve: total arc length is zero")]
    DegenerateCurve,

    #[error("exact kernel evaluated at zero separation (target {target}, source {source_index})")]
    Collision { target: usize, source_index: usize },

    #[error("Picard iteration stopped contracting at n = {iteration} (rho = {rho:.3e}) on horizon {horizon}")]
    PicardDivergence {
        iteration: usize,
        rho: f64,
        horizon: f64,
    },

    #[error("malformed profile table: {0}")]
    ProfileFormat(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
