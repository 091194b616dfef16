use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("operating point is unstable (max Re λ = {max_real:.6e} rad/s)")]
    Unstable { max_real: f64 },

    #[error("quadrature did not converge: estimate {estimate:.6e}, error bound {error_bound:.6e}")]
    NonConvergence { estimate: f64, error_bound: f64 },

    #[error("eigenvalue solver did not converge")]
    EigenFailure,

    #[error("computation error: {0}")]
    Computation(String),

    #[error("optimal phase undefined: both phase-dependent energy coefficients vanish")]
    UndefinedPhase,

    #[error("calibration failed: {reason} (best T_eff = {best_t_eff:.6e} K, relative residual {residual:.3e})")]
    Calibration {
        reason: String,
        best_t_eff: f64,
        residual: f64,
    },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
