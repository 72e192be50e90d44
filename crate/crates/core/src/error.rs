use thiserror::Error;

pub type Result<T> = std::result::Result<T, SepError>;

#[derive(Debug, Error)]
pub enum SepError {
    /// Malformed input: bad indices, out-of-range probabilities, asymmetric laws.
    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("site count {n} exceeds the cap of {cap}")]
    TooManySites { n: usize, cap: usize },

    /// Green series diverges: the kernel has no killing, so the walk is recurrent.
    #[error("Green function diverges: kernel is stochastic (recurrent finite chain); use a killed truncation")]
    Recurrent,

    #[error("polynomial is identically zero")]
    ZeroPolynomial,

    /// Bernoulli decomposition refused; carries the offending root.
    #[error("polynomial is not real-rooted: root {re} + {im}i")]
    NotRealRooted { re: f64, im: f64 },

    #[error("horizon monitor failed at T={horizon}: integrand {integrand:e}, boundary occupation {boundary:e}; deepen the truncation")]
    HorizonMonitor {
        horizon: f64,
        integrand: f64,
        boundary: f64,
    },

    #[error("no convergence: {0}")]
    NoConvergence(String),

    #[error("degenerate sample: {0}")]
    Degenerate(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl SepError {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        SepError::Invalid(msg.into())
    }
}
