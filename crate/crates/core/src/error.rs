use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("eigendecomposition did not converge for a {dim}x{dim} matrix")]
    NoConvergence { dim: usize },

    #[error("matrix is not Hermitian (max deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("invalid density matrix: {0}")]
    InvalidState(String),

    #[error("non-finite parameter `{name}` = {value}")]
    NonFinite { name: &'static str, value: f64 },

    #[error("truncation leakage {leakage:.3e} exceeds threshold; at least {required_levels} Fock levels are needed")]
    Truncation { leakage: f64, required_levels: usize },

    #[error("coherence chi = {chi} outside the admissible range |chi| <= {chi_max}")]
    Positivity { chi: f64, chi_max: f64 },

    #[error("unphysical covariance: sqrt(det sigma) = {root_det} is below the uncertainty bound 1/2")]
    Unphysical { root_det: f64 },

    #[error("genome does not match layout: {0}")]
    Layout(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{0}")]
    Other(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Short machine-readable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Self::Dimension(_) => "dimension",
            Self::NoConvergence { .. } => "no_convergence",
            Self::NotHermitian { .. } => "not_hermitian",
            Self::InvalidState(_) => "invalid_state",
            Self::NonFinite { .. } => "non_finite",
            Self::Truncation { .. } => "truncation",
            Self::Positivity { .. } => "positivity",
            Self::Unphysical { .. } => "unphysical",
            Self::Layout(_) => "layout",
            Self::Config(_) => "config",
            Self::Other(_) => "other",
            Self::Io(_) => "io",
            Self::Json(_) => "json",
        }
    }
}
