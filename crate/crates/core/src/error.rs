use thiserror::Error;

pub type Result<T, E = DisperseError> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DisperseError {
    #[error("invalid species parameter `{field}`: {reason}")]
    InvalidSpecies { field: &'static str, reason: String },

    #[error("invalid argument `{field}`: {reason}")]
    InvalidArgument { field: &'static str, reason: String },

    #[error("series did not converge: {0}")]
    NonConvergent(String),

    #[error(
        "fugacity solve hit {bound}: degeneracy target {target:.6e} exceeds the limit {limit:.6e}"
    )]
    DegeneracyOutOfRange {
        target: f64,
        limit: f64,
        bound: &'static str,
    },

    #[error("singular input: {0}")]
    SingularInput(String),

    #[error("adaptive quadrature failed: {0}")]
    QuadratureFailure(String),

    #[error("root solve did not converge after {iterations} iterations (|F| = {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("singular jacobian (condition estimate {condition:.3e})")]
    SingularJacobian { condition: f64 },

    #[error("no seed converged at k = {k:.6e}")]
    SeedFailure { k: f64 },

    #[error("branch {branch} is not compatible with this species: {reason}")]
    IncompatibleBranch { branch: &'static str, reason: String },

    #[error("velocity grid cannot resolve phase mixing: k v_max t_end = {mixing:.3e} > n_v pi = {limit:.3e}")]
    GridResonanceUnderresolved { mixing: f64, limit: f64 },

    #[error("numerical blow-up: |N| grew by {growth:.3e}")]
    NumericalBlowup { growth: f64 },

    #[error("spectral fit is ambiguous: {0}")]
    FitAmbiguous(String),

    #[error("record too short for a fit: {0}")]
    InsufficientRecord(String),
}
