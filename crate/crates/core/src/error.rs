use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(&'static str),

    #[error("configuration index {index} out of range for n = {n}")]
    ConfigurationOutOfRange { index: usize, n: usize },

    #[error("enumeration infeasible: n = {n} exceeds the cap of {cap}")]
    EnumerationInfeasible { n: usize, cap: usize },

    #[error("degenerate Hamiltonian: all couplings and fields are zero")]
    DegenerateHamiltonian,

    #[error("size mismatch: expected {expected}, found {found}")]
    SizeMismatch { expected: usize, found: usize },

    #[error("proposal kernel is not symmetric; the Hastings correction cannot be dropped")]
    NonSymmetricKernel,

    #[error("proposal matrix column {column} sums to {sum}, not 1")]
    NotNormalized { column: usize, sum: f64 },

    #[error("chain not stochastic or reducible: {0}")]
    NotErgodic(&'static str),

    #[error("symmetric eigensolver did not converge")]
    EigensolverDiverged,

    #[error("degenerate AR landscape: acceptance rate is flat over (0, {theta_max}]")]
    DegenerateLandscape { theta_max: f64 },

    #[error("fit needs at least {needed} points, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("non-positive mean gap {value} at n = {n}")]
    NonPositiveMean { n: usize, value: f64 },
}
