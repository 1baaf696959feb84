//! Error type shared across the toolkit.

/// Errors surfaced by samplers, simulators and estimators.
///
/// The variants map onto the CLI exit-code contract: configuration and
/// parameter-domain problems are user errors (exit 2), violated statistical
/// preconditions are exit 3, resource caps exit 4.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A numeric argument is outside its domain (e.g. non-positive rate).
    #[error("parameter out of domain: {0}")]
    ParameterDomain(String),

    /// The requested configuration is inconsistent (dimension/rule mismatch,
    /// empty grids, undersized horizons, ...).
    #[error("configuration error: {0}")]
    Configuration(String),

    /// A statistical precondition does not hold (e.g. drift within the
    /// ambiguous band around the estimated critical speed).
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// The configuration is valid in general but not supported here
    /// (e.g. barrier features in dimension > 1).
    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    /// A safety cap was exceeded (e.g. branching population cap).
    #[error("resource cap exceeded: {0}")]
    ResourceCap(String),
}

pub type Result<T> = std::result::Result<T, Error>;
