use thiserror::Error;

/// Errors surfaced by the evaluators, samplers and the verification harness.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument left the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The requested point sits on the origin singularity of a weight
    /// or kernel (log-divergent for products of two or more factors).
    #[error("singular at the origin: {0}")]
    SingularAtOrigin(String),

    /// A quadrature did not meet its tail bound or tolerance within the
    /// allowed number of refinements.
    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    /// A numerical routine (eigensolver, fit, CDF tabulation) failed.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// Invalid run configuration (CLI arguments or config file).
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
