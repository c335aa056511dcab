use thiserror::Error;

/// Error type shared by every module of the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    /// A precondition on operation parameters was violated.
    #[error("domain error: {0}")]
    Domain(String),
    /// A configured memory or search budget would be exceeded.
    #[error("resource limit: {0}")]
    Resource(String),
    /// Factorization ran out of sieved primes for a composite cofactor.
    #[error("needs larger sieve: {0}")]
    NeedsLargerSieve(String),
}

pub type Result<T> = std::result::Result<T, Error>;
