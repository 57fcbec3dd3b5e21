//! Crate-wide error type.

use thiserror::Error;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    /// Adaptive quadrature exhausted its node budget; carries the best
    /// estimate and its error bound so callers can still inspect it.
    #[error("quadrature did not converge: best estimate {estimate}, error bound {error_bound} > tol {tol}")]
    QuadratureFailure {
        estimate: f64,
        error_bound: f64,
        tol: f64,
    },

    /// Character-expansion tail is not below tolerance at the requested cutoff.
    #[error("character expansion truncated too early (cutoff {cutoff}, tail {tail:e}){}", smallest_adequate.map(|c| format!(", smallest adequate cutoff ~{c}")).unwrap_or_default())]
    TruncationInsufficient {
        cutoff: usize,
        tail: f64,
        smallest_adequate: Option<usize>,
    },

    /// A quantity left its mathematically guaranteed range; signals a
    /// truncation or quadrature fault upstream, never silently clamped.
    #[error("internal consistency violated: {0}")]
    InternalConsistency(String),

    /// Input outside the domain of a closed form (dual coupling at a ≤ 0,
    /// g(x) at |x| ≥ 1, nonpositive bracket under a square root, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// Parameters lie in a phase the requested formula does not cover.
    #[error("phase error: {0}")]
    Phase(String),

    /// Exhaustive enumeration / transfer-matrix size caps.
    #[error("resource cap exceeded: {what} = {requested} > cap {cap}")]
    SizeCap {
        what: &'static str,
        requested: usize,
        cap: usize,
    },

    /// Correlator requested for the trivial representation.
    #[error("trivial representation rejected: {0}")]
    TrivialIrrep(String),

    /// Monte Carlo chain never visited one of the twist sectors.
    #[error("failed tunneling: {0}")]
    FailedTunneling(String),

    #[error("invalid specification: {0}")]
    InvalidSpec(String),
}

pub type Result<T> = std::result::Result<T, Error>;
