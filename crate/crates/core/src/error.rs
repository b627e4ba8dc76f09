use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("{what}: argument {z} is outside the validity domain")]
    Domain { what: &'static str, z: Complex64 },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("unsupported operation: {0}")]
    Unsupported(&'static str),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error(
        "boundary data too rough for a spectral radial derivative: tail energy ratio {tail_ratio:e} exceeds {limit:e}"
    )]
    Regularity { tail_ratio: f64, limit: f64 },

    #[error(
        "Picard iteration did not converge in {iterations} steps (last change {last_change:e}, contraction factor {factor:.3}); reduce epsilon or the damping"
    )]
    NonConvergence {
        iterations: usize,
        last_change: f64,
        factor: f64,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(what: &'static str, z: Complex64) -> Error {
    Error::Domain { what, z }
}
