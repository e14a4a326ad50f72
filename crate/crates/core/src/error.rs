use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A truncated state carries non-negligible population at the edge of
    /// its Fock cutoff.
    #[error(
        "cutoff insufficient ({context}): population {population:.3e} in the top two Fock levels \
         of cutoff {cutoff} exceeds {eps:.1e}; increase the cutoff"
    )]
    CutoffInsufficient {
        context: &'static str,
        cutoff: usize,
        population: f64,
        eps: f64,
    },

    #[error("invalid amplifier specification: {0}")]
    InvalidSpec(String),

    /// Normal ordering (s = +1) has zero input noise, so SNRs and noise
    /// figures are singular there.
    #[error("s = +1 (normal ordering) gives a singular SNR")]
    SingularOrdering,

    #[error("s-ordering parameter {0} outside [-1, 1]")]
    InvalidOrdering(f64),

    #[error("matrix is not Hermitian (max deviation {0:.3e})")]
    NotHermitian(f64),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("numerical failure: {0}")]
    Numerical(String),
}
