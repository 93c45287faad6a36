use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("multipole coefficient gamma must be nonzero")]
    ZeroGamma,

    #[error("basis Gram matrix is ill-conditioned (condition number {condition:.3e})")]
    IllConditionedBasis { condition: f64 },

    #[error("particle capacity {cap} exceeded")]
    CapacityExceeded { cap: usize },

    #[error("smearing function is not in the sector span (relative residual {residual:.3e})")]
    NotInSpan { residual: f64 },

    #[error("vectors belong to different sectors or bases")]
    SectorMismatch,

    #[error("no sector of order {0} in this Fock space")]
    UnknownSector(usize),

    #[error("quadrature did not converge for {what}: error estimate {estimate:.3e} > tolerance {tolerance:.3e}")]
    QuadratureFailure { what: &'static str, estimate: f64, tolerance: f64 },

    #[error("gamma_{n} has imaginary residue {im:.3e} against real part {re:.3e}")]
    ImaginaryResidue { n: usize, re: f64, im: f64 },

    #[error("|I(sigma)| has not decayed below the truncation bound by sigma = {sigma}")]
    SlowDecay { sigma: f64 },

    #[error("energy shell root k = {k} has |omega'(k)| = {slope:.3e}")]
    DegenerateRoot { k: f64, slope: f64 },

    #[error("all errors must exceed the quadrature floor {floor:e}")]
    BelowFloor { floor: f64 },

    #[error("rate fit needs at least 3 points, got {0}")]
    InsufficientPoints(usize),

    #[error("word length {len} exceeds the enumeration limit {max}")]
    WordTooLong { len: usize, max: usize },

    #[error("letters of one correlation must share a channel family")]
    MixedChannels,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
