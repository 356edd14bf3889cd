use thiserror::Error;

/// Errors shared across the exact, truncated and cyclotomic layers.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// Euclidean division left a nonzero remainder where exact divisibility
    /// was required (or asserted as a theorem).
    #[error("euclidean division has nonzero remainder")]
    NonzeroRemainder,
    /// The divisor of a Euclidean division must be monic and nonzero.
    #[error("divisor is not monic")]
    NotMonic,
    /// Inversion of a truncated series whose constant term is not a unit.
    #[error("constant coefficient is not a unit mod p")]
    NotAUnit,
    /// The t-adic truncation order is too small for the requested operation.
    #[error("t-adic precision too low: need N >= {needed}, have {have}")]
    PrecisionTooLow { needed: usize, have: usize },
    /// Two truncated values with different primes were combined.
    #[error("precision mismatch: incompatible primes {0} and {1}")]
    PrimeMismatch(u32, u32),
    /// Mixed coefficient rings or mismatched divided-power order caps.
    #[error("incompatible operands: {0}")]
    RingMismatch(&'static str),
    /// Divided-power bookkeeping needs (k)_{q^p}! to be a unit, so the
    /// order cap must stay below p.
    #[error("omega order cap {cap} too high for p = {p}")]
    OrderCapTooHigh { cap: usize, p: u32 },
    /// Operation only defined at p = 2.
    #[error("operation requires p = 2, got p = {0}")]
    WrongPrime(u32),
    /// The connection is not weakly nilpotent, so no hyperstratification exists.
    #[error("connection is not weakly nilpotent")]
    NotWeaklyNilpotent,
    /// A successive-approximation solver failed to contract.
    #[error("solver residual failed to contract after {0} rounds")]
    NoConvergence(usize),
    /// Conversion series input does not decay p-adically.
    #[error("conversion input does not converge")]
    NonConvergent,
    /// A rational coefficient was expected to be p-integral but is not.
    #[error("coefficient is not p-integral")]
    NotPIntegral,
    /// Unknown verification suite identifier.
    #[error("unknown suite: {0}")]
    UnknownSuite(String),
    /// Malformed input (polynomial literal, report file, ...).
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
