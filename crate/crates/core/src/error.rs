use alloc::string::String;

/// Failure modes shared by every module of the crate.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("valuation of zero undefined")]
    ZeroValuation,
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("enumeration requires prime residue field (f = 1), got f = {0}")]
    NeedsPrimeResidueField(u32),
    #[error("level must be at least 1")]
    ZeroLevel,
    #[error("pole at s of order {order}")]
    Pole { order: i64 },
    #[error("zero function")]
    ZeroFunction,
    #[error("mismatched residue cardinality: {0} vs {1}")]
    QMismatch(u64, u64),
    #[error("shell index must be non-negative, got {0}")]
    NegativeShell(i64),
    #[error("point is excluded from the torus chart")]
    ExcludedPoint,
    #[error("refinement level {have} too coarse, need at least {need}")]
    Refinement { need: u32, have: u32 },
    #[error("statement form only defined for alpha = +1 or -1")]
    AlphaNotUnit,
    #[error("s = {0} lies outside the region of absolute convergence")]
    Divergent(String),
    #[error("input vector is not K0(1)-invariant")]
    NotInvariant,
    #[error("not in augmentation ideal")]
    NotAugmentation,
    #[error("level mismatch: {0} vs {1}")]
    LevelMismatch(u32, u32),
    #[error("incompatible family at level {0}")]
    IncompatibleFamily(u32),
    #[error("pairing not perfect")]
    NotPerfect,
    #[error("index {0} outside truncation")]
    Truncation(i64),
    #[error("operation requires a split torus")]
    NonSplit,
    #[error("pi_chi L-factor requires an unramified character")]
    RamifiedCharacter,
    #[error("negative norm")]
    NegativeNorm,
    #[error("value not p-integral")]
    NotIntegral,
    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T> = core::result::Result<T, Error>;
