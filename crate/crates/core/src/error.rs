use thiserror::Error;

/// Conditions under which a witness cannot be built from the supplied
/// spectral data.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WitnessCondition {
    /// The negative subspace is trivial, so nothing would be detected.
    NonTrivialNegative,
    /// A vector of Schmidt rank at most `k` lies in `V0 + V-` but not in `V0`.
    NoSeparableInNegative,
    /// The negative subspace is not contained in the product subspace
    /// orthogonal to every separable kernel vector's local supports.
    NegativeInsideProductSubspace,
}

impl std::fmt::Display for WitnessCondition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            WitnessCondition::NonTrivialNegative => write!(f, "condition (i): negative subspace is {{0}}"),
            WitnessCondition::NoSeparableInNegative => write!(
                f,
                "condition (ii): a vector of Schmidt rank <= k lies in V0+V- outside V0"
            ),
            WitnessCondition::NegativeInsideProductSubspace => {
                write!(f, "condition (iii): V- is not contained in V-hat")
            }
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimensions d1={d1}, d2={d2}: require 1 <= d1 <= d2")]
    InvalidDims { d1: usize, d2: usize },

    #[error("shape mismatch: expected {expected}, got {got}")]
    Shape { expected: String, got: String },

    #[error("zero vector has no Schmidt decomposition")]
    ZeroVector,

    #[error("matrix is not Hermitian (deviation {0:e})")]
    NotHermitian(f64),

    #[error("not a density matrix: {0}")]
    NotDensity(String),

    #[error("basis is not orthonormal (deviation {0:e})")]
    NotOrthonormal(f64),

    #[error("k = {k} out of range for d1 = {d1}")]
    KOutOfRange { k: usize, d1: usize },

    #[error("S_k is the whole space (k = {k} >= d1 = {d1})")]
    WholeSpace { k: usize, d1: usize },

    #[error("vector has Schmidt rank {rank} > k = {k}")]
    RankTooLarge { rank: usize, k: usize },

    #[error("subspace is empty")]
    EmptySubspace,

    #[error("oracle limited to dim <= 3 (got {0})")]
    OracleTooLarge(usize),

    #[error("grid resolution must be at least 16 (got {0})")]
    GridTooCoarse(usize),

    #[error("not on the variety's regular locus: point has rank {rank}, expected {k}")]
    NotRegular { rank: usize, k: usize },

    #[error("epsilon must lie in (0, 1), got {0}")]
    EpsilonOutOfRange(f64),

    #[error("positive subspace is empty; eigenvalue fractions undefined")]
    EmptyPositive,

    #[error("negative subspace is empty; eigenvalue fractions undefined")]
    EmptyNegative,

    #[error("witness hypothesis violated: {0}")]
    Hypothesis(WitnessCondition),

    #[error("invalid spectral data: {0}")]
    InvalidSplit(String),

    #[error("no witness found: certification failed for every lambda up to 2^64")]
    NoWitnessFound,

    #[error("signature undefined for dependent Kraus operators")]
    DependentKraus,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
