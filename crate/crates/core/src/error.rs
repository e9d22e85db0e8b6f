use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("alternatives of a pair must differ (got {0} twice)")]
    IdenticalAlternatives(usize),

    #[error("alternative {alt} out of range for k = {k}")]
    AlternativeOutOfRange { alt: usize, k: usize },

    #[error("invalid ranking: {0}")]
    InvalidRanking(String),

    #[error("invalid vote distribution: {0}")]
    InvalidDistribution(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("pairs must be the three distinct pairs of exactly three alternatives")]
    DegeneratePairs,

    #[error("{n} variables exceeds the dense-table cap of {max}")]
    TooManyVariables { n: usize, max: usize },

    #[error("invalid truth table: {0}")]
    InvalidTable(String),

    #[error("enumeration needs {required} weighted states, budget is {budget}")]
    BudgetExceeded { required: u128, budget: u64 },

    #[error("operation requires k = {expected}, got k = {k}")]
    UnsupportedK { k: usize, expected: usize },

    #[error("vote distribution has biased pair marginals; the spectral path needs unbiased marginals")]
    AsymmetricDistribution,

    #[error("restriction needs at least two alternatives, got {0}")]
    TooFewAlternatives(usize),

    #[error("constitution is not transitive: ranking {ranking:?} yields a cycle")]
    NotTransitive { ranking: Vec<usize> },

    #[error("pivot witnesses must name distinct voters (both are voter {0})")]
    SameVoter(usize),

    #[error("invalid pivot witness: {0}")]
    InvalidWitness(String),

    #[error("paradox construction failed: {0}")]
    ConstructionFailed(String),

    #[error("block correlation {rho} does not give a positive semidefinite matrix")]
    InvalidCorrelation { rho: f64 },

    #[error("hypothesis failed: P[f{i} = {u}, f{j} = {neg_u}] = {prob} exceeds 1 - epsilon = {limit}")]
    HypothesisFailed {
        i: usize,
        j: usize,
        u: i8,
        neg_u: i8,
        prob: f64,
        limit: f64,
    },

    #[error("at least {min} samples required, got {got}")]
    TooFewSamples { got: u64, min: u64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
