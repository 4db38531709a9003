use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

/// Domain errors. [`Error::kind`] gives the stable machine-readable name.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("{table} row {row} sums to {sum}, expected 1")]
    NonStochasticRow { table: &'static str, row: usize, sum: f64 },
    #[error("ref_policy[{context}][{arm}] = {value} is not strictly positive")]
    ZeroSupportReference { context: usize, arm: usize, value: f64 },
    #[error("reward[{context}][{arm}] = {value} outside {range}")]
    RewardOutOfRange { context: usize, arm: usize, value: f64, range: &'static str },
    #[error("eta = {0} must be finite and positive")]
    BadEta(f64),
    #[error("context distribution invalid: {0}")]
    BadContextDistribution(String),
    #[error("noise model invalid: {0}")]
    BadNoise(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("{what} index {index} out of range (< {bound})")]
    IndexOutOfRange { what: &'static str, index: usize, bound: usize },
    #[error("confidence delta = {0} must lie in (0, 1)")]
    BadDelta(f64),
    #[error("sample size must be at least 1")]
    BadSampleSize,
    #[error("record {record} has context {context}; single-context dataset required")]
    MultiContextDataset { record: usize, context: usize },
    #[error("policy puts mass {mass} on ({context}, {arm}) outside reference support")]
    SupportViolation { context: usize, arm: usize, mass: f64 },
    #[error("code book too small: found {found} words, need {needed}")]
    CodeTooSmall { found: usize, needed: usize },
    #[error("code book invariant violated: {0}")]
    InvalidCode(String),
    #[error("delta = {delta} exceeds {limit}")]
    DeltaTooLarge { delta: f64, limit: f64 },
    #[error("{what}: {requested} exceeds cap {cap}")]
    BudgetExceeded { what: &'static str, requested: u128, cap: u128 },
    #[error("K = {k} must satisfy 1 <= K <= A - 1 = {max}")]
    BadK { k: usize, max: usize },
    #[error("C = {c} must satisfy {lower} < C <= {upper}")]
    BadC { c: f64, lower: f64, upper: f64 },
    #[error("family parameters invalid: {0}")]
    BadFamilySpec(String),
    #[error("member {member} has concentrability {value} above budget {budget}")]
    CoverageBudgetExceeded { member: usize, value: f64, budget: f64 },
    #[error("mean suboptimality {mean} at n = {n} is not positive")]
    NonPositiveMean { n: f64, mean: f64 },
    #[error("rate fit needs at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("grid invalid: {0}")]
    BadGrid(String),
}

impl Error {
    pub fn kind(&self) -> &'static str {
        match self {
            Error::NonStochasticRow { .. } => "NonStochasticRow",
            Error::ZeroSupportReference { .. } => "ZeroSupportReference",
            Error::RewardOutOfRange { .. } => "RewardOutOfRange",
            Error::BadEta(_) => "BadEta",
            Error::BadContextDistribution(_) => "BadContextDistribution",
            Error::BadNoise(_) => "BadNoise",
            Error::ShapeMismatch(_) => "ShapeMismatch",
            Error::IndexOutOfRange { .. } => "IndexOutOfRange",
            Error::BadDelta(_) => "BadDelta",
            Error::BadSampleSize => "BadSampleSize",
            Error::MultiContextDataset { .. } => "MultiContextDataset",
            Error::SupportViolation { .. } => "SupportViolation",
            Error::CodeTooSmall { .. } => "CodeTooSmall",
            Error::InvalidCode(_) => "InvalidCode",
            Error::DeltaTooLarge { .. } => "DeltaTooLarge",
            Error::BudgetExceeded { .. } => "BudgetExceeded",
            Error::BadK { .. } => "BadK",
            Error::BadC { .. } => "BadC",
            Error::BadFamilySpec(_) => "BadFamilySpec",
            Error::CoverageBudgetExceeded { .. } => "CoverageBudgetExceeded",
            Error::NonPositiveMean { .. } => "NonPositiveMean",
            Error::TooFewPoints { .. } => "TooFewPoints",
            Error::BadGrid(_) => "BadGrid",
        }
    }
}
