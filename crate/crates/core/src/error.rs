use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("syntax error at position {position}: {message}")]
    Syntax { position: usize, message: String },

    #[error("polynomial has a nonzero constant term; subtract f(0) first")]
    ConstantTermNonzero,

    #[error("polynomial is identically zero")]
    ZeroPolynomial,

    #[error("variable x{used} exceeds the declared dimension {declared}")]
    DimensionMismatch { declared: usize, used: usize },

    #[error("dimension {n} exceeds the configured cap {cap}")]
    DimensionTooLarge { n: usize, cap: usize },

    #[error("{facets} facets give 2^{facets} subsets, above the enumeration cap {cap}")]
    FacetCountTooLarge { facets: usize, cap: u64 },

    #[error("lattice enumeration needs {points} points, above the cap {cap}")]
    BudgetExceeded { points: u128, cap: u64 },

    #[error("sum needs {estimated} evaluations, above the work budget {budget}")]
    WorkBudgetExceeded { estimated: u128, budget: u64 },

    #[error("only {accepted} hypothesis-satisfying samples, need at least {required}")]
    DegenerateSampling { accepted: usize, required: usize },

    #[error("only {usable} usable primes for the fit, need at least {required}")]
    InsufficientPrimes { usable: usize, required: usize },

    #[error("face restriction is degenerate modulo {prime}")]
    DegenerateAtPrime { prime: u64 },

    #[error("hypothesis unmet: {0}")]
    HypothesisUnmet(String),

    #[error("arithmetic overflow: {0}")]
    Overflow(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}
