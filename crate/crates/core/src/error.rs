use thiserror::Error;

/// Errors raised by lattice, complexity, and branch-analysis operations.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("lattice of {n_sites} sites is outside 1..={max}")]
    LatticeSize { n_sites: usize, max: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("state is not normalized (norm {norm})")]
    NotNormalized { norm: f64 },

    #[error("non-finite amplitude at index {index}")]
    NonFinite { index: usize },

    #[error("site {site} out of range for a {n_sites}-site chain")]
    SiteOutOfRange { site: usize, n_sites: usize },

    #[error("sites {a} and {b} are not nearest neighbours")]
    NotAdjacent { a: usize, b: usize },

    #[error("unknown gate `{0}`")]
    UnknownGate(String),

    #[error("gate `{gate}` expects {expected} site(s), got {found}")]
    GateArity {
        gate: String,
        expected: usize,
        found: usize,
    },

    #[error("invalid gate set: {0}")]
    InvalidGateSet(String),

    #[error("observable is not Hermitian (deviation {deviation})")]
    NotHermitian { deviation: f64 },

    #[error("invalid observable: {0}")]
    InvalidObservable(String),

    #[error("projectors are not orthogonal on the parent state (overlap {overlap})")]
    ProjectorsNotOrthogonal { overlap: f64 },

    #[error("decomposition does not reconstruct its parent (residual {residual})")]
    ReconstructionResidual { residual: f64 },

    #[error("components {i} and {j} are not orthogonal (overlap {overlap})")]
    ComponentsNotOrthogonal { i: usize, j: usize, overlap: f64 },

    #[error("states are not orthogonal (overlap {overlap})")]
    StatesNotOrthogonal { overlap: f64 },

    #[error("parameter `{name}` = {value} is outside {range}")]
    Parameter {
        name: &'static str,
        value: f64,
        range: &'static str,
    },

    #[error("decomposition needs at least {needed} components, has {found}")]
    TooFewComponents { needed: usize, found: usize },

    #[error("candidate family is empty")]
    EmptyFamily,

    #[error("cache I/O failure: {0}")]
    Cache(String),

    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
