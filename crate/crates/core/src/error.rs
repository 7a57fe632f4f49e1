use thiserror::Error;

/// Broad class of a failure, used by front ends to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Bad input: malformed files, out-of-range arguments, invalid graphs.
    Validation,
    /// A numerical routine failed or produced an unusable result.
    Numerical,
    /// A round or sample budget ran out before convergence.
    Budget,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("edge ({i}, {j}) listed with weights {w_ij} and {w_ji}")]
    NonSymmetric { i: usize, j: usize, w_ij: f64, w_ji: f64 },

    #[error("self-loop on node {0}")]
    SelfLoop(usize),

    #[error("edge ({i}, {j}) has non-positive or non-finite weight {w}")]
    NonPositiveWeight { i: usize, j: usize, w: f64 },

    #[error("node {0} has no incident edges")]
    IsolatedNode(usize),

    #[error("edge ({i}, {j}) listed more than once")]
    DuplicateEdge { i: usize, j: usize },

    #[error("node id {id} out of range for {n} nodes")]
    NodeOutOfRange { id: usize, n: usize },

    #[error("graph is disconnected ({components} components)")]
    Disconnected { components: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("wave speed c = {c} outside (0, sqrt(2))")]
    InvalidSpeed { c: f64 },

    #[error("numerical divergence at round {round}: |u_{node}| = {value:e} exceeds guard {guard:e}")]
    NumericalDivergence {
        round: usize,
        node: usize,
        value: f64,
        guard: f64,
    },

    #[error("history of length {len} is too short for spectral analysis (need >= {min})")]
    TooShort { len: usize, min: usize },

    #[error("found {found} spectral peaks, {requested} requested")]
    InsufficientPeaks { requested: usize, found: usize },

    #[error("no spectral bin exceeds the noise floor {floor:e}")]
    NoisyFloor { floor: f64 },

    #[error("node {node} has a near-zero coefficient for peak {peak}")]
    ZeroComponent { node: usize, peak: usize },

    #[error("value {value} outside the domain of {what}")]
    Domain { what: &'static str, value: f64 },

    #[error("graph with {n} nodes exceeds dense limit {limit}")]
    TooLarge { n: usize, limit: usize },

    #[error("eigensolver did not converge for eigenvalue {index}")]
    NotConverged { index: usize },

    #[error("Gram matrix is not positive definite after {attempts} attempts")]
    CholeskyFail { attempts: usize },

    #[error("mixing time undefined for lambda2 = {lambda2} (requires 0 < lambda2 < 1)")]
    MixingTimeUndefined { lambda2: f64 },

    #[error("partition sizes differ: {left} vs {right}")]
    SizeMismatch { left: usize, right: usize },

    #[error("budget of {budget} rounds exceeded without convergence")]
    BudgetExceeded { budget: usize },
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::NumericalDivergence { .. }
            | Error::InsufficientPeaks { .. }
            | Error::NoisyFloor { .. }
            | Error::ZeroComponent { .. }
            | Error::NotConverged { .. }
            | Error::CholeskyFail { .. } => ErrorKind::Numerical,
            Error::BudgetExceeded { .. } => ErrorKind::Budget,
            _ => ErrorKind::Validation,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
