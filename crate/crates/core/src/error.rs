use thiserror::Error;

/// Errors produced by the analysis, bound and simulation routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid topology descriptor: {0}")]
    InvalidDescriptor(String),

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("cannot build partite decomposition: {0}")]
    Decomposition(String),

    #[error("component {component} is not independent: edge ({a}, {b}) lies inside it")]
    NotIndependent { component: usize, a: usize, b: usize },

    #[error("node {node} lies in no clique of size {k} meeting every component")]
    CliqueCondition { node: usize, k: usize },

    #[error("{what} exceeds its cap: at least {estimate} against a cap of {cap}")]
    Resource {
        what: &'static str,
        estimate: usize,
        cap: usize,
    },

    #[error("numeric range error: {0}")]
    NumericRange(String),

    #[error("solver failure: {0}")]
    Solver(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("infeasible load: clique load {rho_clique} >= 1")]
    InfeasibleLoad { rho_clique: f64 },

    #[error("cannot invert {function} at {argument}: {reason}")]
    NumericInverse {
        function: &'static str,
        argument: f64,
        reason: String,
    },

    #[error("rate-function contract violated: {0}")]
    Contract(String),

    #[error("wrong topology: {0}")]
    WrongTopology(String),

    #[error("load {rho} is below the required threshold {required}")]
    Precondition { rho: f64, required: f64 },

    #[error("structural assumption violated by state {witness} (H = {h})")]
    AssumptionViolated { witness: String, h: f64 },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("unavailable: {0}")]
    Unavailable(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
