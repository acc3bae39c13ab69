use std::path::PathBuf;

use crate::simplex::LpStatus;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid degree L={degree}: must satisfy 1 <= L <= H={num_relays}")]
    InvalidDegree { degree: usize, num_relays: usize },

    #[error("user {user} out of range: topology has {num_users} users")]
    InvalidUser { user: usize, num_users: usize },

    #[error("invalid topology field `{field}`: {message}")]
    Validation { field: String, message: String },

    #[error("failed to parse {path}: {source}")]
    Parse {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("unsupported memory: t = K*M/N = {numerator}/{denominator} is not an integer")]
    UnsupportedMemory { numerator: u64, denominator: u64 },

    #[error("invalid placement: {0}")]
    InvalidPlacement(String),

    #[error("demand {demand} of user {user} out of range [1, {num_files}]")]
    InvalidDemand {
        user: usize,
        demand: usize,
        num_files: usize,
    },

    #[error("invalid capacity `{name}` = {value}: must be positive and finite")]
    InvalidCapacity { name: &'static str, value: f64 },

    #[error("infeasible by construction: user {user} in group {group:?} has no relay")]
    Unreachable { user: usize, group: Vec<usize> },

    #[error("malformed linear program: {0}")]
    MalformedProblem(String),

    #[error("simplex exceeded {0} pivots")]
    SolverStalled(usize),

    #[error("no allocation: solver returned {0:?}")]
    NoAllocation(LpStatus),

    #[error("unsupported topology: {0}")]
    UnsupportedTopology(String),

    #[error("invalid group count G={groups}: must satisfy 1 <= G <= {messages}")]
    InvalidGroupCount { groups: usize, messages: usize },

    #[error("dynamic step {step} failed: {source}")]
    DynamicStep {
        step: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("allocation infeasible: {0} coverage/box violations")]
    InfeasibleAllocation(usize),

    #[error("invalid experiment: {0}")]
    InvalidExperiment(String),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}
