use thiserror::Error;

/// Errors surfaced by the contract library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("action {action} is out of range (m = {m})")]
    ActionOutOfRange { action: usize, m: usize },

    #[error("agent {agent} is out of range (n = {n})")]
    AgentOutOfRange { agent: usize, n: usize },

    #[error("ground set of {m} actions exceeds the enumeration cap of {cap}")]
    GroundTooLarge { m: usize, cap: usize },

    #[error("agent {agent} controls {size} actions, above the enumeration cap of {cap}")]
    AgentTooLarge { agent: usize, size: usize, cap: usize },

    #[error("instance is malformed: {0}")]
    MalformedInstance(String),

    #[error("invalid contract: {0}")]
    InvalidContract(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("no demand oracle is attached and the ground set is too large for brute force")]
    NoDemandOracle,

    #[error("oracle is not of the expected form: {0}")]
    MalformedOracle(String),

    #[error("profile is not subset stable under the given contract")]
    NotSubsetStable,

    #[error("internal invariant violated: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
