use thiserror::Error;

/// Failures inside a single agent's reasoning cycle.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AgentError {
    #[error("invalid belief key {0:?}")]
    InvalidBeliefKey(String),
    #[error("invalid agent id {0:?}")]
    InvalidAgentId(String),
    #[error("plan {index} head failed: {message}")]
    PlanHead { index: usize, message: String },
    #[error("plan {index} body failed: {message}")]
    PlanBody { index: usize, message: String },
    #[error("belief revision failed: {0}")]
    Revise(String),
}
