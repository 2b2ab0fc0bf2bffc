//! Trace records emitted once per agent turn.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::belief::Percepts;
use crate::error::AgentError;
use crate::plan::Action;
use crate::value::ValueMap;

/// Environment state: same value domain as beliefs.
pub type EnvState = ValueMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TraceErrorKind {
    InvalidBeliefKey,
    InvalidAgentId,
    PlanHeadError,
    PlanBodyError,
    ReviseError,
    ChannelClosed,
    TransportError,
    StaleActions,
}

/// Error descriptor attached to a trace record.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TraceError {
    pub kind: TraceErrorKind,
    pub message: String,
}

impl TraceError {
    pub fn new(kind: TraceErrorKind, message: impl Into<String>) -> Self {
        TraceError {
            kind,
            message: message.into(),
        }
    }
}

impl From<&AgentError> for TraceError {
    fn from(e: &AgentError) -> Self {
        let kind = match e {
            AgentError::InvalidBeliefKey(_) => TraceErrorKind::InvalidBeliefKey,
            AgentError::InvalidAgentId(_) => TraceErrorKind::InvalidAgentId,
            AgentError::PlanHead { .. } => TraceErrorKind::PlanHeadError,
            AgentError::PlanBody { .. } => TraceErrorKind::PlanBodyError,
            AgentError::Revise(_) => TraceErrorKind::ReviseError,
        };
        TraceError::new(kind, e.to_string())
    }
}

/// One agent turn: what it perceived, what it did, and the state after the
/// environment applied its actions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TraceRecord {
    pub step: u64,
    pub agent_id: String,
    pub percepts: Percepts,
    pub actions: Vec<Action>,
    pub post_state: EnvState,
    pub errors: Vec<TraceError>,
}

impl TraceRecord {
    /// One canonical JSON line, without the trailing newline.
    pub fn to_json_line(&self) -> String {
        crate::value::canonical_string(self)
    }
}

/// Writes records as JSON Lines.
pub fn write_jsonl<W: Write>(out: &mut W, records: &[TraceRecord]) -> io::Result<()> {
    for r in records {
        writeln!(out, "{}", r.to_json_line())?;
    }
    Ok(())
}
