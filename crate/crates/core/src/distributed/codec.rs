//! Wire messages between shadow agents and remote clients.
//!
//! Both directions carry canonical JSON text, one message per frame:
//!
//! * client → server: `{"actions":[[...],...],"agentId":"<id>"}`
//! * server → client: the percepts as a bare JSON object, no envelope.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::belief::{BeliefBase, Percepts};
use crate::plan::Action;
use crate::value::{canonical_string, BeliefValue, ParseError};

/// Actions a remote agent requests, grouped into batches (one batch per
/// reasoning cycle on the client).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActionMessage {
    #[serde(rename = "agentId")]
    pub agent_id: String,
    pub actions: Vec<Vec<Action>>,
}

impl ActionMessage {
    pub fn new(agent_id: impl Into<String>, actions: Vec<Vec<Action>>) -> Self {
        ActionMessage {
            agent_id: agent_id.into(),
            actions,
        }
    }

    /// The opening message a client sends to start the environment loop:
    /// a single empty batch.
    pub fn opening(agent_id: impl Into<String>) -> Self {
        ActionMessage::new(agent_id, vec![Vec::new()])
    }

    /// All batches concatenated.
    pub fn flattened(&self) -> Vec<Action> {
        self.actions.iter().flatten().cloned().collect()
    }
}

/// Percepts sent from the server to a remote client.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BeliefUpdateMessage {
    pub percepts: Percepts,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecodeError {
    #[error("malformed message at byte {offset}: {message}")]
    Malformed { offset: usize, message: String },
    #[error("agentId must be non-empty")]
    EmptyAgentId,
    #[error("belief update must be a JSON object")]
    NotAnObject,
}

impl DecodeError {
    /// Byte offset of the failure; 0 for structural errors found after
    /// parsing.
    pub fn offset(&self) -> usize {
        match self {
            DecodeError::Malformed { offset, .. } => *offset,
            _ => 0,
        }
    }
}

impl From<ParseError> for DecodeError {
    fn from(e: ParseError) -> Self {
        DecodeError::Malformed {
            offset: e.offset,
            message: e.message,
        }
    }
}

pub fn encode_action_message(msg: &ActionMessage) -> String {
    canonical_string(msg)
}

pub fn decode_action_message(text: &str) -> Result<ActionMessage, DecodeError> {
    let msg: ActionMessage =
        serde_json::from_str(text).map_err(|e| DecodeError::from(ParseError::from_serde(text, &e)))?;
    if msg.agent_id.is_empty() {
        return Err(DecodeError::EmptyAgentId);
    }
    Ok(msg)
}

pub fn encode_belief_update(msg: &BeliefUpdateMessage) -> String {
    msg.percepts.to_canonical_json()
}

/// Decodes a percept frame. Anything that is valid JSON but not an object
/// yields [`DecodeError::NotAnObject`].
pub fn decode_belief_update(text: &str) -> Result<BeliefUpdateMessage, DecodeError> {
    let value = BeliefValue::from_json(text)?;
    if value.as_map().is_none() {
        return Err(DecodeError::NotAnObject);
    }
    let percepts = BeliefBase::from_canonical_json(text)?;
    Ok(BeliefUpdateMessage { percepts })
}
