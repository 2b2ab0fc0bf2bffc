//! Running some agents on remote clients.
//!
//! The server keeps a [`ShadowAgent`] in its environment for every remote
//! agent. A shadow forwards percepts to its client over a [`Channel`] and
//! answers for it with the latest action request the client sent, which the
//! server stores in an [`ActionRequestRegistry`]. Each inbound message
//! triggers one environment cycle.

pub mod channel;
pub mod client;
pub mod codec;
pub mod registry;
pub mod server;
pub mod shadow;
pub mod ws;

use thiserror::Error;

pub use channel::{Channel, ChannelError, LoopbackChannel, SharedChannel};
pub use client::{client_loop, ClientExit};
pub use codec::{
    decode_action_message, decode_belief_update, encode_action_message, encode_belief_update,
    ActionMessage, BeliefUpdateMessage, DecodeError,
};
pub use registry::{ActionRequestRegistry, SharedRegistry};
pub use server::{ProtocolWarning, ServeEnd, ServeReport, Server};
pub use shadow::{RemoteTurn, ShadowAgent};
pub use ws::WsChannel;

use crate::environment::EnvError;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DistributedError {
    #[error("agent id {0:?} is already registered")]
    DuplicateAgentId(String),
    #[error("no shadow agent registered for {0:?}")]
    UnknownAgent(String),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Env(#[from] EnvError),
}
