use log::debug;

use crate::agent::Agent;
use crate::distributed::channel::{Channel, ChannelError};
use crate::distributed::codec::{decode_belief_update, encode_action_message, ActionMessage};
use crate::trace::TraceError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClientExit {
    /// The server closed the channel.
    RemoteClosed { sent: u64 },
    /// `max_messages` were sent; the channel was closed from this side.
    BudgetExhausted { sent: u64 },
}

/// Runs `agent` against a server.
///
/// Sends the opening message, then answers every percept frame with one
/// reasoning cycle. With a budget, at most `max_messages` messages are sent
/// (the opening one included) and the channel is closed when the next
/// percept frame arrives. Frames that are not percept objects are skipped.
pub fn client_loop(
    agent: &mut Agent,
    channel: &mut dyn Channel,
    max_messages: Option<u64>,
) -> Result<ClientExit, ChannelError> {
    let id = agent.id().to_owned();
    let mut sent = 0;
    if max_messages == Some(0) {
        channel.close();
        return Ok(ClientExit::BudgetExhausted { sent });
    }
    match channel.send(&encode_action_message(&ActionMessage::opening(&id))) {
        Ok(()) => sent += 1,
        Err(ChannelError::Closed) => return Ok(ClientExit::RemoteClosed { sent }),
        Err(e) => return Err(e),
    }
    loop {
        let frame = match channel.recv() {
            Ok(f) => f,
            Err(ChannelError::Closed) => return Ok(ClientExit::RemoteClosed { sent }),
            Err(e) => return Err(e),
        };
        let percepts = match decode_belief_update(&frame) {
            Ok(m) => m.percepts,
            Err(e) => {
                debug!("{id}: skipping frame: {e}");
                continue;
            }
        };
        if max_messages.is_some_and(|m| sent >= m) {
            channel.close();
            return Ok(ClientExit::BudgetExhausted { sent });
        }
        let out = agent.next(&percepts);
        for e in &out.errors {
            debug!("{id}: {}", TraceError::from(e).message);
        }
        let msg = ActionMessage::new(&id, vec![out.actions]);
        match channel.send(&encode_action_message(&msg)) {
            Ok(()) => sent += 1,
            Err(ChannelError::Closed) => return Ok(ClientExit::RemoteClosed { sent }),
            Err(e) => return Err(e),
        }
    }
}
