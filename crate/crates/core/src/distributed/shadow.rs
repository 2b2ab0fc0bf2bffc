use std::fmt;

use crate::belief::{default_revise, BeliefBase, Percepts};
use crate::distributed::channel::{ChannelError, SharedChannel};
use crate::distributed::codec::{encode_belief_update, BeliefUpdateMessage};
use crate::distributed::registry::SharedRegistry;
use crate::distributed::DistributedError;
use crate::environment::{Participant, Turn, TurnOutcome};
use crate::trace::{TraceError, TraceErrorKind};

/// When a shadow agent answers for its remote peer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RemoteTurn {
    /// Send the percepts, then answer at once with whatever the registry
    /// holds. The answer is the peer's reply to the previous percepts.
    Immediate,
    /// Send the percepts and leave the turn pending; the next inbound
    /// message resumes the environment and the turn completes with the
    /// registry contents at that point, i.e. the peer's reply to exactly
    /// these percepts.
    #[default]
    Lockstep,
}

/// Server-side stand-in for an agent that runs on a remote client.
///
/// It has no plans. Each turn forwards the percepts to the client and
/// returns the client's most recent action request, flattened across
/// batches; before the first request it returns no actions.
pub struct ShadowAgent {
    id: String,
    beliefs: BeliefBase,
    channel: SharedChannel,
    registry: SharedRegistry,
    mode: RemoteTurn,
    consumed_revision: u64,
    disconnected: bool,
}

impl ShadowAgent {
    /// Registers `id` in the registry.
    pub fn new(
        id: impl Into<String>,
        initial_beliefs: BeliefBase,
        channel: SharedChannel,
        registry: SharedRegistry,
    ) -> Result<Self, DistributedError> {
        let id = id.into();
        registry.lock().register(&id)?;
        Ok(ShadowAgent {
            id,
            beliefs: initial_beliefs,
            channel,
            registry,
            mode: RemoteTurn::default(),
            consumed_revision: 0,
            disconnected: false,
        })
    }

    pub fn with_mode(mut self, mode: RemoteTurn) -> Self {
        self.mode = mode;
        self
    }

    pub fn mode(&self) -> RemoteTurn {
        self.mode
    }

    fn collect(&mut self) -> TurnOutcome {
        let registry = self.registry.lock();
        let revision = registry.revision(&self.id);
        let actions = registry
            .latest(&self.id)
            .map(|batches| batches.iter().flatten().cloned().collect())
            .unwrap_or_default();
        drop(registry);
        let mut errors = Vec::new();
        if revision > 0 && revision == self.consumed_revision {
            errors.push(TraceError::new(
                TraceErrorKind::StaleActions,
                format!("no new action request from {:?}; repeating the last one", self.id),
            ));
        }
        self.consumed_revision = revision;
        TurnOutcome { actions, errors }
    }
}

impl Participant for ShadowAgent {
    fn id(&self) -> &str {
        &self.id
    }

    fn beliefs(&self) -> &BeliefBase {
        &self.beliefs
    }

    fn begin_turn(&mut self, percepts: &Percepts) -> Turn {
        self.beliefs = default_revise(&self.beliefs, percepts);
        let frame = encode_belief_update(&BeliefUpdateMessage {
            percepts: percepts.clone(),
        });
        match self.channel.send(&frame) {
            Ok(()) => match self.mode {
                RemoteTurn::Immediate => Turn::Complete(self.collect()),
                RemoteTurn::Lockstep => Turn::Awaiting,
            },
            Err(e) => {
                let kind = match e {
                    ChannelError::Closed => {
                        self.disconnected = true;
                        TraceErrorKind::ChannelClosed
                    }
                    _ => TraceErrorKind::TransportError,
                };
                let mut outcome = self.collect();
                outcome
                    .errors
                    .insert(0, TraceError::new(kind, format!("sending percepts to {:?}: {e}", self.id)));
                Turn::Complete(outcome)
            }
        }
    }

    fn finish_turn(&mut self) -> TurnOutcome {
        self.collect()
    }

    fn awaits_remote(&self) -> bool {
        self.mode == RemoteTurn::Lockstep && !self.disconnected
    }
}

impl fmt::Debug for ShadowAgent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ShadowAgent")
            .field("id", &self.id)
            .field("mode", &self.mode)
            .finish()
    }
}
