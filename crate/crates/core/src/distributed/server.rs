use std::fmt;

use log::{debug, warn};

use crate::distributed::channel::{ChannelError, SharedChannel};
use crate::distributed::codec::decode_action_message;
use crate::distributed::registry::SharedRegistry;
use crate::distributed::DistributedError;
use crate::environment::{EnvError, Environment, Runner};
use crate::trace::TraceRecord;
use crate::value::BeliefValue;

/// Something wrong with an inbound frame. Never fatal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ProtocolWarning {
    /// Not JSON at all; no cycle runs.
    Unparseable { offset: usize, message: String },
    /// Has `agentId` and `actions` but they do not decode.
    MalformedEnvelope { offset: usize, message: String },
    /// Names an agent with no shadow on this server.
    UnknownAgent(String),
}

impl fmt::Display for ProtocolWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProtocolWarning::Unparseable { offset, message } => {
                write!(f, "unparseable frame at byte {offset}: {message}")
            }
            ProtocolWarning::MalformedEnvelope { offset, message } => {
                write!(f, "malformed action message at byte {offset}: {message}")
            }
            ProtocolWarning::UnknownAgent(id) => write!(f, "action message for unknown agent {id:?}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ServeEnd {
    /// The client closed the channel.
    PeerClosed,
    /// The requested number of cycles ran.
    CycleLimit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ServeReport {
    pub end: ServeEnd,
    pub frames: u64,
    pub cycles: u64,
}

/// Server-side executor: receives frames, updates the registry and drives
/// a message-triggered environment.
pub struct Server {
    env: Environment,
    registry: SharedRegistry,
    channel: SharedChannel,
    frames: u64,
    cycles: u64,
    warnings: Vec<ProtocolWarning>,
}

impl Server {
    /// `env` must use [`Runner::MessageTriggered`]; its shadow agents must
    /// share `registry` and `channel`.
    pub fn new(
        env: Environment,
        registry: SharedRegistry,
        channel: SharedChannel,
    ) -> Result<Self, DistributedError> {
        if env.runner() != Runner::MessageTriggered {
            return Err(EnvError::WrongRunner {
                expected: Runner::MessageTriggered,
            }
            .into());
        }
        Ok(Server {
            env,
            registry,
            channel,
            frames: 0,
            cycles: 0,
            warnings: Vec::new(),
        })
    }

    /// Handles one inbound frame. Returns the records of the cycle it
    /// triggered, or `None` when the frame was not JSON.
    pub fn handle_message(&mut self, frame: &str) -> Result<Option<Vec<TraceRecord>>, EnvError> {
        self.frames += 1;
        let value = match BeliefValue::from_json(frame) {
            Ok(v) => v,
            Err(e) => {
                self.warn(ProtocolWarning::Unparseable {
                    offset: e.offset,
                    message: e.message,
                });
                return Ok(None);
            }
        };
        let has_envelope = value.get("agentId").is_some_and(BeliefValue::is_truthy)
            && value.get("actions").is_some_and(BeliefValue::is_truthy);
        if has_envelope {
            match decode_action_message(frame) {
                Ok(msg) => {
                    if self.registry.lock().store(&msg.agent_id, msg.actions).is_err() {
                        self.warn(ProtocolWarning::UnknownAgent(msg.agent_id));
                    }
                }
                Err(e) => self.warn(ProtocolWarning::MalformedEnvelope {
                    offset: e.offset(),
                    message: e.to_string(),
                }),
            }
        }
        let records = self.env.trigger()?;
        self.cycles += 1;
        debug!("cycle {} produced {} records", self.cycles, records.len());
        Ok(Some(records))
    }

    /// Receives and handles frames until the peer closes the channel or
    /// `max_cycles` cycles have run, then closes the channel. Each cycle's
    /// records go to `on_cycle`.
    pub fn serve(
        &mut self,
        max_cycles: Option<u64>,
        mut on_cycle: impl FnMut(&[TraceRecord]),
    ) -> Result<ServeReport, DistributedError> {
        let end = loop {
            if max_cycles.is_some_and(|m| self.cycles >= m) {
                break ServeEnd::CycleLimit;
            }
            match self.channel.recv() {
                Ok(frame) => {
                    if let Some(records) = self.handle_message(&frame)? {
                        on_cycle(&records);
                    }
                }
                Err(ChannelError::Closed) => break ServeEnd::PeerClosed,
                Err(e) => {
                    self.channel.close();
                    return Err(e.into());
                }
            }
        };
        self.channel.close();
        Ok(ServeReport {
            end,
            frames: self.frames,
            cycles: self.cycles,
        })
    }

    fn warn(&mut self, w: ProtocolWarning) {
        warn!("{w}");
        self.warnings.push(w);
    }

    pub fn warnings(&self) -> &[ProtocolWarning] {
        &self.warnings
    }

    pub fn cycles(&self) -> u64 {
        self.cycles
    }

    pub fn environment(&self) -> &Environment {
        &self.env
    }

    pub fn into_environment(self) -> Environment {
        self.env
    }
}

impl fmt::Debug for Server {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Server")
            .field("env", &self.env)
            .field("frames", &self.frames)
            .field("cycles", &self.cycles)
            .finish()
    }
}
