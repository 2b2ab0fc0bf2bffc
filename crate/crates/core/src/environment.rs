//! Environments: agent registry, shared state, scheduling and tracing.
//!
//! Two runners are provided. The synchronous runner executes one full
//! round-robin pass per [`Environment::step`]. The message-triggered runner
//! executes one cycle per [`Environment::trigger`], which the distributed
//! server calls once per inbound message.
//!
//! State updates are applied immediately after each agent's turn, so a
//! later agent in the same round sees the effects of earlier ones. Batch
//! semantics are a user-level concern: keep a "previous" and a "next"
//! buffer in the state and expose only the previous one through the state
//! filter (see the Game of Life scenario).

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::agent::Agent;
use crate::belief::{BeliefBase, Belief, Percepts};
use crate::plan::Action;
use crate::trace::{EnvState, TraceError, TraceRecord};

/// Outcome of one participant turn as seen by the environment.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TurnOutcome {
    pub actions: Vec<Action>,
    pub errors: Vec<TraceError>,
}

/// A turn either completes immediately or waits for a remote answer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Turn {
    Complete(TurnOutcome),
    Awaiting,
}

/// Anything an environment can schedule: local agents and remote stand-ins.
pub trait Participant: Send {
    fn id(&self) -> &str;

    fn beliefs(&self) -> &BeliefBase;

    /// Starts a turn with the given percepts.
    fn begin_turn(&mut self, percepts: &Percepts) -> Turn;

    /// Completes a turn that returned [`Turn::Awaiting`].
    fn finish_turn(&mut self) -> TurnOutcome {
        TurnOutcome::default()
    }

    /// True when the next turn will wait on a remote peer. The
    /// message-triggered runner uses this to hand percepts to the peer at
    /// the end of a cycle rather than at the start of the next one.
    fn awaits_remote(&self) -> bool {
        false
    }
}

impl Participant for Agent {
    fn id(&self) -> &str {
        Agent::id(self)
    }

    fn beliefs(&self) -> &BeliefBase {
        Agent::beliefs(self)
    }

    fn begin_turn(&mut self, percepts: &Percepts) -> Turn {
        let out = self.next(percepts);
        Turn::Complete(TurnOutcome {
            actions: out.actions,
            errors: out.errors.iter().map(TraceError::from).collect(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Runner {
    #[default]
    Synchronous,
    MessageTriggered,
}

impl fmt::Display for Runner {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Runner::Synchronous => f.write_str("synchronous"),
            Runner::MessageTriggered => f.write_str("message-triggered"),
        }
    }
}

/// A state-update hook rejected an action batch.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{0}")]
pub struct HookError(pub String);

impl HookError {
    pub fn new(msg: impl Into<String>) -> Self {
        HookError(msg.into())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EnvError {
    #[error("duplicate agent id {0:?}")]
    DuplicateAgentId(String),
    #[error("state update failed at step {step} for agent {agent_id:?}: {message}")]
    Update {
        step: u64,
        agent_id: String,
        message: String,
    },
    #[error("step count must be positive")]
    ZeroSteps,
    #[error("operation requires the {expected} runner")]
    WrongRunner { expected: Runner },
}

pub type UpdateFn =
    Box<dyn FnMut(&[Action], &str, &EnvState) -> Result<EnvState, HookError> + Send>;
pub type FilterFn = Box<dyn Fn(&EnvState, &str) -> Percepts + Send>;
pub type RenderFn = Box<dyn FnMut(&TraceRecord) + Send>;

/// Exposes the whole state as percepts. Entries whose key is not a valid
/// belief key are skipped.
pub fn identity_state_filter(state: &EnvState, _agent_id: &str) -> Percepts {
    state
        .iter()
        .filter_map(|(k, v)| Belief::new(k.clone(), v.clone(), None).ok())
        .collect()
}

pub struct EnvironmentBuilder {
    agents: Vec<Box<dyn Participant>>,
    state: EnvState,
    update: UpdateFn,
    filter: FilterFn,
    render: RenderFn,
    runner: Runner,
}

impl EnvironmentBuilder {
    pub fn update_state<F>(mut self, f: F) -> Self
    where
        F: FnMut(&[Action], &str, &EnvState) -> Result<EnvState, HookError> + Send + 'static,
    {
        self.update = Box::new(f);
        self
    }

    pub fn state_filter<F>(mut self, f: F) -> Self
    where
        F: Fn(&EnvState, &str) -> Percepts + Send + 'static,
    {
        self.filter = Box::new(f);
        self
    }

    pub fn render<F>(mut self, f: F) -> Self
    where
        F: FnMut(&TraceRecord) + Send + 'static,
    {
        self.render = Box::new(f);
        self
    }

    pub fn runner(mut self, runner: Runner) -> Self {
        self.runner = runner;
        self
    }

    pub fn build(self) -> Result<Environment, EnvError> {
        let mut seen = BTreeSet::new();
        for a in &self.agents {
            if !seen.insert(a.id().to_owned()) {
                return Err(EnvError::DuplicateAgentId(a.id().to_owned()));
            }
        }
        Ok(Environment {
            agents: self.agents,
            state: self.state,
            update: self.update,
            filter: self.filter,
            render: self.render,
            runner: self.runner,
            step: 0,
            cursor: 0,
            suspended: None,
        })
    }
}

/// Hosts participants and owns the shared state.
pub struct Environment {
    agents: Vec<Box<dyn Participant>>,
    state: EnvState,
    update: UpdateFn,
    filter: FilterFn,
    render: RenderFn,
    runner: Runner,
    step: u64,
    // message-triggered runner only: next position in the round, and the
    // percepts handed to that position if its turn is pending
    cursor: usize,
    suspended: Option<Percepts>,
}

impl Environment {
    /// Starts a builder. Hooks default to: state unchanged on update,
    /// identity state filter, no-op render, synchronous runner.
    pub fn builder(agents: Vec<Box<dyn Participant>>, state: EnvState) -> EnvironmentBuilder {
        EnvironmentBuilder {
            agents,
            state,
            update: Box::new(|_, _, s| Ok(s.clone())),
            filter: Box::new(identity_state_filter),
            render: Box::new(|_| {}),
            runner: Runner::Synchronous,
        }
    }

    pub fn state(&self) -> &EnvState {
        &self.state
    }

    pub fn runner(&self) -> Runner {
        self.runner
    }

    /// Index of the round the next turn belongs to.
    pub fn current_step(&self) -> u64 {
        self.step
    }

    pub fn participants(&self) -> impl Iterator<Item = &dyn Participant> {
        self.agents.iter().map(|a| a.as_ref())
    }

    pub fn participant(&self, id: &str) -> Option<&dyn Participant> {
        self.participants().find(|a| a.id() == id)
    }

    /// True while a remote participant's turn is pending.
    pub fn is_suspended(&self) -> bool {
        self.suspended.is_some()
    }

    /// One round-robin pass over all participants in registration order.
    pub fn step(&mut self) -> Result<Vec<TraceRecord>, EnvError> {
        if self.runner != Runner::Synchronous {
            return Err(EnvError::WrongRunner {
                expected: Runner::Synchronous,
            });
        }
        let mut records = Vec::with_capacity(self.agents.len());
        for index in 0..self.agents.len() {
            let percepts = (self.filter)(&self.state, self.agents[index].id());
            let outcome = match self.agents[index].begin_turn(&percepts) {
                Turn::Complete(outcome) => outcome,
                Turn::Awaiting => self.agents[index].finish_turn(),
            };
            records.push(self.apply(index, percepts, outcome)?);
        }
        self.step += 1;
        Ok(records)
    }

    /// Runs [`Environment::step`] `steps` times.
    pub fn run(&mut self, steps: usize) -> Result<Vec<TraceRecord>, EnvError> {
        if steps == 0 {
            return Err(EnvError::ZeroSteps);
        }
        let mut records = Vec::with_capacity(steps * self.agents.len());
        for _ in 0..steps {
            records.extend(self.step()?);
        }
        Ok(records)
    }

    /// One message-triggered cycle.
    ///
    /// A pending remote turn is completed first. Then participants take
    /// turns in round-robin order until as many turns as there are
    /// participants have completed, or a remote participant starts a turn
    /// that must wait for its peer. With no remote participants this is
    /// exactly one round.
    pub fn trigger(&mut self) -> Result<Vec<TraceRecord>, EnvError> {
        if self.runner != Runner::MessageTriggered {
            return Err(EnvError::WrongRunner {
                expected: Runner::MessageTriggered,
            });
        }
        let n = self.agents.len();
        let mut records = Vec::new();
        if n == 0 {
            return Ok(records);
        }
        let mut turns = 0;
        if let Some(percepts) = self.suspended.take() {
            let outcome = self.agents[self.cursor].finish_turn();
            records.push(self.apply(self.cursor, percepts, outcome)?);
            self.advance();
            turns += 1;
        }
        loop {
            let index = self.cursor;
            if turns >= n && (!self.agents[index].awaits_remote() || turns >= 2 * n) {
                break;
            }
            let percepts = (self.filter)(&self.state, self.agents[index].id());
            match self.agents[index].begin_turn(&percepts) {
                Turn::Complete(outcome) => {
                    records.push(self.apply(index, percepts, outcome)?);
                    self.advance();
                    turns += 1;
                }
                Turn::Awaiting => {
                    self.suspended = Some(percepts);
                    break;
                }
            }
        }
        Ok(records)
    }

    fn advance(&mut self) {
        self.cursor += 1;
        if self.cursor == self.agents.len() {
            self.cursor = 0;
            self.step += 1;
        }
    }

    fn apply(
        &mut self,
        index: usize,
        percepts: Percepts,
        outcome: TurnOutcome,
    ) -> Result<TraceRecord, EnvError> {
        let agent_id = self.agents[index].id().to_owned();
        let next = (self.update)(&outcome.actions, &agent_id, &self.state).map_err(|e| {
            EnvError::Update {
                step: self.step,
                agent_id: agent_id.clone(),
                message: e.0,
            }
        })?;
        self.state = next;
        let record = TraceRecord {
            step: self.step,
            agent_id,
            percepts,
            actions: outcome.actions,
            post_state: self.state.clone(),
            errors: outcome.errors,
        };
        (self.render)(&record);
        Ok(record)
    }
}

impl fmt::Debug for Environment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Environment")
            .field("agents", &self.agents.iter().map(|a| a.id()).collect::<Vec<_>>())
            .field("state", &self.state)
            .field("runner", &self.runner)
            .field("step", &self.step)
            .finish()
    }
}
