//! Belief-plan agents, environments that schedule them, and a transport
//! for running some of them remotely.
//!
//! An [`Agent`] holds a [`BeliefBase`] and a list of [`Plan`]s. Each
//! reasoning cycle revises the beliefs with incoming percepts, then runs
//! the body of every plan whose head holds. An [`Environment`] owns shared
//! state, hands each agent its percepts, applies the returned actions and
//! records a [`TraceRecord`] per turn.

pub mod agent;
pub mod belief;
pub mod cli;
pub mod distributed;
pub mod environment;
pub mod error;
pub mod plan;
pub mod scenarios;
pub mod trace;
pub mod value;

pub use agent::{Agent, CycleOutcome};
pub use belief::{default_revise, make_belief, Belief, BeliefBase, Percepts, ReviseError};
pub use environment::{
    EnvError, Environment, EnvironmentBuilder, HookError, Participant, Runner, Turn, TurnOutcome,
};
pub use error::AgentError;
pub use plan::{deliberate, Action, Deliberation, Plan, PlanError};
pub use trace::{EnvState, TraceError, TraceErrorKind, TraceRecord};
pub use value::{BeliefValue, ParseError, ValueMap};
