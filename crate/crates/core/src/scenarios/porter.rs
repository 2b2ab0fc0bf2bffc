//! A porter that locks and unlocks a door on request, alone or with a
//! paranoid and a claustrophobic neighbour.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::agent::Agent;
use crate::belief::{BeliefBase, Percepts, ReviseError};
use crate::distributed::{RemoteTurn, ShadowAgent, SharedChannel, SharedRegistry};
use crate::environment::{EnvError, Environment, HookError, Participant, Runner};
use crate::plan::{Action, Plan, PlanError};
use crate::trace::EnvState;
use crate::value::{BeliefValue, ValueMap};

pub const LOCK: &str = "lock";
pub const UNLOCK: &str = "unlock";

pub const PORTER: &str = "porter";
pub const PARANOID: &str = "paranoid";
pub const CLAUSTROPHOBE: &str = "claustrophobe";

pub fn door(locked: bool) -> BeliefValue {
    BeliefValue::map([("locked", locked)])
}

fn tokens(items: &[&str]) -> BeliefValue {
    BeliefValue::list(items.iter().copied())
}

/// `door.locked` of a state or belief map.
pub fn door_locked(values: &ValueMap) -> Option<bool> {
    values.get("door")?.get("locked")?.as_bool()
}

fn beliefs_door_locked(beliefs: &BeliefBase) -> Result<bool, PlanError> {
    beliefs
        .value("door")
        .and_then(|d| d.get("locked"))
        .and_then(BeliefValue::as_bool)
        .ok_or_else(|| PlanError::missing("door.locked"))
}

fn beliefs_requests(beliefs: &BeliefBase) -> Result<&[BeliefValue], PlanError> {
    beliefs
        .value("requests")
        .and_then(BeliefValue::as_list)
        .ok_or_else(|| PlanError::missing("requests"))
}

fn requested(beliefs: &BeliefBase, token: &str) -> Result<bool, PlanError> {
    Ok(beliefs_requests(beliefs)?.iter().any(|r| r.as_str() == Some(token)))
}

/// Lock an unlocked door when asked to; unlock a locked door when asked to.
pub fn porter_plans() -> Vec<Plan> {
    vec![
        Plan::new(
            |b| Ok(!beliefs_door_locked(b)? && requested(b, LOCK)?),
            |_| Ok(vec![Action::token(LOCK)]),
        ),
        Plan::new(
            |b| Ok(beliefs_door_locked(b)? && requested(b, UNLOCK)?),
            |_| Ok(vec![Action::token(UNLOCK)]),
        ),
    ]
}

/// Takes the door from the percepts, drops every request matching an
/// executed action, and queues the incoming requests.
///
/// All occurrences of an executed token are dropped, not just one.
pub fn porter_revise(beliefs: &BeliefBase, percepts: &Percepts) -> Result<BeliefBase, ReviseError> {
    let percept_list = |key: &str| {
        percepts
            .value(key)
            .and_then(BeliefValue::as_list)
            .ok_or_else(|| ReviseError::new(format!("percepts lack a {key} list")))
    };
    let door = percepts
        .value("door")
        .ok_or_else(|| ReviseError::new("percepts lack door"))?
        .clone();
    let executions = percept_list("executions")?;
    let incoming = percept_list("requests")?;
    let pending = beliefs
        .value("requests")
        .and_then(BeliefValue::as_list)
        .ok_or_else(|| ReviseError::new("beliefs lack a requests list"))?;
    let requests = pending
        .iter()
        .filter(|r| !executions.contains(r))
        .chain(incoming)
        .cloned();
    let mut out = beliefs.clone();
    let set = |out: &mut BeliefBase, k: &str, v: BeliefValue| {
        out.set(k, v).map_err(|e| ReviseError::new(e.to_string()))
    };
    set(&mut out, "door", door)?;
    set(&mut out, "requests", BeliefValue::list(requests))?;
    Ok(out)
}

pub fn porter_beliefs() -> BeliefBase {
    BeliefBase::new()
        .with("door", door(true))
        .and_then(|b| b.with("requests", BeliefValue::empty_list()))
        .expect("static keys are valid")
}

pub fn porter_agent() -> Agent {
    Agent::new(PORTER, porter_beliefs(), porter_plans())
        .expect("static id is valid")
        .with_revision(porter_revise)
}

/// Door locked, nothing requested, nothing executed yet.
pub fn porter_initial_state() -> EnvState {
    let mut s = EnvState::new();
    s.insert("door".into(), door(true));
    s.insert("requests".into(), BeliefValue::empty_list());
    s.insert("executions".into(), BeliefValue::empty_list());
    s
}

fn apply_door(actions: &[Action], state: &mut EnvState) {
    if actions.iter().any(|a| a.as_token() == Some(LOCK)) {
        state.insert("door".into(), door(true));
    }
    if actions.iter().any(|a| a.as_token() == Some(UNLOCK)) {
        state.insert("door".into(), door(false));
    }
}

fn executions(actions: &[Action]) -> BeliefValue {
    BeliefValue::list(actions.iter().map(|a| match a {
        Action::Token(t) => BeliefValue::Text(t.clone()),
        Action::Record(m) => BeliefValue::from(m.clone()),
    }))
}

/// Draws the next request: lock or unlock with equal probability.
pub fn draw_request<R: Rng + ?Sized>(rng: &mut R) -> BeliefValue {
    tokens(&[if rng.gen_bool(0.5) { LOCK } else { UNLOCK }])
}

/// Applies lock/unlock to the door, records the executions and injects the
/// request the porter will perceive next.
pub fn porter_update_state<R: Rng + ?Sized>(
    actions: &[Action],
    state: &EnvState,
    rng: &mut R,
) -> EnvState {
    let mut next = state.clone();
    apply_door(actions, &mut next);
    next.insert("executions".into(), executions(actions));
    next.insert("requests".into(), draw_request(rng));
    next
}

/// Single-agent porter environment. The first request is drawn up front
/// so every step, the first included, perceives a fresh request.
pub fn porter_environment(seed: u64) -> Environment {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut state = porter_initial_state();
    state.insert("requests".into(), draw_request(&mut rng));
    Environment::builder(vec![Box::new(porter_agent())], state)
        .update_state(move |actions, _, state| Ok(porter_update_state(actions, state, &mut rng)))
        .build()
        .expect("single agent")
}

/// Asks for the door to be locked whenever it is unlocked.
pub fn paranoid_agent() -> Agent {
    let plan = Plan::new(|b| Ok(!beliefs_door_locked(b)?), |_| Ok(vec![Action::token(LOCK)]));
    Agent::new(PARANOID, porter_beliefs(), vec![plan]).expect("static id is valid")
}

/// Asks for the door to be unlocked whenever it is locked.
pub fn claustrophobe_agent() -> Agent {
    let plan = Plan::new(beliefs_door_locked, |_| Ok(vec![Action::token(UNLOCK)]));
    Agent::new(CLAUSTROPHOBE, porter_beliefs(), vec![plan]).expect("static id is valid")
}

/// State update for the three-agent system. The porter's actions move the
/// door and consume the queued requests; anyone else's actions are queued
/// as requests.
pub fn porter_mas_update(
    actions: &[Action],
    agent_id: &str,
    state: &EnvState,
) -> Result<EnvState, HookError> {
    let mut next = state.clone();
    if agent_id == PORTER {
        apply_door(actions, &mut next);
        next.insert("executions".into(), executions(actions));
        next.insert("requests".into(), BeliefValue::empty_list());
        return Ok(next);
    }
    let queued = state
        .get("requests")
        .and_then(BeliefValue::as_list)
        .ok_or_else(|| HookError::new("state lacks a requests list"))?;
    let mut requests = queued.to_vec();
    for a in actions {
        match a.as_token() {
            Some(t @ (LOCK | UNLOCK)) => requests.push(t.into()),
            _ => return Err(HookError::new(format!("{agent_id} requested {a}, expected lock or unlock"))),
        }
    }
    next.insert("requests".into(), BeliefValue::list(requests));
    Ok(next)
}

fn mas_environment(agents: Vec<Box<dyn Participant>>, runner: Runner) -> Result<Environment, EnvError> {
    Environment::builder(agents, porter_initial_state())
        .update_state(porter_mas_update)
        .runner(runner)
        .build()
}

/// All three agents local, synchronous runner.
pub fn porter_mas_environment() -> Environment {
    mas_environment(
        vec![
            Box::new(paranoid_agent()),
            Box::new(claustrophobe_agent()),
            Box::new(porter_agent()),
        ],
        Runner::Synchronous,
    )
    .expect("distinct ids")
}

/// Server side of the distributed system: the claustrophobe is a shadow
/// agent talking to a client over `channel`.
pub fn porter_mas_server_environment(
    channel: SharedChannel,
    registry: SharedRegistry,
    mode: RemoteTurn,
) -> Result<Environment, crate::distributed::DistributedError> {
    let shadow = ShadowAgent::new(CLAUSTROPHOBE, porter_beliefs(), channel, registry)?.with_mode(mode);
    Ok(mas_environment(
        vec![Box::new(paranoid_agent()), Box::new(shadow), Box::new(porter_agent())],
        Runner::MessageTriggered,
    )?)
}
