//! Actions, plans and deliberation.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::belief::BeliefBase;
use crate::error::AgentError;
use crate::value::{BeliefValue, ValueMap};

/// What a plan body emits: a bare token such as `"unlock"`, or a record
/// such as `{"nextRound": "active"}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Action {
    Token(String),
    Record(ValueMap),
}

impl Action {
    pub fn token(s: impl Into<String>) -> Self {
        Action::Token(s.into())
    }

    pub fn record<I, K, V>(entries: I) -> Self
    where
        I: IntoIterator<Item = (K, V)>,
        K: Into<String>,
        V: Into<BeliefValue>,
    {
        Action::Record(
            entries
                .into_iter()
                .map(|(k, v)| (k.into(), v.into()))
                .collect(),
        )
    }

    pub fn as_token(&self) -> Option<&str> {
        match self {
            Action::Token(t) => Some(t),
            Action::Record(_) => None,
        }
    }

    pub fn field(&self, key: &str) -> Option<&BeliefValue> {
        match self {
            Action::Record(map) => map.get(key),
            Action::Token(_) => None,
        }
    }

    pub fn to_canonical_json(&self) -> String {
        crate::value::canonical_string(self)
    }
}

impl From<&str> for Action {
    fn from(s: &str) -> Self {
        Action::token(s)
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Action::Token(t) => f.write_str(t),
            Action::Record(_) => f.write_str(&self.to_canonical_json()),
        }
    }
}

/// A plan head or body could not be evaluated against the beliefs.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{0}")]
pub struct PlanError(pub String);

impl PlanError {
    pub fn new(msg: impl Into<String>) -> Self {
        PlanError(msg.into())
    }

    pub fn missing(key: &str) -> Self {
        PlanError(format!("belief {key:?} missing or of the wrong type"))
    }
}

type HeadFn = dyn Fn(&BeliefBase) -> Result<bool, PlanError> + Send + Sync;
type BodyFn = dyn Fn(&BeliefBase) -> Result<Vec<Action>, PlanError> + Send + Sync;

/// A (head, body) pair. The head decides whether the plan is active for
/// the current beliefs; the body produces the plan's actions. Both only
/// ever see the beliefs by shared reference.
#[derive(Clone)]
pub struct Plan {
    head: Arc<HeadFn>,
    body: Arc<BodyFn>,
}

impl Plan {
    pub fn new<H, B>(head: H, body: B) -> Self
    where
        H: Fn(&BeliefBase) -> Result<bool, PlanError> + Send + Sync + 'static,
        B: Fn(&BeliefBase) -> Result<Vec<Action>, PlanError> + Send + Sync + 'static,
    {
        Plan {
            head: Arc::new(head),
            body: Arc::new(body),
        }
    }

    /// A plan whose head is constantly true.
    pub fn always<B>(body: B) -> Self
    where
        B: Fn(&BeliefBase) -> Result<Vec<Action>, PlanError> + Send + Sync + 'static,
    {
        Plan::new(|_| Ok(true), body)
    }

    pub fn is_active(&self, beliefs: &BeliefBase) -> Result<bool, PlanError> {
        (self.head)(beliefs)
    }

    pub fn execute(&self, beliefs: &BeliefBase) -> Result<Vec<Action>, PlanError> {
        (self.body)(beliefs)
    }
}

impl fmt::Debug for Plan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Plan").finish_non_exhaustive()
    }
}

/// Evaluates the head of plan number `index`.
pub fn plan_active(plan: &Plan, index: usize, beliefs: &BeliefBase) -> Result<bool, AgentError> {
    plan.is_active(beliefs).map_err(|e| AgentError::PlanHead {
        index,
        message: e.0,
    })
}

/// Result of deliberating over a plan library.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Deliberation {
    pub actions: Vec<Action>,
    pub errors: Vec<AgentError>,
}

/// Runs the body of every active plan in registration order and
/// concatenates their actions. A failing head or body is recorded and
/// skipped; the remaining plans still run.
pub fn deliberate(beliefs: &BeliefBase, plans: &[Plan]) -> Deliberation {
    let mut out = Deliberation::default();
    for (index, plan) in plans.iter().enumerate() {
        match plan_active(plan, index, beliefs) {
            Ok(true) => match plan.execute(beliefs) {
                Ok(actions) => out.actions.extend(actions),
                Err(e) => out.errors.push(AgentError::PlanBody {
                    index,
                    message: e.0,
                }),
            },
            Ok(false) => {}
            Err(e) => out.errors.push(e),
        }
    }
    out
}
