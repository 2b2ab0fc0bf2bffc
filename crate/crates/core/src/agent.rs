//! The reasoning-loop agent: revise, deliberate, act.

use std::fmt;
use std::sync::Arc;

use crate::belief::{default_revise, BeliefBase, Percepts, ReviseError, Reviser};
use crate::error::AgentError;
use crate::plan::{deliberate, Action, Plan};

/// Actions produced by one reasoning cycle plus any recorded failures.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CycleOutcome {
    pub actions: Vec<Action>,
    pub errors: Vec<AgentError>,
}

/// A belief-plan agent.
///
/// Plan order is fixed at construction. Deliberation is always
/// [`deliberate`]; only revision is replaceable.
#[derive(Clone)]
pub struct Agent {
    id: String,
    beliefs: BeliefBase,
    plans: Vec<Plan>,
    revise: Reviser,
}

impl Agent {
    pub fn new(
        id: impl Into<String>,
        beliefs: BeliefBase,
        plans: Vec<Plan>,
    ) -> Result<Self, AgentError> {
        let id = id.into();
        if id.is_empty() || id.chars().any(char::is_control) {
            return Err(AgentError::InvalidAgentId(id));
        }
        Ok(Agent {
            id,
            beliefs,
            plans,
            revise: Arc::new(|b: &BeliefBase, p: &Percepts| Ok(default_revise(b, p))),
        })
    }

    /// Replaces the default revision function.
    pub fn with_revision<F>(mut self, revise: F) -> Self
    where
        F: Fn(&BeliefBase, &Percepts) -> Result<BeliefBase, ReviseError> + Send + Sync + 'static,
    {
        self.revise = Arc::new(revise);
        self
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn beliefs(&self) -> &BeliefBase {
        &self.beliefs
    }

    pub fn plans(&self) -> &[Plan] {
        &self.plans
    }

    /// One reasoning cycle. Beliefs become the revision result, then the
    /// active plans run against them. If revision fails the beliefs keep
    /// their previous value and no actions are produced.
    pub fn next(&mut self, percepts: &Percepts) -> CycleOutcome {
        match (self.revise)(&self.beliefs, percepts) {
            Ok(revised) => {
                self.beliefs = revised;
                let d = deliberate(&self.beliefs, &self.plans);
                CycleOutcome {
                    actions: d.actions,
                    errors: d.errors,
                }
            }
            Err(e) => CycleOutcome {
                actions: Vec::new(),
                errors: vec![AgentError::Revise(e.0)],
            },
        }
    }
}

impl fmt::Debug for Agent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Agent")
            .field("id", &self.id)
            .field("beliefs", &self.beliefs)
            .field("plans", &self.plans.len())
            .finish()
    }
}
