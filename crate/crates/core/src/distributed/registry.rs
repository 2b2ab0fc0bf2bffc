use std::collections::BTreeMap;
use std::sync::{Arc, Mutex, MutexGuard};

use crate::distributed::DistributedError;
use crate::plan::Action;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
struct Entry {
    actions: Option<Vec<Vec<Action>>>,
    // bumped on every write, lets readers tell fresh from repeated values
    revision: u64,
}

/// Latest action request per registered shadow agent; last writer wins.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ActionRequestRegistry {
    entries: BTreeMap<String, Entry>,
}

impl ActionRequestRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn register(&mut self, agent_id: &str) -> Result<(), DistributedError> {
        if self.entries.contains_key(agent_id) {
            return Err(DistributedError::DuplicateAgentId(agent_id.to_owned()));
        }
        self.entries.insert(agent_id.to_owned(), Entry::default());
        Ok(())
    }

    pub fn contains(&self, agent_id: &str) -> bool {
        self.entries.contains_key(agent_id)
    }

    /// Stores `actions` for a registered id.
    pub fn store(
        &mut self,
        agent_id: &str,
        actions: Vec<Vec<Action>>,
    ) -> Result<(), DistributedError> {
        let entry = self
            .entries
            .get_mut(agent_id)
            .ok_or_else(|| DistributedError::UnknownAgent(agent_id.to_owned()))?;
        entry.actions = Some(actions);
        entry.revision += 1;
        Ok(())
    }

    pub fn latest(&self, agent_id: &str) -> Option<&Vec<Vec<Action>>> {
        self.entries.get(agent_id).and_then(|e| e.actions.as_ref())
    }

    /// Number of writes seen for `agent_id` (0 when none or unknown).
    pub fn revision(&self, agent_id: &str) -> u64 {
        self.entries.get(agent_id).map_or(0, |e| e.revision)
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }
}

/// Registry handle shared by the server executor and its shadow agents.
#[derive(Debug, Clone, Default)]
pub struct SharedRegistry(Arc<Mutex<ActionRequestRegistry>>);

impl SharedRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn lock(&self) -> MutexGuard<'_, ActionRequestRegistry> {
        self.0.lock().unwrap_or_else(|p| p.into_inner())
    }
}
