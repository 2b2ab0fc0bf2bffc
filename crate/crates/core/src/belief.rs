//! Beliefs, belief bases and the default revision function.

use std::collections::btree_map::{self, BTreeMap};
use std::fmt;
use std::sync::Arc;

use serde::de::{self, MapAccess, Visitor};
use serde::ser::SerializeMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::AgentError;
use crate::value::{BeliefValue, ParseError, ValueMap};

const PRIORITY_FIELD: &str = "@priority";
const VALUE_FIELD: &str = "@value";

/// A keyed value in an agent's world model, optionally prioritized.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Belief {
    key: String,
    value: BeliefValue,
    priority: Option<i64>,
}

impl Belief {
    pub fn new(
        key: impl Into<String>,
        value: impl Into<BeliefValue>,
        priority: Option<i64>,
    ) -> Result<Self, AgentError> {
        let key = key.into();
        validate_key(&key)?;
        Ok(Belief {
            key,
            value: value.into(),
            priority,
        })
    }

    pub fn key(&self) -> &str {
        &self.key
    }

    pub fn value(&self) -> &BeliefValue {
        &self.value
    }

    pub fn priority(&self) -> Option<i64> {
        self.priority
    }

    pub fn into_value(self) -> BeliefValue {
        self.value
    }
}

/// Keys must be non-empty and free of control characters.
pub fn validate_key(key: &str) -> Result<(), AgentError> {
    if key.is_empty() || key.chars().any(char::is_control) {
        Err(AgentError::InvalidBeliefKey(key.to_owned()))
    } else {
        Ok(())
    }
}

/// An agent's beliefs: one [`Belief`] per key.
///
/// Percepts share this representation; see [`Percepts`].
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct BeliefBase {
    entries: BTreeMap<String, Belief>,
}

/// Incoming beliefs delivered by an environment.
pub type Percepts = BeliefBase;

impl BeliefBase {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds an unprioritized belief base from a plain value map.
    pub fn from_values(values: &ValueMap) -> Result<Self, AgentError> {
        let mut base = BeliefBase::new();
        for (k, v) in values {
            base.insert(Belief::new(k.clone(), v.clone(), None)?);
        }
        Ok(base)
    }

    /// Inserts or replaces the entry under the belief's own key.
    pub fn insert(&mut self, belief: Belief) -> Option<Belief> {
        self.entries.insert(belief.key.clone(), belief)
    }

    /// Replaces `key` with an unprioritized value.
    pub fn set(
        &mut self,
        key: impl Into<String>,
        value: impl Into<BeliefValue>,
    ) -> Result<(), AgentError> {
        self.insert(Belief::new(key, value, None)?);
        Ok(())
    }

    /// Builder-style [`BeliefBase::set`].
    pub fn with(
        mut self,
        key: impl Into<String>,
        value: impl Into<BeliefValue>,
    ) -> Result<Self, AgentError> {
        self.set(key, value)?;
        Ok(self)
    }

    /// Merges another fragment in, its entries replacing existing ones.
    pub fn merge(&mut self, other: BeliefBase) {
        self.entries.extend(other.entries);
    }

    pub fn get(&self, key: &str) -> Option<&Belief> {
        self.entries.get(key)
    }

    pub fn value(&self, key: &str) -> Option<&BeliefValue> {
        self.entries.get(key).map(Belief::value)
    }

    pub fn remove(&mut self, key: &str) -> Option<Belief> {
        self.entries.remove(key)
    }

    pub fn contains_key(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Belief> {
        self.entries.values()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Plain key/value view; priorities are dropped.
    pub fn to_value_map(&self) -> ValueMap {
        self.entries
            .iter()
            .map(|(k, b)| (k.clone(), b.value.clone()))
            .collect()
    }

    /// Canonical JSON. Unprioritized entries appear as their bare value;
    /// prioritized ones as `{"@priority": p, "@value": v}`.
    pub fn to_canonical_json(&self) -> String {
        crate::value::canonical_string(self)
    }

    pub fn from_canonical_json(text: &str) -> Result<Self, ParseError> {
        serde_json::from_str(text).map_err(|e| ParseError::from_serde(text, &e))
    }
}

impl<'a> IntoIterator for &'a BeliefBase {
    type Item = &'a Belief;
    type IntoIter = btree_map::Values<'a, String, Belief>;

    fn into_iter(self) -> Self::IntoIter {
        self.entries.values()
    }
}

impl FromIterator<Belief> for BeliefBase {
    fn from_iter<I: IntoIterator<Item = Belief>>(iter: I) -> Self {
        let mut base = BeliefBase::new();
        for belief in iter {
            base.insert(belief);
        }
        base
    }
}

impl fmt::Display for BeliefBase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_canonical_json())
    }
}

impl Serialize for BeliefBase {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(self.entries.len()))?;
        for (k, belief) in &self.entries {
            match belief.priority {
                None => map.serialize_entry(k, &belief.value)?,
                Some(p) => {
                    let wrapped = BeliefValue::map([
                        (PRIORITY_FIELD, BeliefValue::Int(p)),
                        (VALUE_FIELD, belief.value.clone()),
                    ]);
                    map.serialize_entry(k, &wrapped)?
                }
            }
        }
        map.end()
    }
}

impl<'de> Deserialize<'de> for BeliefBase {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct BaseVisitor;

        impl<'de> Visitor<'de> for BaseVisitor {
            type Value = BeliefBase;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a JSON object of beliefs")
            }

            fn visit_map<A: MapAccess<'de>>(self, mut access: A) -> Result<BeliefBase, A::Error> {
                let mut base = BeliefBase::new();
                while let Some((key, value)) = access.next_entry::<String, BeliefValue>()? {
                    let (value, priority) = unwrap_priority(value);
                    let belief = Belief::new(key, value, priority).map_err(de::Error::custom)?;
                    base.insert(belief);
                }
                Ok(base)
            }
        }

        deserializer.deserialize_map(BaseVisitor)
    }
}

fn unwrap_priority(value: BeliefValue) -> (BeliefValue, Option<i64>) {
    if let BeliefValue::Map(map) = &value {
        if map.len() == 2 {
            if let (Some(BeliefValue::Int(p)), Some(inner)) =
                (map.get(PRIORITY_FIELD), map.get(VALUE_FIELD))
            {
                return (inner.clone(), Some(*p));
            }
        }
    }
    (value, None)
}

/// Creates a single-entry belief base fragment.
pub fn make_belief(
    key: impl Into<String>,
    value: impl Into<BeliefValue>,
    priority: Option<i64>,
) -> Result<BeliefBase, AgentError> {
    Ok(BeliefBase::from_iter([Belief::new(key, value, priority)?]))
}

/// Merges percepts into beliefs.
///
/// On conflicting keys: if neither entry carries a priority the percept
/// wins; if exactly one does, that one wins; if both do, the higher priority
/// wins and a tie goes to the percept. Priorities are an extension of the
/// plain percepts-take-precedence rule.
pub fn default_revise(beliefs: &BeliefBase, percepts: &Percepts) -> BeliefBase {
    let mut out = beliefs.clone();
    for (key, incoming) in &percepts.entries {
        let keep_existing = match out.entries.get(key) {
            None => false,
            Some(existing) => match (existing.priority, incoming.priority) {
                (None, None) => false,
                (Some(_), None) => true,
                (None, Some(_)) => false,
                (Some(old), Some(new)) => old > new,
            },
        };
        if !keep_existing {
            out.entries.insert(key.clone(), incoming.clone());
        }
    }
    out
}

/// Revision function signature shared by agents.
pub type ReviseFn =
    dyn Fn(&BeliefBase, &Percepts) -> Result<BeliefBase, ReviseError> + Send + Sync;

/// Shared handle to a revision function.
pub type Reviser = Arc<ReviseFn>;

/// A revision function rejected its inputs.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{0}")]
pub struct ReviseError(pub String);

impl ReviseError {
    pub fn new(msg: impl Into<String>) -> Self {
        ReviseError(msg.into())
    }
}
