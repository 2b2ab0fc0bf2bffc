//! Structured belief values and their canonical JSON form.
//!
//! Every value that crosses an agent boundary (beliefs, percepts, actions,
//! environment state, wire messages, trace records) is built from
//! [`BeliefValue`]. The canonical text form is JSON with object keys sorted
//! byte-lexicographically, UTF-8, and no insignificant whitespace, so two
//! values are equal exactly when their canonical strings are equal.
//!
//! Lists and maps are reference counted: cloning a belief base or an
//! environment state never deep-copies large arrays.

use std::collections::BTreeMap;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use serde::de::{self, MapAccess, SeqAccess, Visitor};
use serde::ser::{SerializeMap, SerializeSeq};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// String-keyed map of values, iterated in sorted key order.
pub type ValueMap = BTreeMap<String, BeliefValue>;

/// A structured value: null, boolean, integer, float, text, list or map.
///
/// Floats compare by bit pattern. Non-finite floats have no JSON form and
/// serialize as `null`.
#[derive(Clone, Debug, Default)]
pub enum BeliefValue {
    #[default]
    Null,
    Bool(bool),
    Int(i64),
    Float(f64),
    Text(String),
    List(Arc<Vec<BeliefValue>>),
    Map(Arc<ValueMap>),
}

impl BeliefValue {
    pub fn list<I, T>(items: I) -> Self
    where
        I: IntoIterator<Item = T>,
        T: Into<BeliefValue>,
    {
        BeliefValue::List(Arc::new(items.into_iter().map(Into::into).collect()))
    }

    pub fn map<I, K, T>(entries: I) -> Self
    where
        I: IntoIterator<Item = (K, T)>,
        K: Into<String>,
        T: Into<BeliefValue>,
    {
        BeliefValue::Map(Arc::new(
            entries
                .into_iter()
                .map(|(k, v)| (k.into(), v.into()))
                .collect(),
        ))
    }

    pub fn empty_list() -> Self {
        BeliefValue::List(Arc::new(Vec::new()))
    }

    pub fn is_null(&self) -> bool {
        matches!(self, BeliefValue::Null)
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            BeliefValue::Bool(b) => Some(*b),
            _ => None,
        }
    }

    pub fn as_i64(&self) -> Option<i64> {
        match self {
            BeliefValue::Int(i) => Some(*i),
            _ => None,
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            BeliefValue::Float(f) => Some(*f),
            BeliefValue::Int(i) => Some(*i as f64),
            _ => None,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            BeliefValue::Text(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_list(&self) -> Option<&[BeliefValue]> {
        match self {
            BeliefValue::List(items) => Some(items),
            _ => None,
        }
    }

    pub fn as_map(&self) -> Option<&ValueMap> {
        match self {
            BeliefValue::Map(map) => Some(map),
            _ => None,
        }
    }

    /// Looks up `key` when this value is a map.
    pub fn get(&self, key: &str) -> Option<&BeliefValue> {
        self.as_map().and_then(|m| m.get(key))
    }

    /// Follows a path of map keys, e.g. `["door", "locked"]`.
    pub fn path(&self, keys: &[&str]) -> Option<&BeliefValue> {
        keys.iter().try_fold(self, |v, k| v.get(k))
    }

    /// JavaScript-style truthiness, used where wire handling mirrors a
    /// plain `if (x)` check on decoded JSON.
    pub fn is_truthy(&self) -> bool {
        match self {
            BeliefValue::Null => false,
            BeliefValue::Bool(b) => *b,
            BeliefValue::Int(i) => *i != 0,
            BeliefValue::Float(f) => *f != 0.0 && !f.is_nan(),
            BeliefValue::Text(s) => !s.is_empty(),
            BeliefValue::List(_) | BeliefValue::Map(_) => true,
        }
    }

    /// Nesting depth; scalars have depth 0.
    pub fn depth(&self) -> usize {
        match self {
            BeliefValue::List(items) => 1 + items.iter().map(Self::depth).max().unwrap_or(0),
            BeliefValue::Map(map) => 1 + map.values().map(Self::depth).max().unwrap_or(0),
            _ => 0,
        }
    }

    pub fn to_canonical_json(&self) -> String {
        canonical_string(self)
    }

    pub fn from_json(text: &str) -> Result<Self, ParseError> {
        serde_json::from_str(text).map_err(|e| ParseError::from_serde(text, &e))
    }
}

impl PartialEq for BeliefValue {
    fn eq(&self, other: &Self) -> bool {
        use BeliefValue::*;
        match (self, other) {
            (Null, Null) => true,
            (Bool(a), Bool(b)) => a == b,
            (Int(a), Int(b)) => a == b,
            (Float(a), Float(b)) => a.to_bits() == b.to_bits(),
            (Text(a), Text(b)) => a == b,
            (List(a), List(b)) => Arc::ptr_eq(a, b) || a == b,
            (Map(a), Map(b)) => Arc::ptr_eq(a, b) || a == b,
            _ => false,
        }
    }
}

impl Eq for BeliefValue {}

impl Hash for BeliefValue {
    fn hash<H: Hasher>(&self, state: &mut H) {
        std::mem::discriminant(self).hash(state);
        match self {
            BeliefValue::Null => {}
            BeliefValue::Bool(b) => b.hash(state),
            BeliefValue::Int(i) => i.hash(state),
            BeliefValue::Float(f) => f.to_bits().hash(state),
            BeliefValue::Text(s) => s.hash(state),
            BeliefValue::List(items) => items.hash(state),
            BeliefValue::Map(map) => map.hash(state),
        }
    }
}

impl fmt::Display for BeliefValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_canonical_json())
    }
}

impl From<bool> for BeliefValue {
    fn from(b: bool) -> Self {
        BeliefValue::Bool(b)
    }
}

impl From<i64> for BeliefValue {
    fn from(i: i64) -> Self {
        BeliefValue::Int(i)
    }
}

impl From<i32> for BeliefValue {
    fn from(i: i32) -> Self {
        BeliefValue::Int(i.into())
    }
}

impl From<usize> for BeliefValue {
    fn from(i: usize) -> Self {
        i64::try_from(i)
            .map(BeliefValue::Int)
            .unwrap_or(BeliefValue::Float(i as f64))
    }
}

impl From<f64> for BeliefValue {
    fn from(f: f64) -> Self {
        BeliefValue::Float(f)
    }
}

impl From<&str> for BeliefValue {
    fn from(s: &str) -> Self {
        BeliefValue::Text(s.to_owned())
    }
}

impl From<String> for BeliefValue {
    fn from(s: String) -> Self {
        BeliefValue::Text(s)
    }
}

impl From<Vec<BeliefValue>> for BeliefValue {
    fn from(items: Vec<BeliefValue>) -> Self {
        BeliefValue::List(Arc::new(items))
    }
}

impl From<ValueMap> for BeliefValue {
    fn from(map: ValueMap) -> Self {
        BeliefValue::Map(Arc::new(map))
    }
}

impl Serialize for BeliefValue {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            BeliefValue::Null => serializer.serialize_unit(),
            BeliefValue::Bool(b) => serializer.serialize_bool(*b),
            BeliefValue::Int(i) => serializer.serialize_i64(*i),
            BeliefValue::Float(f) if f.is_finite() => serializer.serialize_f64(*f),
            BeliefValue::Float(_) => serializer.serialize_unit(),
            BeliefValue::Text(s) => serializer.serialize_str(s),
            BeliefValue::List(items) => {
                let mut seq = serializer.serialize_seq(Some(items.len()))?;
                for item in items.iter() {
                    seq.serialize_element(item)?;
                }
                seq.end()
            }
            BeliefValue::Map(entries) => {
                let mut map = serializer.serialize_map(Some(entries.len()))?;
                for (k, v) in entries.iter() {
                    map.serialize_entry(k, v)?;
                }
                map.end()
            }
        }
    }
}

impl<'de> Deserialize<'de> for BeliefValue {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        deserializer.deserialize_any(ValueVisitor)
    }
}

struct ValueVisitor;

impl<'de> Visitor<'de> for ValueVisitor {
    type Value = BeliefValue;

    fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("a JSON value")
    }

    fn visit_unit<E: de::Error>(self) -> Result<BeliefValue, E> {
        Ok(BeliefValue::Null)
    }

    fn visit_none<E: de::Error>(self) -> Result<BeliefValue, E> {
        Ok(BeliefValue::Null)
    }

    fn visit_bool<E: de::Error>(self, v: bool) -> Result<BeliefValue, E> {
        Ok(BeliefValue::Bool(v))
    }

    fn visit_i64<E: de::Error>(self, v: i64) -> Result<BeliefValue, E> {
        Ok(BeliefValue::Int(v))
    }

    fn visit_u64<E: de::Error>(self, v: u64) -> Result<BeliefValue, E> {
        // integers beyond i64 degrade to floats
        Ok(i64::try_from(v)
            .map(BeliefValue::Int)
            .unwrap_or(BeliefValue::Float(v as f64)))
    }

    fn visit_f64<E: de::Error>(self, v: f64) -> Result<BeliefValue, E> {
        Ok(BeliefValue::Float(v))
    }

    fn visit_str<E: de::Error>(self, v: &str) -> Result<BeliefValue, E> {
        Ok(BeliefValue::Text(v.to_owned()))
    }

    fn visit_string<E: de::Error>(self, v: String) -> Result<BeliefValue, E> {
        Ok(BeliefValue::Text(v))
    }

    fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> Result<BeliefValue, A::Error> {
        let mut items = Vec::with_capacity(seq.size_hint().unwrap_or(0));
        while let Some(item) = seq.next_element()? {
            items.push(item);
        }
        Ok(BeliefValue::List(Arc::new(items)))
    }

    fn visit_map<A: MapAccess<'de>>(self, mut access: A) -> Result<BeliefValue, A::Error> {
        let mut map = ValueMap::new();
        while let Some((k, v)) = access.next_entry::<String, BeliefValue>()? {
            map.insert(k, v);
        }
        Ok(BeliefValue::Map(Arc::new(map)))
    }
}

/// JSON text that failed to parse, with the byte offset of the failure.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{message} at byte {offset}")]
pub struct ParseError {
    pub offset: usize,
    pub message: String,
}

impl ParseError {
    pub(crate) fn from_serde(text: &str, err: &serde_json::Error) -> Self {
        ParseError {
            offset: byte_offset(text, err.line(), err.column()),
            message: err.to_string(),
        }
    }
}

/// Converts serde_json's 1-based (line, column) into a byte offset.
fn byte_offset(text: &str, line: usize, column: usize) -> usize {
    if line == 0 {
        return 0;
    }
    let line_start: usize = text
        .split_inclusive('\n')
        .take(line - 1)
        .map(str::len)
        .sum();
    (line_start + column.saturating_sub(1)).min(text.len())
}

/// Canonical JSON for any serializable value: sorted object keys, no
/// whitespace.
pub fn canonical_string<T: Serialize + ?Sized>(value: &T) -> String {
    let json = serde_json::to_value(value).expect("canonical values always serialize");
    let mut out = String::new();
    write_canonical(&json, &mut out);
    out
}

fn write_canonical(value: &serde_json::Value, out: &mut String) {
    match value {
        serde_json::Value::Array(items) => {
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write_canonical(item, out);
            }
            out.push(']');
        }
        serde_json::Value::Object(map) => {
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            out.push('{');
            for (i, key) in keys.into_iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push_str(&serde_json::to_string(key).expect("string keys serialize"));
                out.push(':');
                write_canonical(&map[key], out);
            }
            out.push('}');
        }
        leaf => out.push_str(&leaf.to_string()),
    }
}
