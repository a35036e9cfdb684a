//! Schemas and streams.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::StreamViolation;
use crate::model::{Event, Value, TYPE_ATTR};

/// Maps each event-type name to the exact set of attribute names its events
/// carry (not counting the distinguished `type` attribute).
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Schema(BTreeMap<String, BTreeSet<String>>);

impl Schema {
    pub fn new(types: BTreeMap<String, BTreeSet<String>>) -> Schema {
        Schema(types)
    }

    pub fn from_pairs<I, S, A>(pairs: I) -> Schema
    where
        I: IntoIterator<Item = (S, Vec<A>)>,
        S: Into<String>,
        A: Into<String>,
    {
        Schema(
            pairs
                .into_iter()
                .map(|(t, attrs)| (t.into(), attrs.into_iter().map(Into::into).collect()))
                .collect(),
        )
    }

    pub fn attrs_of(&self, event_type: &str) -> Option<&BTreeSet<String>> {
        self.0.get(event_type)
    }

    pub fn types(&self) -> impl Iterator<Item = &str> {
        self.0.keys().map(|s| s.as_str())
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &BTreeSet<String>)> {
        self.0.iter().map(|(t, a)| (t.as_str(), a))
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// A finite, fully materialized event sequence; the event at index `i` has
/// time `i`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Stream(Vec<Event>);

impl Stream {
    pub fn new(events: Vec<Event>) -> Stream {
        Stream(events)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, pos: usize) -> Option<&Event> {
        self.0.get(pos)
    }

    pub fn events(&self) -> &[Event] {
        &self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &Event)> {
        self.0.iter().enumerate()
    }
}

/// Checks that every event is typed, matches the schema's exact attribute
/// set, and sits at the position its time claims.
pub fn validate_stream(stream: &Stream, schema: &Schema) -> Result<(), StreamViolation> {
    for (i, e) in stream.iter() {
        let fail = |reason: String| StreamViolation { index: i, reason };
        if e.time() != i as u64 {
            return Err(fail(format!("time {} does not match position {i}", e.time())));
        }
        match e.attrs().get(TYPE_ATTR) {
            Some(Value::Text(t)) => {
                let declared = schema
                    .attrs_of(t)
                    .ok_or_else(|| fail(format!("unknown event type {t:?}")))?;
                let actual: BTreeSet<&str> =
                    e.attr_names().filter(|a| *a != TYPE_ATTR).collect();
                let expected: BTreeSet<&str> = declared.iter().map(|s| s.as_str()).collect();
                if actual != expected {
                    let missing: Vec<&str> = expected.difference(&actual).copied().collect();
                    let extra: Vec<&str> = actual.difference(&expected).copied().collect();
                    return Err(fail(format!(
                        "attribute set mismatch for type {t:?} (missing {missing:?}, extra {extra:?})"
                    )));
                }
            }
            Some(other) => return Err(fail(format!("type attribute is not text: {other}"))),
            None => return Err(fail("missing type attribute".into())),
        }
    }
    Ok(())
}
