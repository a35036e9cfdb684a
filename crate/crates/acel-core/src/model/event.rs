//! Events and attribute renamings.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::EvalError;
use crate::model::Value;

/// The distinguished attribute holding the event type.
pub const TYPE_ATTR: &str = "type";

/// A stream or output event: a finite attribute-to-value map plus the time
/// (stream position for stream events, emission position for automaton
/// outputs). Reading an absent attribute yields Null.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Event {
    time: u64,
    attrs: BTreeMap<String, Value>,
}

impl Event {
    pub fn new(time: u64, attrs: BTreeMap<String, Value>) -> Event {
        Event { time, attrs }
    }

    /// Convenience constructor from (name, value) pairs.
    pub fn from_pairs<I, S>(time: u64, pairs: I) -> Event
    where
        I: IntoIterator<Item = (S, Value)>,
        S: Into<String>,
    {
        Event {
            time,
            attrs: pairs.into_iter().map(|(k, v)| (k.into(), v)).collect(),
        }
    }

    pub fn time(&self) -> u64 {
        self.time
    }

    /// Attribute lookup; absent attributes read as Null.
    pub fn get(&self, attr: &str) -> Value {
        self.attrs.get(attr).cloned().unwrap_or(Value::Null)
    }

    pub fn has_attr(&self, attr: &str) -> bool {
        self.attrs.contains_key(attr)
    }

    pub fn attr_names(&self) -> impl Iterator<Item = &str> {
        self.attrs.keys().map(|s| s.as_str())
    }

    pub fn attrs(&self) -> &BTreeMap<String, Value> {
        &self.attrs
    }

    /// The event type, if the event carries a textual `type` attribute.
    pub fn event_type(&self) -> Option<&str> {
        match self.attrs.get(TYPE_ATTR) {
            Some(Value::Text(t)) => Some(t),
            _ => None,
        }
    }

    /// `self >> base`: attribute union where `self` wins on conflicts.
    /// The time comes from `self`.
    pub fn update_over(&self, base: &Event) -> Event {
        let mut attrs = base.attrs.clone();
        for (k, v) in &self.attrs {
            attrs.insert(k.clone(), v.clone());
        }
        Event { time: self.time, attrs }
    }

    /// Keeps only the listed attributes (intersection with what is present).
    pub fn project_attrs(&self, keep: &BTreeSet<String>) -> Event {
        Event {
            time: self.time,
            attrs: self
                .attrs
                .iter()
                .filter(|(k, _)| keep.contains(*k))
                .map(|(k, v)| (k.clone(), v.clone()))
                .collect(),
        }
    }

    /// Renames each attribute `a` in the renaming's domain to `r(a)`.
    /// Attributes outside the domain are dropped; a collision on the target
    /// name with different values means the event is inconsistent with `r`.
    pub fn rename(&self, r: &Renaming) -> Result<Event, EvalError> {
        let mut attrs = BTreeMap::new();
        for (from, to) in &r.0 {
            let v = self.get(from);
            if let Some(prev) = attrs.get(to) {
                if *prev != v {
                    return Err(EvalError::InconsistentRenaming(to.clone()));
                }
            }
            attrs.insert(to.clone(), v);
        }
        Ok(Event { time: self.time, attrs })
    }
}

/// An attribute-to-attribute map.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Default)]
pub struct Renaming(pub BTreeMap<String, String>);

impl Renaming {
    pub fn from_pairs<I, S, T>(pairs: I) -> Renaming
    where
        I: IntoIterator<Item = (S, T)>,
        S: Into<String>,
        T: Into<String>,
    {
        Renaming(pairs.into_iter().map(|(a, b)| (a.into(), b.into())).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(time: u64, pairs: &[(&str, i64)]) -> Event {
        Event::from_pairs(time, pairs.iter().map(|(k, v)| (*k, Value::Int(*v))))
    }

    #[test]
    fn absent_attribute_reads_null() {
        assert_eq!(ev(0, &[("a", 1)]).get("b"), Value::Null);
    }

    #[test]
    fn update_prefers_left() {
        let e = ev(7, &[("a", 1)]);
        let base = ev(0, &[("a", 2), ("b", 3)]);
        let u = e.update_over(&base);
        assert_eq!(u.time(), 7);
        assert_eq!(u.get("a"), Value::Int(1));
        assert_eq!(u.get("b"), Value::Int(3));
    }

    #[test]
    fn update_is_idempotent_in_base() {
        let e = ev(1, &[("a", 1), ("c", 4)]);
        let base = ev(0, &[("a", 2), ("b", 3)]);
        let once = e.update_over(&base);
        assert_eq!(once.update_over(&base), once);
    }

    #[test]
    fn rename_inverts_register_names() {
        let r = Renaming::from_pairs([("n", "name"), ("p", "price")]);
        let e = Event::from_pairs(0, [("n", Value::text("MSFT")), ("p", Value::Int(101))]);
        let out = e.rename(&r).unwrap();
        assert_eq!(out.get("name"), Value::text("MSFT"));
        assert_eq!(out.get("price"), Value::Int(101));
        assert_eq!(out.time(), 0);
        assert!(!out.has_attr("n"));
    }

    #[test]
    fn rename_detects_inconsistency() {
        let r = Renaming::from_pairs([("a", "c"), ("b", "c")]);
        assert!(ev(0, &[("a", 1), ("b", 2)]).rename(&r).is_err());
        // Equal values may share a target.
        assert!(ev(0, &[("a", 1), ("b", 1)]).rename(&r).is_ok());
    }

    #[test]
    fn project_keeps_time_and_listed_attrs() {
        let keep: BTreeSet<String> = ["price".to_string()].into();
        let e = Event::from_pairs(2, [("name", Value::text("INTC")), ("price", Value::Int(80))]);
        let p = e.project_attrs(&keep);
        assert_eq!(p.time(), 2);
        assert_eq!(p.attrs().len(), 1);
        assert_eq!(p.get("price"), Value::Int(80));
    }
}
