//! Bags (multisets) of events.
//!
//! Stored as a canonically sorted vector, so the derived equality and order
//! are exactly bag equality: duplicates are kept, and two bags are equal iff
//! their events pair up by (time, attrs). Element identity never matters.

use crate::model::Event;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Default)]
pub struct EventBag(Vec<Event>);

impl EventBag {
    pub fn empty() -> EventBag {
        EventBag(Vec::new())
    }

    pub fn singleton(e: Event) -> EventBag {
        EventBag(vec![e])
    }

    pub fn from_vec(mut events: Vec<Event>) -> EventBag {
        events.sort();
        EventBag(events)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Event> {
        self.0.iter()
    }

    /// Bag union: concatenation, duplicates preserved.
    pub fn union(&self, other: &EventBag) -> EventBag {
        let mut v = self.0.clone();
        v.extend(other.0.iter().cloned());
        EventBag::from_vec(v)
    }

    pub fn insert(&mut self, e: Event) {
        let pos = self.0.partition_point(|x| *x <= e);
        self.0.insert(pos, e);
    }

    /// Applies an event transformation, re-sorting afterwards.
    pub fn map<F: FnMut(&Event) -> Event>(&self, f: F) -> EventBag {
        EventBag::from_vec(self.0.iter().map(f).collect())
    }
}

impl FromIterator<Event> for EventBag {
    fn from_iter<I: IntoIterator<Item = Event>>(iter: I) -> Self {
        EventBag::from_vec(iter.into_iter().collect())
    }
}
