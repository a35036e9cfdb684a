//! Complex events: a stream interval plus a valuation from variables to
//! bags of events (or to position sets, for the legacy position semantics).

use std::collections::{BTreeMap, BTreeSet};

use crate::model::{Event, EventBag};

/// A match: the interval `[start..end]` it spans and, per variable, the bag
/// of events that fired it. Variables not present map to the empty bag; the
/// representation drops empty bags so structural equality is well defined.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct ComplexEvent {
    start: usize,
    end: usize,
    valuation: BTreeMap<String, EventBag>,
}

impl ComplexEvent {
    pub fn new(start: usize, end: usize, valuation: BTreeMap<String, EventBag>) -> ComplexEvent {
        debug_assert!(start <= end);
        let valuation = valuation.into_iter().filter(|(_, b)| !b.is_empty()).collect();
        ComplexEvent { start, end, valuation }
    }

    pub fn singleton(pos: usize, var: impl Into<String>, e: Event) -> ComplexEvent {
        ComplexEvent::new(pos, pos, BTreeMap::from([(var.into(), EventBag::singleton(e))]))
    }

    pub fn start(&self) -> usize {
        self.start
    }

    pub fn end(&self) -> usize {
        self.end
    }

    pub fn bag(&self, var: &str) -> EventBag {
        self.valuation.get(var).cloned().unwrap_or_default()
    }

    /// Variables with a non-empty bag.
    pub fn vars(&self) -> impl Iterator<Item = &str> {
        self.valuation.keys().map(|s| s.as_str())
    }

    pub fn valuation(&self) -> &BTreeMap<String, EventBag> {
        &self.valuation
    }

    /// Replaces one variable's bag.
    pub fn with_bag(&self, var: impl Into<String>, bag: EventBag) -> ComplexEvent {
        let mut valuation = self.valuation.clone();
        let var = var.into();
        if bag.is_empty() {
            valuation.remove(&var);
        } else {
            valuation.insert(var, bag);
        }
        ComplexEvent { start: self.start, end: self.end, valuation }
    }

    /// Union: interval hull, per-variable bag union.
    pub fn union(&self, other: &ComplexEvent) -> ComplexEvent {
        let mut valuation = self.valuation.clone();
        for (var, bag) in &other.valuation {
            valuation
                .entry(var.clone())
                .and_modify(|b| *b = b.union(bag))
                .or_insert_with(|| bag.clone());
        }
        ComplexEvent {
            start: self.start.min(other.start),
            end: self.end.max(other.end),
            valuation,
        }
    }

    /// Keeps only the listed variables; the interval is unchanged.
    pub fn project_vars(&self, keep: &BTreeSet<String>) -> ComplexEvent {
        ComplexEvent {
            start: self.start,
            end: self.end,
            valuation: self
                .valuation
                .iter()
                .filter(|(v, _)| keep.contains(*v))
                .map(|(v, b)| (v.clone(), b.clone()))
                .collect(),
        }
    }
}

/// A match under the legacy position-based semantics: variables map to sets
/// of stream positions instead of bags of events.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct PositionComplexEvent {
    start: usize,
    end: usize,
    valuation: BTreeMap<String, BTreeSet<usize>>,
}

impl PositionComplexEvent {
    pub fn new(
        start: usize,
        end: usize,
        valuation: BTreeMap<String, BTreeSet<usize>>,
    ) -> PositionComplexEvent {
        debug_assert!(start <= end);
        let valuation = valuation.into_iter().filter(|(_, s)| !s.is_empty()).collect();
        PositionComplexEvent { start, end, valuation }
    }

    pub fn singleton(pos: usize, var: impl Into<String>) -> PositionComplexEvent {
        PositionComplexEvent::new(pos, pos, BTreeMap::from([(var.into(), BTreeSet::from([pos]))]))
    }

    pub fn start(&self) -> usize {
        self.start
    }

    pub fn end(&self) -> usize {
        self.end
    }

    pub fn positions(&self, var: &str) -> BTreeSet<usize> {
        self.valuation.get(var).cloned().unwrap_or_default()
    }

    pub fn valuation(&self) -> &BTreeMap<String, BTreeSet<usize>> {
        &self.valuation
    }

    /// All positions mentioned anywhere in the valuation.
    pub fn support(&self) -> BTreeSet<usize> {
        self.valuation.values().flatten().copied().collect()
    }

    pub fn with_positions(
        &self,
        var: impl Into<String>,
        positions: BTreeSet<usize>,
    ) -> PositionComplexEvent {
        let mut valuation = self.valuation.clone();
        let var = var.into();
        if positions.is_empty() {
            valuation.remove(&var);
        } else {
            valuation.insert(var, positions);
        }
        PositionComplexEvent { start: self.start, end: self.end, valuation }
    }

    /// Union: interval hull, per-variable set union.
    pub fn union(&self, other: &PositionComplexEvent) -> PositionComplexEvent {
        let mut valuation = self.valuation.clone();
        for (var, set) in &other.valuation {
            valuation
                .entry(var.clone())
                .and_modify(|s| s.extend(set.iter().copied()))
                .or_insert_with(|| set.clone());
        }
        PositionComplexEvent {
            start: self.start.min(other.start),
            end: self.end.max(other.end),
            valuation,
        }
    }

    pub fn project_vars(&self, keep: &BTreeSet<String>) -> PositionComplexEvent {
        PositionComplexEvent {
            start: self.start,
            end: self.end,
            valuation: self
                .valuation
                .iter()
                .filter(|(v, _)| keep.contains(*v))
                .map(|(v, s)| (v.clone(), s.clone()))
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Value;

    fn ev(time: u64) -> Event {
        Event::from_pairs(time, [("a", Value::Int(time as i64))])
    }

    #[test]
    fn union_takes_interval_hull() {
        let c1 = ComplexEvent::singleton(0, "X", ev(0));
        let c2 = ComplexEvent::singleton(4, "Y", ev(4));
        let u = c1.union(&c2);
        assert_eq!((u.start(), u.end()), (0, 4));
        assert_eq!(u.bag("X").len(), 1);
        assert_eq!(u.bag("Y").len(), 1);
    }

    #[test]
    fn union_with_empty_valuation_is_identity() {
        let c = ComplexEvent::singleton(1, "X", ev(1));
        let empty = ComplexEvent::new(1, 1, BTreeMap::new());
        assert_eq!(c.union(&empty), c);
    }

    #[test]
    fn self_union_duplicates_bag_members() {
        let c = ComplexEvent::singleton(1, "X", ev(1));
        assert_eq!(c.union(&c).bag("X").len(), 2);
    }

    #[test]
    fn project_composes_as_intersection() {
        let c = ComplexEvent::singleton(0, "X", ev(0)).with_bag("Y", EventBag::singleton(ev(0)));
        let l1: BTreeSet<String> = ["X".into(), "Y".into()].into();
        let l2: BTreeSet<String> = ["Y".into(), "Z".into()].into();
        let both: BTreeSet<String> = l1.intersection(&l2).cloned().collect();
        assert_eq!(c.project_vars(&l1).project_vars(&l2), c.project_vars(&both));
    }

    #[test]
    fn empty_bags_do_not_affect_equality() {
        let c1 = ComplexEvent::singleton(0, "X", ev(0));
        let c2 = c1.with_bag("Y", EventBag::empty());
        assert_eq!(c1, c2);
    }
}
