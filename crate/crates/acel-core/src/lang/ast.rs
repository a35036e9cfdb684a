//! Abstract syntax of ACEL formulas.

use std::collections::BTreeSet;
use std::fmt;

use crate::model::{MultisetPredicate, Predicate};

/// One aggregate binding `target <- agg source_var(source_attr)` inside an
/// AGG head.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct AggBinding {
    pub target: String,
    pub aggregate: String,
    pub source_var: String,
    pub source_attr: String,
}

/// A single filter payload: either an ordinary per-event predicate or a
/// whole-bag multiset predicate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FilterKind {
    Event(Predicate),
    Multiset(MultisetPredicate),
}

/// A filter expression as written after FILTER: variable/payload atoms
/// combined with AND and OR. Desugaring rewrites these trees into nested
/// core filters (AND) and formula-level OR.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FilterExpr {
    /// `X[p1 AND p2 AND …]` in normal form: any per-event atoms folded into
    /// one leading Event predicate, multiset atoms following in source
    /// order.
    Atom(String, Vec<FilterKind>),
    And(Box<FilterExpr>, Box<FilterExpr>),
    Or(Box<FilterExpr>, Box<FilterExpr>),
}

/// An ACEL formula. Core constructors evaluate directly; `FilterConnective`
/// and `Next` are surface sugar removed by desugaring. `AnyEvent` is a
/// wildcard base case (matches one event of any type, binding it to a
/// variable); it only arises from desugaring NEXT and cannot be written in
/// query text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Formula {
    EventType(String),
    AnyEvent(String),
    As(Box<Formula>, String),
    Filter(Box<Formula>, String, FilterKind),
    FilterConnective(Box<Formula>, FilterExpr),
    ProjectVars(Box<Formula>, BTreeSet<String>),
    ProjectAttrs(Box<Formula>, String, BTreeSet<String>),
    Or(Box<Formula>, Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    SeqNonContig(Box<Formula>, Box<Formula>),
    SeqContig(Box<Formula>, Box<Formula>),
    IterNonContig(Box<Formula>),
    IterContig(Box<Formula>),
    Agg(Box<Formula>, String, Vec<AggBinding>),
    Next(String),
}

impl Formula {
    pub fn as_var(self, var: impl Into<String>) -> Formula {
        Formula::As(Box::new(self), var.into())
    }

    pub fn filter(self, var: impl Into<String>, kind: FilterKind) -> Formula {
        Formula::Filter(Box::new(self), var.into(), kind)
    }

    pub fn or(self, other: Formula) -> Formula {
        Formula::Or(Box::new(self), Box::new(other))
    }

    pub fn and(self, other: Formula) -> Formula {
        Formula::And(Box::new(self), Box::new(other))
    }

    pub fn then(self, other: Formula) -> Formula {
        Formula::SeqNonContig(Box::new(self), Box::new(other))
    }

    pub fn then_contig(self, other: Formula) -> Formula {
        Formula::SeqContig(Box::new(self), Box::new(other))
    }

    pub fn iterate(self) -> Formula {
        Formula::IterNonContig(Box::new(self))
    }

    pub fn iterate_contig(self) -> Formula {
        Formula::IterContig(Box::new(self))
    }

    /// True when the formula contains only core constructors, i.e. no
    /// filter connectives and no NEXT.
    pub fn is_core(&self) -> bool {
        match self {
            Formula::EventType(_) | Formula::AnyEvent(_) => true,
            Formula::FilterConnective(..) | Formula::Next(_) => false,
            Formula::As(f, _)
            | Formula::Filter(f, _, _)
            | Formula::ProjectVars(f, _)
            | Formula::ProjectAttrs(f, _, _)
            | Formula::IterNonContig(f)
            | Formula::IterContig(f)
            | Formula::Agg(f, _, _) => f.is_core(),
            Formula::Or(a, b)
            | Formula::And(a, b)
            | Formula::SeqNonContig(a, b)
            | Formula::SeqContig(a, b) => a.is_core() && b.is_core(),
        }
    }

    /// All variables the formula can bind or mention: event types used as
    /// variables, AS targets, filter and projection subjects, and Agg
    /// targets and sources.
    pub fn variables(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_variables(&mut out);
        out
    }

    fn collect_variables(&self, out: &mut BTreeSet<String>) {
        match self {
            Formula::EventType(r) | Formula::AnyEvent(r) | Formula::Next(r) => {
                out.insert(r.clone());
            }
            Formula::As(f, x) => {
                out.insert(x.clone());
                f.collect_variables(out);
            }
            Formula::Filter(f, x, _) => {
                out.insert(x.clone());
                f.collect_variables(out);
            }
            Formula::FilterConnective(f, fe) => {
                fe.collect_variables(out);
                f.collect_variables(out);
            }
            Formula::ProjectVars(f, vars) => {
                out.extend(vars.iter().cloned());
                f.collect_variables(out);
            }
            Formula::ProjectAttrs(f, x, _) => {
                out.insert(x.clone());
                f.collect_variables(out);
            }
            Formula::Or(a, b)
            | Formula::And(a, b)
            | Formula::SeqNonContig(a, b)
            | Formula::SeqContig(a, b) => {
                a.collect_variables(out);
                b.collect_variables(out);
            }
            Formula::IterNonContig(f) | Formula::IterContig(f) => f.collect_variables(out),
            Formula::Agg(f, y, bindings) => {
                out.insert(y.clone());
                for b in bindings {
                    out.insert(b.source_var.clone());
                }
                f.collect_variables(out);
            }
        }
    }
}

impl FilterExpr {
    fn collect_variables(&self, out: &mut BTreeSet<String>) {
        match self {
            FilterExpr::Atom(x, _) => {
                out.insert(x.clone());
            }
            FilterExpr::And(a, b) | FilterExpr::Or(a, b) => {
                a.collect_variables(out);
                b.collect_variables(out);
            }
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&super::format_formula(self))
    }
}
