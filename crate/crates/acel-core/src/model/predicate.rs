//! Predicates over single events and over whole bags of events.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::EvalError;
use crate::model::{Event, EventBag, Expression, Value, TYPE_ATTR};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Eq => "=",
            CmpOp::Ne => "!=",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        }
    }

    /// Comparison semantics: equality holds for two Nulls and across numeric
    /// kinds; `!=` is its negation; ordering with any Null operand is false,
    /// ordering text is an error.
    pub fn compare(self, a: &Value, b: &Value) -> Result<bool, EvalError> {
        use std::cmp::Ordering::*;
        match self {
            CmpOp::Eq => Ok(a.semantic_eq(b)),
            CmpOp::Ne => Ok(!a.semantic_eq(b)),
            CmpOp::Lt => Ok(a.semantic_cmp(b)? == Some(Less)),
            CmpOp::Le => Ok(matches!(a.semantic_cmp(b)?, Some(Less | Equal))),
            CmpOp::Gt => Ok(a.semantic_cmp(b)? == Some(Greater)),
            CmpOp::Ge => Ok(matches!(a.semantic_cmp(b)?, Some(Greater | Equal))),
        }
    }
}

/// A per-event predicate. `ExprCmp` is produced only by the compiler when it
/// rewrites a filter over output attributes into a test over registers; the
/// parser emits the other atoms.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Predicate {
    True,
    TypeIs(String),
    AttrCmp(String, CmpOp, Value),
    AttrAttrCmp(String, CmpOp, String),
    ExprCmp(Expression, CmpOp, Expression),
    And(Box<Predicate>, Box<Predicate>),
    Or(Box<Predicate>, Box<Predicate>),
    Not(Box<Predicate>),
}

impl Predicate {
    pub fn and(a: Predicate, b: Predicate) -> Predicate {
        match (a, b) {
            (Predicate::True, x) | (x, Predicate::True) => x,
            (a, b) => Predicate::And(Box::new(a), Box::new(b)),
        }
    }

    pub fn or(a: Predicate, b: Predicate) -> Predicate {
        Predicate::Or(Box::new(a), Box::new(b))
    }

    pub fn not(p: Predicate) -> Predicate {
        Predicate::Not(Box::new(p))
    }

    pub fn eval(&self, e: &Event) -> Result<bool, EvalError> {
        match self {
            Predicate::True => Ok(true),
            Predicate::TypeIs(t) => CmpOp::Eq.compare(&e.get(TYPE_ATTR), &Value::text(t.clone())),
            Predicate::AttrCmp(a, op, v) => op.compare(&e.get(a), v),
            Predicate::AttrAttrCmp(a, op, b) => op.compare(&e.get(a), &e.get(b)),
            Predicate::ExprCmp(l, op, r) => op.compare(&l.eval_or_null(e)?, &r.eval_or_null(e)?),
            Predicate::And(l, r) => Ok(l.eval(e)? && r.eval(e)?),
            Predicate::Or(l, r) => Ok(l.eval(e)? || r.eval(e)?),
            Predicate::Not(p) => Ok(!p.eval(e)?),
        }
    }

    /// Rewrites a predicate over output-event attributes into one over the
    /// registers that produce those attributes. `map` gives, per output
    /// attribute, the register expression it is emitted from; attributes the
    /// output does not carry read as Null on the emitted event, hence the
    /// Null-constant fallback.
    pub fn substitute(&self, map: &BTreeMap<String, Expression>) -> Predicate {
        let lookup = |attr: &str| -> Expression {
            map.get(attr).cloned().unwrap_or(Expression::Const(Value::Null))
        };
        match self {
            Predicate::True => Predicate::True,
            Predicate::TypeIs(t) => Predicate::ExprCmp(
                lookup(TYPE_ATTR),
                CmpOp::Eq,
                Expression::Const(Value::text(t.clone())),
            ),
            Predicate::AttrCmp(a, op, v) => {
                Predicate::ExprCmp(lookup(a), *op, Expression::Const(v.clone()))
            }
            Predicate::AttrAttrCmp(a, op, b) => Predicate::ExprCmp(lookup(a), *op, lookup(b)),
            Predicate::ExprCmp(l, op, r) => {
                Predicate::ExprCmp(l.substitute(map), *op, r.substitute(map))
            }
            Predicate::And(l, r) => Predicate::and(l.substitute(map), r.substitute(map)),
            Predicate::Or(l, r) => Predicate::or(l.substitute(map), r.substitute(map)),
            Predicate::Not(p) => Predicate::not(p.substitute(map)),
        }
    }
}

impl fmt::Display for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Predicate::True => write!(f, "TRUE"),
            Predicate::TypeIs(t) => write!(f, "type = {t}"),
            Predicate::AttrCmp(a, op, v) => write!(f, "{a} {} {v}", op.symbol()),
            Predicate::AttrAttrCmp(a, op, b) => write!(f, "{a} {} {b}", op.symbol()),
            Predicate::ExprCmp(l, op, r) => write!(f, "{l} {} {r}", op.symbol()),
            Predicate::And(l, r) => write!(f, "({l} AND {r})"),
            Predicate::Or(l, r) => write!(f, "({l} OR {r})"),
            Predicate::Not(p) => write!(f, "NOT ({p})"),
        }
    }
}

/// Evaluates a per-event predicate over every member of a bag; the empty bag
/// satisfies everything.
pub fn bag_satisfies(bag: &EventBag, p: &Predicate) -> Result<bool, EvalError> {
    for e in bag.iter() {
        if !p.eval(e)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// A predicate over a whole bag rather than over single events.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum MultisetPredicate {
    /// `[a]`: every pair of members agrees on attribute `a`.
    SameAttr(String),
    /// Attribute `a` strictly increases along the time-successor chain.
    Increasing(String),
    /// Attribute `a` strictly decreases along the time-successor chain.
    Decreasing(String),
}

impl MultisetPredicate {
    pub fn attr(&self) -> &str {
        match self {
            MultisetPredicate::SameAttr(a)
            | MultisetPredicate::Increasing(a)
            | MultisetPredicate::Decreasing(a) => a,
        }
    }

    /// Never errors: comparisons that are undefined (Null values, text under
    /// an ordering) simply make the predicate false.
    pub fn eval(&self, bag: &EventBag) -> bool {
        if bag.len() <= 1 {
            return true;
        }
        match self {
            MultisetPredicate::SameAttr(a) => {
                let mut values = bag.iter().map(|e| e.get(a));
                let first = values.next().expect("non-empty bag");
                if first.is_null() {
                    return false;
                }
                values.all(|v| !v.is_null() && v.semantic_eq(&first))
            }
            MultisetPredicate::Increasing(a) => successor_pairs_hold(bag, a, std::cmp::Ordering::Less),
            MultisetPredicate::Decreasing(a) => {
                successor_pairs_hold(bag, a, std::cmp::Ordering::Greater)
            }
        }
    }
}

impl fmt::Display for MultisetPredicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MultisetPredicate::SameAttr(a) => write!(f, "[{a}]"),
            MultisetPredicate::Increasing(a) => write!(f, "increasing({a})"),
            MultisetPredicate::Decreasing(a) => write!(f, "decreasing({a})"),
        }
    }
}

/// Checks `e1(a) cmp e2(a)` for every time-successor pair: e2 succeeds e1
/// when e1 is strictly earlier and no member lies strictly between them.
/// Members sharing a time form no successor pair with each other.
fn successor_pairs_hold(bag: &EventBag, attr: &str, want: std::cmp::Ordering) -> bool {
    let mut events: Vec<&Event> = bag.iter().collect();
    events.sort_by_key(|e| e.time());
    let mut groups: Vec<Vec<&Event>> = Vec::new();
    for e in events {
        match groups.last_mut() {
            Some(g) if g[0].time() == e.time() => g.push(e),
            _ => groups.push(vec![e]),
        }
    }
    for window in groups.windows(2) {
        for e1 in &window[0] {
            for e2 in &window[1] {
                match e1.get(attr).semantic_cmp(&e2.get(attr)) {
                    Ok(Some(ord)) if ord == want => {}
                    _ => return false,
                }
            }
        }
    }
    true
}
