//! Expressions over attribute names: constants, attribute reads, and binary
//! operations drawn from the aggregate monoids.
//!
//! Transition assignments in automata use only `Add`, `Min`, `Max` (the
//! monoid operations). `Div` and `Sub` exist so emission-time output
//! assignments can apply the avg/range finalizers; the compiler never puts
//! them into a transition assignment.

use std::collections::BTreeSet;
use std::fmt;

use crate::error::EvalError;
use crate::model::{Event, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum OpKind {
    Add,
    Min,
    Max,
    Div,
    Sub,
}

impl OpKind {
    pub fn apply(self, a: &Value, b: &Value) -> Result<Value, EvalError> {
        match self {
            OpKind::Add => a.add(b),
            OpKind::Min => a.min_of(b),
            OpKind::Max => a.max_of(b),
            OpKind::Div => a.div(b),
            OpKind::Sub => a.sub(b),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            OpKind::Add => "add",
            OpKind::Min => "min",
            OpKind::Max => "max",
            OpKind::Div => "div",
            OpKind::Sub => "sub",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Expression {
    Const(Value),
    Attr(String),
    Op(OpKind, Box<Expression>, Box<Expression>),
}

impl Expression {
    pub fn attr(name: impl Into<String>) -> Expression {
        Expression::Attr(name.into())
    }

    pub fn op(kind: OpKind, a: Expression, b: Expression) -> Expression {
        Expression::Op(kind, Box::new(a), Box::new(b))
    }

    /// Attribute names the expression reads.
    pub fn attrs(&self) -> BTreeSet<&str> {
        let mut out = BTreeSet::new();
        self.collect_attrs(&mut out);
        out
    }

    fn collect_attrs<'a>(&'a self, out: &mut BTreeSet<&'a str>) {
        match self {
            Expression::Const(_) => {}
            Expression::Attr(a) => {
                out.insert(a.as_str());
            }
            Expression::Op(_, l, r) => {
                l.collect_attrs(out);
                r.collect_attrs(out);
            }
        }
    }

    /// Strict evaluation: reading an attribute the event lacks is an error
    /// (automaton transitions treat that as "not applicable").
    pub fn eval(&self, e: &Event) -> Result<Value, EvalError> {
        match self {
            Expression::Const(v) => Ok(v.clone()),
            Expression::Attr(a) => {
                if e.has_attr(a) {
                    Ok(e.get(a))
                } else {
                    Err(EvalError::UnboundAttribute(a.clone()))
                }
            }
            Expression::Op(kind, l, r) => kind.apply(&l.eval(e)?, &r.eval(e)?),
        }
    }

    /// Lenient evaluation for predicate contexts: absent attributes read as
    /// Null, matching how predicates treat events.
    pub fn eval_or_null(&self, e: &Event) -> Result<Value, EvalError> {
        match self {
            Expression::Const(v) => Ok(v.clone()),
            Expression::Attr(a) => Ok(e.get(a)),
            Expression::Op(kind, l, r) => kind.apply(&l.eval_or_null(e)?, &r.eval_or_null(e)?),
        }
    }

    /// Substitutes every attribute read through the map; attributes without
    /// an entry become Null constants (an absent attribute reads as Null).
    pub fn substitute(&self, map: &std::collections::BTreeMap<String, Expression>) -> Expression {
        match self {
            Expression::Const(v) => Expression::Const(v.clone()),
            Expression::Attr(a) => map.get(a).cloned().unwrap_or(Expression::Const(Value::Null)),
            Expression::Op(kind, l, r) => {
                Expression::op(*kind, l.substitute(map), r.substitute(map))
            }
        }
    }
}

impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expression::Const(v) => write!(f, "{v}"),
            Expression::Attr(a) => write!(f, "{a}"),
            Expression::Op(kind, l, r) => write!(f, "{}({l}, {r})", kind.name()),
        }
    }
}
