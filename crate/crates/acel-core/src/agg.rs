//! Commutative-monoid aggregate functions.
//!
//! sum, min, and max are monoid folds directly. count, avg, and range are
//! decomposable: each element is first mapped (count to 1, avg to a
//! (value, 1) pair, range to a (value, value) pair), the mapped values are
//! folded with a monoid, and a constant-time finalizer produces the result
//! (identity, sum/count division, max-min subtraction). The decomposition is
//! what lets the compiler maintain aggregates in automaton registers while
//! the interpreter folds whole bags: both must agree exactly.
//!
//! Null is absorbing everywhere: a bag containing Null aggregates to Null.
//! The empty bag yields the monoid identity (avg's finalizer then fails with
//! division by zero).

use std::fmt;

use crate::error::EvalError;
use crate::model::Value;

/// A commutative monoid over values: identity element plus an associative,
/// commutative, Null-absorbing binary operation.
#[derive(Clone)]
pub struct Monoid {
    pub name: &'static str,
    identity: Value,
    combine: fn(&Value, &Value) -> Result<Value, EvalError>,
}

impl Monoid {
    pub fn identity(&self) -> Value {
        self.identity.clone()
    }

    pub fn combine(&self, a: &Value, b: &Value) -> Result<Value, EvalError> {
        (self.combine)(a, b)
    }

    pub fn sum() -> Monoid {
        Monoid { name: "sum", identity: Value::Int(0), combine: |a, b| a.add(b) }
    }

    /// Identity is +inf so the empty fold is defined for arbitrary numeric
    /// data, not just naturals.
    pub fn min() -> Monoid {
        Monoid {
            name: "min",
            identity: Value::Float(f64::INFINITY),
            combine: |a, b| a.min_of(b),
        }
    }

    pub fn max() -> Monoid {
        Monoid {
            name: "max",
            identity: Value::Float(f64::NEG_INFINITY),
            combine: |a, b| a.max_of(b),
        }
    }

    /// Component-wise sum over pairs; backs avg's (sum, count) fold.
    pub fn pair_sum() -> Monoid {
        Monoid {
            name: "pair_sum",
            identity: Value::pair(Value::Int(0), Value::Int(0)),
            combine: combine_pair_sum,
        }
    }

    /// (max, min) component-wise; backs range's fold.
    pub fn pair_max_min() -> Monoid {
        Monoid {
            name: "pair_max_min",
            identity: Value::pair(Value::Float(f64::NEG_INFINITY), Value::Float(f64::INFINITY)),
            combine: combine_pair_max_min,
        }
    }
}

fn combine_pair_sum(a: &Value, b: &Value) -> Result<Value, EvalError> {
    match (a, b) {
        (Value::Null, _) | (_, Value::Null) => Ok(Value::Null),
        (Value::Pair(a1, a2), Value::Pair(b1, b2)) => {
            Ok(Value::pair(a1.add(b1)?, a2.add(b2)?))
        }
        _ => Err(EvalError::NonNumeric(a.to_string(), "pair_sum")),
    }
}

fn combine_pair_max_min(a: &Value, b: &Value) -> Result<Value, EvalError> {
    match (a, b) {
        (Value::Null, _) | (_, Value::Null) => Ok(Value::Null),
        (Value::Pair(a1, a2), Value::Pair(b1, b2)) => {
            Ok(Value::pair(a1.max_of(b1)?, a2.min_of(b2)?))
        }
        _ => Err(EvalError::NonNumeric(a.to_string(), "pair_max_min")),
    }
}

impl fmt::Debug for Monoid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Monoid({})", self.name)
    }
}

/// Folds a monoid over a sequence of values; the empty sequence yields the
/// identity.
pub fn monoid_fold<'a, I>(m: &Monoid, values: I) -> Result<Value, EvalError>
where
    I: IntoIterator<Item = &'a Value>,
{
    let mut acc = m.identity();
    for v in values {
        acc = m.combine(&acc, v)?;
    }
    Ok(acc)
}

/// How an aggregate decomposes.
#[derive(Debug, Clone)]
pub enum AggKind {
    /// The aggregate is the monoid fold itself (sum, min, max).
    SelfDecomposable(Monoid),
    /// f = finalize ∘ fold(h) ∘ map(per_element) (count, avg, range).
    Decomposable {
        per_element: fn(&Value) -> Value,
        h: Monoid,
        finalize: fn(&Value) -> Result<Value, EvalError>,
    },
}

#[derive(Debug, Clone)]
pub struct AggregateFunction {
    pub name: &'static str,
    pub kind: AggKind,
}

/// Looks up a built-in aggregate by (case-insensitive) name.
pub fn lookup(name: &str) -> Option<AggregateFunction> {
    let (name, kind) = match name.to_ascii_lowercase().as_str() {
        "sum" => ("sum", AggKind::SelfDecomposable(Monoid::sum())),
        "min" => ("min", AggKind::SelfDecomposable(Monoid::min())),
        "max" => ("max", AggKind::SelfDecomposable(Monoid::max())),
        "count" => ("count", AggKind::Decomposable {
            per_element: |v| if v.is_null() { Value::Null } else { Value::Int(1) },
            h: Monoid::sum(),
            finalize: |v| Ok(v.clone()),
        }),
        "avg" => ("avg", AggKind::Decomposable {
            per_element: |v| {
                if v.is_null() {
                    Value::Null
                } else {
                    Value::pair(v.clone(), Value::Int(1))
                }
            },
            h: Monoid::pair_sum(),
            finalize: |v| match v {
                Value::Null => Ok(Value::Null),
                Value::Pair(s, c) => s.div(c),
                other => Err(EvalError::NonNumeric(other.to_string(), "avg")),
            },
        }),
        "range" => ("range", AggKind::Decomposable {
            per_element: |v| {
                if v.is_null() {
                    Value::Null
                } else {
                    Value::pair(v.clone(), v.clone())
                }
            },
            h: Monoid::pair_max_min(),
            finalize: |v| match v {
                Value::Null => Ok(Value::Null),
                Value::Pair(hi, lo) => hi.sub(lo),
                other => Err(EvalError::NonNumeric(other.to_string(), "range")),
            },
        }),
        _ => return None,
    };
    Some(AggregateFunction { name, kind })
}

/// Applies an aggregate to a bag of values.
pub fn aggregate_apply<'a, I>(f: &AggregateFunction, values: I) -> Result<Value, EvalError>
where
    I: IntoIterator<Item = &'a Value>,
{
    match &f.kind {
        AggKind::SelfDecomposable(m) => monoid_fold(m, values),
        AggKind::Decomposable { per_element, h, finalize } => {
            let mapped: Vec<Value> = values.into_iter().map(per_element).collect();
            let folded = monoid_fold(h, mapped.iter())?;
            finalize(&folded)
        }
    }
}
