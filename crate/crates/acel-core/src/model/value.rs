//! The value domain: 64-bit integers, doubles, text, and Null.
//!
//! `Pair` is an engine-internal kind used only while folding the avg/range
//! aggregates (which accumulate (sum, count) resp. (max, min) pairs). Pairs
//! never appear in streams or query results.

use std::cmp::Ordering;
use std::fmt;

use crate::error::EvalError;

#[derive(Debug, Clone)]
pub enum Value {
    Null,
    Int(i64),
    Float(f64),
    Text(String),
    Pair(Box<Value>, Box<Value>),
}

impl Value {
    pub fn text(s: impl Into<String>) -> Value {
        Value::Text(s.into())
    }

    pub fn pair(a: Value, b: Value) -> Value {
        Value::Pair(Box::new(a), Box::new(b))
    }

    pub fn is_null(&self) -> bool {
        matches!(self, Value::Null)
    }

    /// Numeric view; promotes integers to double for mixed arithmetic.
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Value::Int(i) => Some(*i as f64),
            Value::Float(f) => Some(*f),
            _ => None,
        }
    }

    pub fn is_numeric(&self) -> bool {
        matches!(self, Value::Int(_) | Value::Float(_))
    }

    /// Semantic equality used by predicates: Null = Null holds, numbers
    /// compare by value across Int/Float, and values of different kinds are
    /// simply unequal (never an error).
    pub fn semantic_eq(&self, other: &Value) -> bool {
        match (self, other) {
            (Value::Null, Value::Null) => true,
            (Value::Text(a), Value::Text(b)) => a == b,
            (Value::Pair(a1, b1), Value::Pair(a2, b2)) => a1.semantic_eq(a2) && b1.semantic_eq(b2),
            (a, b) => match (a.as_f64(), b.as_f64()) {
                (Some(x), Some(y)) => x == y,
                _ => false,
            },
        }
    }

    /// Semantic ordering for `<`/`<=`/`>`/`>=` atoms. `None` means a Null
    /// operand (the atom is false); text and pairs are errors.
    pub fn semantic_cmp(&self, other: &Value) -> Result<Option<Ordering>, EvalError> {
        if self.is_null() || other.is_null() {
            return Ok(None);
        }
        match (self.as_f64(), other.as_f64()) {
            (Some(x), Some(y)) => Ok(x.partial_cmp(&y)),
            _ => {
                let bad = if self.is_numeric() { other } else { self };
                Err(EvalError::UnorderedValue(bad.to_string()))
            }
        }
    }

    /// Numeric addition with Int preserved when both sides are Int.
    /// Null is absorbing.
    pub fn add(&self, other: &Value) -> Result<Value, EvalError> {
        if self.is_null() || other.is_null() {
            return Ok(Value::Null);
        }
        match (self, other) {
            (Value::Int(a), Value::Int(b)) => a
                .checked_add(*b)
                .map(Value::Int)
                .ok_or(EvalError::Overflow("sum")),
            _ => match (self.as_f64(), other.as_f64()) {
                (Some(x), Some(y)) => Ok(Value::Float(x + y)),
                _ => Err(nonnum(self, other, "sum")),
            },
        }
    }

    /// Numeric subtraction (range finalizer and output expressions only).
    pub fn sub(&self, other: &Value) -> Result<Value, EvalError> {
        if self.is_null() || other.is_null() {
            return Ok(Value::Null);
        }
        match (self, other) {
            (Value::Int(a), Value::Int(b)) => a
                .checked_sub(*b)
                .map(Value::Int)
                .ok_or(EvalError::Overflow("sub")),
            _ => match (self.as_f64(), other.as_f64()) {
                (Some(x), Some(y)) => Ok(Value::Float(x - y)),
                _ => Err(nonnum(self, other, "sub")),
            },
        }
    }

    /// Division, always producing a Float (avg finalizer and output
    /// expressions only).
    pub fn div(&self, other: &Value) -> Result<Value, EvalError> {
        if self.is_null() || other.is_null() {
            return Ok(Value::Null);
        }
        match (self.as_f64(), other.as_f64()) {
            (Some(_), Some(y)) if y == 0.0 => Err(EvalError::DivisionByZero),
            (Some(x), Some(y)) => Ok(Value::Float(x / y)),
            _ => Err(nonnum(self, other, "div")),
        }
    }

    /// Binary minimum. Ties keep the left operand so folds are deterministic.
    pub fn min_of(&self, other: &Value) -> Result<Value, EvalError> {
        match self.semantic_cmp(other)? {
            None => Ok(Value::Null),
            Some(Ordering::Greater) => Ok(other.clone()),
            Some(_) => Ok(self.clone()),
        }
    }

    /// Binary maximum. Ties keep the left operand.
    pub fn max_of(&self, other: &Value) -> Result<Value, EvalError> {
        match self.semantic_cmp(other)? {
            None => Ok(Value::Null),
            Some(Ordering::Less) => Ok(other.clone()),
            Some(_) => Ok(self.clone()),
        }
    }

    fn rank(&self) -> u8 {
        match self {
            Value::Null => 0,
            Value::Int(_) => 1,
            Value::Float(_) => 2,
            Value::Text(_) => 3,
            Value::Pair(..) => 4,
        }
    }
}

fn nonnum(a: &Value, b: &Value, op: &'static str) -> EvalError {
    let bad = if a.is_numeric() { b } else { a };
    EvalError::NonNumeric(bad.to_string(), op)
}

// Structural equality and a canonical total order: used for sets, sorting,
// and deduplication, not for predicate semantics. Floats order by total_cmp
// and Int(1) != Float(1.0) here, which keeps Ord consistent with Eq.
impl PartialEq for Value {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Value {}

impl PartialOrd for Value {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Value {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Value::Int(a), Value::Int(b)) => a.cmp(b),
            (Value::Float(a), Value::Float(b)) => a.total_cmp(b),
            (Value::Text(a), Value::Text(b)) => a.cmp(b),
            (Value::Pair(a1, b1), Value::Pair(a2, b2)) => {
                a1.cmp(a2).then_with(|| b1.cmp(b2))
            }
            _ => self.rank().cmp(&other.rank()),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Null => write!(f, "null"),
            Value::Int(i) => write!(f, "{i}"),
            Value::Float(x) => write!(f, "{x:?}"),
            Value::Text(s) => write!(f, "{s:?}"),
            Value::Pair(a, b) => write!(f, "({a}, {b})"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn null_never_orders() {
        assert_eq!(Value::Null.semantic_cmp(&Value::Int(5)).unwrap(), None);
        assert_eq!(Value::Int(5).semantic_cmp(&Value::Null).unwrap(), None);
    }

    #[test]
    fn null_equality_holds_only_for_two_nulls() {
        assert!(Value::Null.semantic_eq(&Value::Null));
        assert!(!Value::Null.semantic_eq(&Value::Int(0)));
    }

    #[test]
    fn mixed_numeric_comparison_promotes() {
        assert!(Value::Int(1).semantic_eq(&Value::Float(1.0)));
        assert_eq!(
            Value::Int(1).semantic_cmp(&Value::Float(1.5)).unwrap(),
            Some(Ordering::Less)
        );
    }

    #[test]
    fn text_ordering_is_an_error() {
        assert!(Value::text("a").semantic_cmp(&Value::text("b")).is_err());
        assert!(Value::text("a").semantic_cmp(&Value::Int(1)).is_err());
    }

    #[test]
    fn arithmetic_keeps_int_when_possible() {
        assert_eq!(Value::Int(4).add(&Value::Int(2)).unwrap(), Value::Int(6));
        assert_eq!(
            Value::Int(4).add(&Value::Float(2.0)).unwrap(),
            Value::Float(6.0)
        );
        assert_eq!(Value::Int(4).add(&Value::Null).unwrap(), Value::Null);
    }

    #[test]
    fn division_always_floats() {
        assert_eq!(Value::Int(6).div(&Value::Int(2)).unwrap(), Value::Float(3.0));
        assert!(Value::Int(1).div(&Value::Int(0)).is_err());
    }
}
