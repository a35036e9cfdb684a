//! Error types shared across the engine.

use thiserror::Error;

/// Runtime failures while evaluating predicates, expressions, or aggregates.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    /// Ordering comparison (`<`, `<=`, `>`, `>=`) applied to text or to a
    /// text/number mix. Equality over mixed kinds is fine (it is false);
    /// ordering text is rejected rather than given an arbitrary meaning.
    #[error("ordering comparison is not defined for value {0}")]
    UnorderedValue(String),

    /// Aggregation or arithmetic over a value outside the operation's carrier.
    #[error("non-numeric value {0} in {1}")]
    NonNumeric(String, &'static str),

    /// Integer arithmetic left i64 range.
    #[error("integer overflow in {0}")]
    Overflow(&'static str),

    /// avg over an empty bag: the pair fold yields count 0.
    #[error("division by zero (avg over an empty bag?)")]
    DivisionByZero,

    /// An output renaming sends two attributes with different values to the
    /// same name.
    #[error("renaming maps attributes with different values to {0}")]
    InconsistentRenaming(String),

    /// Expression read an attribute missing from the event, in a context
    /// where absent attributes are not read as Null.
    #[error("unbound attribute {0}")]
    UnboundAttribute(String),

    /// Unknown aggregate function name in a query.
    #[error("unknown aggregate function {0}")]
    UnknownAggregate(String),

    /// The operation only supports a fragment of the language and the
    /// formula fell outside it (e.g. position semantics over an aggregate).
    #[error("unsupported formula for this engine: {0}")]
    UnsupportedFragment(String),
}

/// Syntax error with source position.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("parse error at line {line}, column {column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

/// Failures of the formula-to-automaton translation.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CompileError {
    /// Multiset filters ([a], increasing, decreasing) have no automaton
    /// construction; they run on the interpreter only.
    #[error("multiset predicate {0} is not supported by the compiler")]
    UnsupportedMultisetPredicate(String),

    #[error("unknown aggregate function {0}")]
    UnknownAggregate(String),

    /// Compiling expects a desugared formula; sugar constructors are a bug
    /// in the calling pipeline, not in the query.
    #[error("formula contains sugar constructor {0}; desugar before compiling")]
    SugarNotDesugared(&'static str),
}

/// A stream event that does not satisfy the schema.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("stream violation at event {index}: {reason}")]
pub struct StreamViolation {
    pub index: usize,
    pub reason: String,
}
