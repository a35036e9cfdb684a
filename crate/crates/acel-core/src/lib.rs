//! ACEL complex-event query engine.
//!
//! ACEL is a query language for complex event recognition: it matches
//! patterns of events over a finite stream (sequencing, iteration, filters,
//! projection) and can aggregate attribute values of the matched events with
//! commutative-monoid aggregates (sum, count, min, max, avg, range).
//!
//! The crate provides two independent execution engines plus a compiler
//! connecting them:
//!
//! * [`interp`] — a reference interpreter that implements the denotational
//!   semantics directly by exhaustive enumeration. Slow, but simple enough
//!   to audit; it is the ground truth for everything else.
//! * [`machine`] — aggregation complex event automata (ACEA): register
//!   automata whose transitions assign register values, test predicates over
//!   registers, and emit output events through renamings. Also the simpler
//!   position-marking automata (CEA) they generalize.
//! * [`compile`] — the structural translation from ACEL formulas to ACEA,
//!   and the embedding of CEA into ACEA.
//!
//! The two engines are meant to be run against each other: for every
//! supported query, `interp::evaluate` and `machine::enumerate(compile(..))`
//! must produce identical result sets.

pub mod agg;
pub mod compile;
pub mod error;
pub mod interp;
pub mod io;
pub mod lang;
pub mod machine;
pub mod model;

pub use error::{CompileError, EvalError, ParseError, StreamViolation};
pub use model::{ComplexEvent, Event, EventBag, Schema, Stream, Value};
