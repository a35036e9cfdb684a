//! Core data model: values, events, streams, schemas, bags of events,
//! complex events, predicates, and renamings.
//!
//! Everything here is an immutable value type with structural equality and a
//! canonical total order, so result sets can be plain ordered sets and any
//! instance can be shared across threads freely.

mod bag;
mod complex;
mod event;
mod expr;
mod predicate;
mod schema;
mod value;

pub use bag::EventBag;
pub use complex::{ComplexEvent, PositionComplexEvent};
pub use event::{Event, Renaming, TYPE_ATTR};
pub use expr::{Expression, OpKind};
pub use predicate::{bag_satisfies, CmpOp, MultisetPredicate, Predicate};
pub use schema::{validate_stream, Schema, Stream};
pub use value::Value;
