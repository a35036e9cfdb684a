//! The ACEL query language: abstract syntax, the concrete text syntax
//! (parser and printer), and desugaring of the convenience forms (NEXT,
//! filter connectives) into core constructors.

mod ast;
mod desugar;
mod parser;
mod printer;

pub use ast::{AggBinding, FilterExpr, FilterKind, Formula};
pub use desugar::desugar;
pub use parser::parse_query;
pub use printer::format_formula;
