//! Rewrites surface sugar into core constructors.
//!
//! Filter connectives: `φ FILTER (A AND B)` becomes `(φ FILTER A) FILTER B`
//! and `φ FILTER (A OR B)` becomes `(φ FILTER A) OR (φ FILTER B)`.
//!
//! `NEXT(R)` expands to `PROJ[R]((X+ : R) FILTER X[type != R]) OR R` with a
//! fresh wildcard variable X, selecting an R event while discarding the
//! events in between.

use super::ast::{FilterExpr, Formula};
use crate::model::Predicate;

/// Rewrites a formula into core constructors. The result satisfies
/// `is_core()` and desugaring again returns it unchanged.
pub fn desugar(f: &Formula) -> Formula {
    let mut fresh = 0usize;
    rewrite(f, &mut fresh)
}

fn rewrite(f: &Formula, fresh: &mut usize) -> Formula {
    match f {
        Formula::EventType(_) | Formula::AnyEvent(_) => f.clone(),
        Formula::Next(r) => {
            let x = fresh_var(fresh);
            let skipped = Formula::AnyEvent(x.clone())
                .iterate()
                .then_contig(Formula::EventType(r.clone()))
                .filter(
                    x,
                    super::ast::FilterKind::Event(Predicate::not(Predicate::TypeIs(r.clone()))),
                );
            let first = Formula::ProjectVars(
                Box::new(skipped),
                std::iter::once(r.clone()).collect(),
            );
            first.or(Formula::EventType(r.clone()))
        }
        Formula::As(inner, x) => rewrite(inner, fresh).as_var(x.clone()),
        Formula::Filter(inner, x, kind) => rewrite(inner, fresh).filter(x.clone(), kind.clone()),
        Formula::FilterConnective(inner, fe) => {
            let core = rewrite(inner, fresh);
            apply_filter_expr(core, fe)
        }
        Formula::ProjectVars(inner, vars) => {
            Formula::ProjectVars(Box::new(rewrite(inner, fresh)), vars.clone())
        }
        Formula::ProjectAttrs(inner, x, attrs) => {
            Formula::ProjectAttrs(Box::new(rewrite(inner, fresh)), x.clone(), attrs.clone())
        }
        Formula::Or(a, b) => rewrite(a, fresh).or(rewrite(b, fresh)),
        Formula::And(a, b) => rewrite(a, fresh).and(rewrite(b, fresh)),
        Formula::SeqNonContig(a, b) => rewrite(a, fresh).then(rewrite(b, fresh)),
        Formula::SeqContig(a, b) => rewrite(a, fresh).then_contig(rewrite(b, fresh)),
        Formula::IterNonContig(inner) => rewrite(inner, fresh).iterate(),
        Formula::IterContig(inner) => rewrite(inner, fresh).iterate_contig(),
        Formula::Agg(inner, y, bindings) => Formula::Agg(
            Box::new(rewrite(inner, fresh)),
            y.clone(),
            bindings.clone(),
        ),
    }
}

fn apply_filter_expr(core: Formula, fe: &FilterExpr) -> Formula {
    match fe {
        FilterExpr::Atom(var, kinds) => kinds
            .iter()
            .fold(core, |acc, k| acc.filter(var.clone(), k.clone())),
        FilterExpr::And(a, b) => apply_filter_expr(apply_filter_expr(core, a), b),
        FilterExpr::Or(a, b) => {
            apply_filter_expr(core.clone(), a).or(apply_filter_expr(core, b))
        }
    }
}

fn fresh_var(fresh: &mut usize) -> String {
    let name = format!("$n{fresh}");
    *fresh += 1;
    name
}

#[cfg(test)]
mod tests {
    use super::super::parse_query;
    use super::*;
    use crate::model::{CmpOp, Value};

    #[test]
    fn core_formula_is_unchanged() {
        let f = parse_query("(SELL AS x ; BUY AS y) FILTER x[price > 100]").unwrap();
        assert!(f.is_core());
        assert_eq!(desugar(&f), f);
    }

    #[test]
    fn filter_conjunction_nests() {
        let f = parse_query("(A AS x ; B AS y) FILTER (x[a = 1] AND y[b = 2])").unwrap();
        let d = desugar(&f);
        assert!(d.is_core());
        let Formula::Filter(inner, y, _) = &d else { panic!("{d}") };
        assert_eq!(y, "y");
        assert!(matches!(inner.as_ref(), Formula::Filter(_, x, _) if x == "x"));
    }

    #[test]
    fn filter_disjunction_duplicates_the_body() {
        let f = parse_query("A AS x FILTER (x[a = 1] OR x[a = 2])").unwrap();
        let d = desugar(&f);
        let Formula::Or(l, r) = &d else { panic!("{d}") };
        assert!(matches!(l.as_ref(), Formula::Filter(..)));
        assert!(matches!(r.as_ref(), Formula::Filter(..)));
    }

    #[test]
    fn next_expands_to_first_event_selection() {
        let d = desugar(&parse_query("NEXT(BUY)").unwrap());
        assert!(d.is_core());
        let Formula::Or(l, r) = &d else { panic!("{d}") };
        assert_eq!(r.as_ref(), &Formula::EventType("BUY".into()));
        let Formula::ProjectVars(body, vars) = l.as_ref() else { panic!("{d}") };
        assert_eq!(vars.iter().collect::<Vec<_>>(), vec!["BUY"]);
        let Formula::Filter(seq, x, _) = body.as_ref() else { panic!("{d}") };
        assert_eq!(x, "$n0");
        let Formula::SeqContig(iter, ev) = seq.as_ref() else { panic!("{d}") };
        assert_eq!(iter.as_ref(), &Formula::AnyEvent("$n0".into()).iterate());
        assert_eq!(ev.as_ref(), &Formula::EventType("BUY".into()));
    }

    #[test]
    fn desugar_is_idempotent() {
        for text in [
            "NEXT(BUY) ; NEXT(SELL)",
            "(A AS x ; B AS y) FILTER (x[a = 1] OR (y[b = 2] AND x[c < 3]))",
            "A+ AS x FILTER (x[increasing(a)] AND x[b = 1])",
        ] {
            let once = desugar(&parse_query(text).unwrap());
            assert!(once.is_core(), "{text}");
            assert_eq!(desugar(&once), once, "{text}");
        }
    }

    #[test]
    fn multi_kind_atom_folds_in_order() {
        let f = parse_query("A+ AS x FILTER (x[b = 1 AND increasing(a)])").unwrap();
        let d = desugar(&f);
        let Formula::Filter(inner, _, outer_kind) = &d else { panic!("{d}") };
        assert!(matches!(outer_kind, super::super::ast::FilterKind::Multiset(_)));
        let Formula::Filter(_, _, inner_kind) = inner.as_ref() else { panic!("{d}") };
        let super::super::ast::FilterKind::Event(Predicate::AttrCmp(a, op, v)) = inner_kind
        else {
            panic!("{d}")
        };
        assert_eq!((a.as_str(), *op, v.clone()), ("b", CmpOp::Eq, Value::Int(1)));
    }
}
