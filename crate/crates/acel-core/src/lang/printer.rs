//! Formula pretty-printer. For every parser-produced AST, parsing the
//! printed text yields a structurally equal AST.

use crate::model::{MultisetPredicate, Predicate, Value};

use super::ast::{FilterExpr, FilterKind, Formula};

/// Binding strength, loosest to tightest, mirroring the grammar levels.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Level {
    Or,
    And,
    Seq,
    Contig,
    Postfix,
    Primary,
}

fn level_of(f: &Formula) -> Level {
    match f {
        Formula::Or(..) => Level::Or,
        Formula::And(..) => Level::And,
        Formula::SeqNonContig(..) | Formula::SeqContig(..) => Level::Seq,
        Formula::As(..) | Formula::Filter(..) | Formula::FilterConnective(..) => Level::Contig,
        Formula::IterNonContig(_) | Formula::IterContig(_) => Level::Postfix,
        Formula::EventType(_)
        | Formula::AnyEvent(_)
        | Formula::ProjectVars(..)
        | Formula::ProjectAttrs(..)
        | Formula::Agg(..)
        | Formula::Next(_) => Level::Primary,
    }
}

fn write_at(out: &mut String, f: &Formula, min: Level) {
    if level_of(f) < min {
        out.push('(');
        write_formula(out, f);
        out.push(')');
    } else {
        write_formula(out, f);
    }
}

fn write_formula(out: &mut String, f: &Formula) {
    match f {
        Formula::EventType(r) => out.push_str(r),
        // Diagnostic form only; the wildcard has no surface syntax.
        Formula::AnyEvent(x) => {
            out.push_str("ANY(");
            out.push_str(x);
            out.push(')');
        }
        Formula::Next(r) => {
            out.push_str("NEXT(");
            out.push_str(r);
            out.push(')');
        }
        Formula::As(inner, x) => {
            write_at(out, inner, Level::Contig);
            out.push_str(" AS ");
            out.push_str(x);
        }
        Formula::Filter(inner, x, kind) => {
            write_at(out, inner, Level::Contig);
            out.push_str(" FILTER ");
            out.push_str(x);
            out.push('[');
            write_kinds(out, std::slice::from_ref(kind));
            out.push(']');
        }
        Formula::FilterConnective(inner, fe) => {
            write_at(out, inner, Level::Contig);
            out.push_str(" FILTER ");
            // Parenthesized so AND/OR inside the filter expression cannot
            // be read as formula-level connectives.
            out.push('(');
            write_filter_expr(out, fe);
            out.push(')');
        }
        Formula::ProjectVars(inner, vars) => {
            out.push_str("PROJ[");
            push_joined(out, vars.iter().map(|s| s.as_str()));
            out.push_str("](");
            write_formula(out, inner);
            out.push(')');
        }
        Formula::ProjectAttrs(inner, x, attrs) => {
            out.push_str("PROJ ");
            out.push_str(x);
            out.push('(');
            push_joined(out, attrs.iter().map(|s| s.as_str()));
            out.push_str(")(");
            write_formula(out, inner);
            out.push(')');
        }
        Formula::Or(a, b) => {
            write_at(out, a, Level::Or);
            out.push_str(" OR ");
            write_at(out, b, Level::And);
        }
        Formula::And(a, b) => {
            write_at(out, a, Level::And);
            out.push_str(" AND ");
            write_at(out, b, Level::Seq);
        }
        Formula::SeqNonContig(a, b) => {
            write_at(out, a, Level::Seq);
            out.push_str(" ; ");
            write_at(out, b, Level::Contig);
        }
        Formula::SeqContig(a, b) => {
            write_at(out, a, Level::Seq);
            out.push_str(" : ");
            write_at(out, b, Level::Contig);
        }
        Formula::IterNonContig(inner) => {
            write_at(out, inner, Level::Primary);
            out.push('+');
        }
        Formula::IterContig(inner) => {
            write_at(out, inner, Level::Primary);
            out.push_str("(+)");
        }
        Formula::Agg(inner, y, bindings) => {
            out.push_str("AGG ");
            out.push_str(y);
            out.push('[');
            for (i, b) in bindings.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                out.push_str(&b.target);
                out.push_str(" <- ");
                out.push_str(&b.aggregate);
                out.push(' ');
                out.push_str(&b.source_var);
                out.push('(');
                out.push_str(&b.source_attr);
                out.push(')');
            }
            out.push_str("](");
            write_formula(out, inner);
            out.push(')');
        }
    }
}

fn push_joined<'a>(out: &mut String, items: impl Iterator<Item = &'a str>) {
    for (i, s) in items.enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        out.push_str(s);
    }
}

fn write_filter_expr(out: &mut String, fe: &FilterExpr) {
    match fe {
        FilterExpr::Atom(var, kinds) => {
            out.push_str(var);
            out.push('[');
            write_kinds(out, kinds);
            out.push(']');
        }
        FilterExpr::And(a, b) => {
            write_filter_operand(out, a);
            out.push_str(" AND ");
            write_filter_operand(out, b);
        }
        FilterExpr::Or(a, b) => {
            write_filter_operand(out, a);
            out.push_str(" OR ");
            write_filter_operand(out, b);
        }
    }
}

fn write_filter_operand(out: &mut String, fe: &FilterExpr) {
    if matches!(fe, FilterExpr::Atom(..)) {
        write_filter_expr(out, fe);
    } else {
        out.push('(');
        write_filter_expr(out, fe);
        out.push(')');
    }
}

fn write_kinds(out: &mut String, kinds: &[FilterKind]) {
    for (i, k) in kinds.iter().enumerate() {
        if i > 0 {
            out.push_str(" AND ");
        }
        match k {
            FilterKind::Event(p) => write_predicate(out, p),
            FilterKind::Multiset(MultisetPredicate::SameAttr(a)) => out.push_str(a),
            FilterKind::Multiset(MultisetPredicate::Increasing(a)) => {
                out.push_str("increasing(");
                out.push_str(a);
                out.push(')');
            }
            FilterKind::Multiset(MultisetPredicate::Decreasing(a)) => {
                out.push_str("decreasing(");
                out.push_str(a);
                out.push(')');
            }
        }
    }
}

fn write_predicate(out: &mut String, p: &Predicate) {
    match p {
        Predicate::True => out.push_str("TRUE"),
        Predicate::TypeIs(t) => {
            out.push_str("type = ");
            out.push_str(t);
        }
        Predicate::Not(inner) => {
            if let Predicate::TypeIs(t) = inner.as_ref() {
                out.push_str("type != ");
                out.push_str(t);
            } else {
                out.push_str("NOT ");
                write_predicate(out, inner);
            }
        }
        Predicate::AttrCmp(a, op, v) => {
            out.push_str(a);
            out.push(' ');
            out.push_str(op.symbol());
            out.push(' ');
            write_value(out, v);
        }
        Predicate::AttrAttrCmp(a, op, b) => {
            out.push_str(a);
            out.push(' ');
            out.push_str(op.symbol());
            out.push(' ');
            out.push_str(b);
        }
        Predicate::And(a, b) => {
            write_predicate(out, a);
            out.push_str(" AND ");
            write_predicate(out, b);
        }
        // OR and expression atoms never come out of the parser; printed
        // diagnostically in the general display syntax.
        Predicate::Or(..) | Predicate::ExprCmp(..) => out.push_str(&p.to_string()),
    }
}

fn write_value(out: &mut String, v: &Value) {
    out.push_str(&v.to_string());
}

/// Renders a formula as parseable query text.
pub fn format_formula(f: &Formula) -> String {
    let mut out = String::new();
    write_formula(&mut out, f);
    out
}

#[cfg(test)]
mod tests {
    use super::super::parse_query;
    use super::*;

    fn round_trip(text: &str) {
        let ast = parse_query(text).expect(text);
        let printed = format_formula(&ast);
        let reparsed = parse_query(&printed).unwrap_or_else(|e| panic!("{printed}: {e}"));
        assert_eq!(ast, reparsed, "{printed}");
    }

    #[test]
    fn round_trips() {
        for text in [
            "SELL",
            "A ; B : C+",
            "A(+) AS x FILTER x[price >= 10.5]",
            "(A OR B) AND (C ; D)",
            "PROJ[x, y]((A AS x ; B AS y) FILTER (x[a = 1] OR y[b != \"Z\"]))",
            "PROJ intel(price)(SELL AS intel)",
            "AGG M[MAX <- max intel(price), N <- count intel(price)](SELL AS intel)",
            "NEXT(BUY)",
            "A+ AS x FILTER x[price] FILTER x[increasing(volume)]",
            "A AS x FILTER x[NOT a = 1 AND b < c]",
            "A AS x FILTER x[type != SELL AND price > -3]",
        ] {
            round_trip(text);
        }
    }

    #[test]
    fn precedence_needs_no_spurious_parens() {
        let ast = parse_query("A ; B OR C").unwrap();
        assert_eq!(format_formula(&ast), "A ; B OR C");
        let ast = parse_query("(A OR B) ; C").unwrap();
        assert_eq!(format_formula(&ast), "(A OR B) ; C");
    }
}
