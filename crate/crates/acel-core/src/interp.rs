//! Reference interpreter.
//!
//! `evaluate` implements the denotational semantics of core ACEL by
//! exhaustive enumeration: each constructor is computed literally over full
//! result sets, with iteration as a bounded fixpoint. It is exponential and
//! meant purely as ground truth for the automaton engine.
//!
//! `evaluate_positions` implements the older position-based semantics for
//! the plain CEL fragment (no aggregation, no attribute projection, no
//! multiset filters); `positions_to_events` maps its results into the
//! event-based world so the two semantics can be compared directly.

use std::collections::BTreeSet;

use crate::agg;
use crate::error::EvalError;
use crate::lang::{FilterKind, Formula};
use crate::model::{
    bag_satisfies, ComplexEvent, EventBag, PositionComplexEvent, Stream, Value,
};

/// A deduplicated set of complex events in canonical order.
pub type ResultSet = BTreeSet<ComplexEvent>;

/// The position-based counterpart of [`ResultSet`].
pub type PositionResultSet = BTreeSet<PositionComplexEvent>;

/// Evaluates a core formula over a stream, returning every complex event it
/// denotes.
pub fn evaluate(f: &Formula, s: &Stream) -> Result<ResultSet, EvalError> {
    match f {
        Formula::EventType(r) => Ok(s
            .iter()
            .filter(|(_, e)| e.event_type() == Some(r.as_str()))
            .map(|(i, e)| ComplexEvent::singleton(i, r.clone(), e.clone()))
            .collect()),
        Formula::AnyEvent(x) => Ok(s
            .iter()
            .map(|(i, e)| ComplexEvent::singleton(i, x.clone(), e.clone()))
            .collect()),
        Formula::As(inner, x) => {
            let mut out = ResultSet::new();
            for c in evaluate(inner, s)? {
                let mut all = EventBag::empty();
                for var in c.vars().map(str::to_string).collect::<Vec<_>>() {
                    all = all.union(&c.bag(&var));
                }
                out.insert(c.with_bag(x.clone(), all));
            }
            Ok(out)
        }
        Formula::Filter(inner, x, kind) => {
            let mut out = ResultSet::new();
            for c in evaluate(inner, s)? {
                if filter_accepts(&c, x, kind) {
                    out.insert(c);
                }
            }
            Ok(out)
        }
        Formula::ProjectVars(inner, keep) => {
            Ok(evaluate(inner, s)?.iter().map(|c| c.project_vars(keep)).collect())
        }
        Formula::ProjectAttrs(inner, x, attrs) => {
            let mut out = ResultSet::new();
            for c in evaluate(inner, s)? {
                if c.valuation().contains_key(x) {
                    let projected = c.bag(x).map(|e| e.project_attrs(attrs));
                    out.insert(c.with_bag(x.clone(), projected));
                } else {
                    out.insert(c);
                }
            }
            Ok(out)
        }
        Formula::Or(a, b) => {
            let mut out = evaluate(a, s)?;
            out.extend(evaluate(b, s)?);
            Ok(out)
        }
        Formula::And(a, b) => {
            let left = evaluate(a, s)?;
            let right = evaluate(b, s)?;
            Ok(left.intersection(&right).cloned().collect())
        }
        Formula::SeqNonContig(a, b) => {
            Ok(join(&evaluate(a, s)?, &evaluate(b, s)?, false))
        }
        Formula::SeqContig(a, b) => Ok(join(&evaluate(a, s)?, &evaluate(b, s)?, true)),
        Formula::IterNonContig(inner) => Ok(iterate(&evaluate(inner, s)?, false)),
        Formula::IterContig(inner) => Ok(iterate(&evaluate(inner, s)?, true)),
        Formula::Agg(inner, y, bindings) => {
            let mut out = ResultSet::new();
            for c in evaluate(inner, s)? {
                let mut attrs = std::collections::BTreeMap::new();
                for b in bindings {
                    let f = agg::lookup(&b.aggregate)
                        .ok_or_else(|| EvalError::UnknownAggregate(b.aggregate.clone()))?;
                    let values: Vec<Value> =
                        c.bag(&b.source_var).iter().map(|e| e.get(&b.source_attr)).collect();
                    attrs.insert(b.target.clone(), agg::aggregate_apply(&f, values.iter())?);
                }
                let e = crate::model::Event::new(c.end() as u64, attrs);
                let mut bag = c.bag(y);
                bag.insert(e);
                out.insert(c.with_bag(y.clone(), bag));
            }
            Ok(out)
        }
        Formula::FilterConnective(..) | Formula::Next(_) => Err(EvalError::UnsupportedFragment(
            "sugared formula; desugar before evaluating".into(),
        )),
    }
}

/// Predicate failures (including evaluation errors such as ordering text)
/// reject the candidate rather than aborting, mirroring how the automaton
/// engine treats an inapplicable transition.
fn filter_accepts(c: &ComplexEvent, var: &str, kind: &FilterKind) -> bool {
    let bag = c.bag(var);
    match kind {
        FilterKind::Event(p) => bag_satisfies(&bag, p).unwrap_or(false),
        FilterKind::Multiset(m) => m.eval(&bag),
    }
}

fn joinable(end: usize, start: usize, contiguous: bool) -> bool {
    if contiguous {
        end + 1 == start
    } else {
        end < start
    }
}

fn join(left: &ResultSet, right: &ResultSet, contiguous: bool) -> ResultSet {
    let mut out = ResultSet::new();
    for c1 in left {
        for c2 in right {
            if joinable(c1.end(), c2.start(), contiguous) {
                out.insert(c1.union(c2));
            }
        }
    }
    out
}

/// Iteration as a fixpoint of `acc = base ∪ join(base, acc)`; each join
/// strictly extends the interval, so this stabilizes within stream length.
fn iterate(base: &ResultSet, contiguous: bool) -> ResultSet {
    let mut acc = base.clone();
    loop {
        let grown = join(base, &acc, contiguous);
        let before = acc.len();
        acc.extend(grown);
        if acc.len() == before {
            return acc;
        }
    }
}

/// Evaluates a plain CEL formula under the position-based semantics.
pub fn evaluate_positions(
    f: &Formula,
    s: &Stream,
) -> Result<PositionResultSet, EvalError> {
    match f {
        Formula::EventType(r) => Ok(s
            .iter()
            .filter(|(_, e)| e.event_type() == Some(r.as_str()))
            .map(|(i, _)| PositionComplexEvent::singleton(i, r.clone()))
            .collect()),
        Formula::AnyEvent(x) => Ok(s
            .iter()
            .map(|(i, _)| PositionComplexEvent::singleton(i, x.clone()))
            .collect()),
        Formula::As(inner, x) => {
            let mut out = PositionResultSet::new();
            for c in evaluate_positions(inner, s)? {
                let support = c.support();
                out.insert(c.with_positions(x.clone(), support));
            }
            Ok(out)
        }
        Formula::Filter(inner, x, FilterKind::Event(p)) => {
            let mut out = PositionResultSet::new();
            for c in evaluate_positions(inner, s)? {
                let ok = c.positions(x).iter().all(|&k| {
                    s.get(k).map(|e| p.eval(e).unwrap_or(false)).unwrap_or(false)
                });
                if ok {
                    out.insert(c);
                }
            }
            Ok(out)
        }
        Formula::ProjectVars(inner, keep) => Ok(evaluate_positions(inner, s)?
            .iter()
            .map(|c| c.project_vars(keep))
            .collect()),
        Formula::Or(a, b) => {
            let mut out = evaluate_positions(a, s)?;
            out.extend(evaluate_positions(b, s)?);
            Ok(out)
        }
        Formula::And(a, b) => {
            let left = evaluate_positions(a, s)?;
            let right = evaluate_positions(b, s)?;
            Ok(left.intersection(&right).cloned().collect())
        }
        Formula::SeqNonContig(a, b) | Formula::SeqContig(a, b) => {
            let contiguous = matches!(f, Formula::SeqContig(..));
            let left = evaluate_positions(a, s)?;
            let right = evaluate_positions(b, s)?;
            let mut out = PositionResultSet::new();
            for c1 in &left {
                for c2 in &right {
                    if joinable(c1.end(), c2.start(), contiguous) {
                        out.insert(c1.union(c2));
                    }
                }
            }
            Ok(out)
        }
        Formula::IterNonContig(inner) | Formula::IterContig(inner) => {
            let contiguous = matches!(f, Formula::IterContig(..));
            let base = evaluate_positions(inner, s)?;
            let mut acc = base.clone();
            loop {
                let mut grown = PositionResultSet::new();
                for c1 in &base {
                    for c2 in &acc {
                        if joinable(c1.end(), c2.start(), contiguous) {
                            grown.insert(c1.union(c2));
                        }
                    }
                }
                let before = acc.len();
                acc.extend(grown);
                if acc.len() == before {
                    return Ok(acc);
                }
            }
        }
        other => Err(EvalError::UnsupportedFragment(format!(
            "position semantics does not cover {other}"
        ))),
    }
}

/// Replaces each position in a position-based complex event by the stream
/// event sitting there.
pub fn positions_to_events(
    p: &PositionComplexEvent,
    s: &Stream,
) -> Result<ComplexEvent, EvalError> {
    let mut valuation = std::collections::BTreeMap::new();
    for (var, positions) in p.valuation() {
        let mut bag = EventBag::empty();
        for &k in positions {
            let e = s.get(k).ok_or_else(|| {
                EvalError::UnsupportedFragment(format!("position {k} outside the stream"))
            })?;
            bag.insert(e.clone());
        }
        valuation.insert(var.clone(), bag);
    }
    Ok(ComplexEvent::new(p.start(), p.end(), valuation))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::{desugar, parse_query};
    use crate::model::{Event, TYPE_ATTR};

    fn stock(time: u64, ty: &str, name: &str, price: i64) -> Event {
        Event::from_pairs(
            time,
            [
                (TYPE_ATTR, Value::text(ty)),
                ("name", Value::text(name)),
                ("price", Value::Int(price)),
            ],
        )
    }

    /// The ten-event stock stream used throughout the tests.
    pub fn stocks() -> Stream {
        Stream::new(vec![
            stock(0, "SELL", "MSFT", 101),
            stock(1, "SELL", "MSFT", 102),
            stock(2, "SELL", "INTC", 80),
            stock(3, "BUY", "INTC", 80),
            stock(4, "SELL", "AMZN", 1900),
            stock(5, "SELL", "INTC", 81),
            stock(6, "BUY", "AMZN", 1920),
            stock(7, "BUY", "MSFT", 101),
            stock(8, "BUY", "INTC", 79),
            stock(9, "SELL", "INTC", 80),
        ])
    }

    fn eval_text(text: &str, s: &Stream) -> ResultSet {
        evaluate(&desugar(&parse_query(text).unwrap()), s).unwrap()
    }

    #[test]
    fn event_type_yields_singletons() {
        let rs = eval_text("BUY", &stocks());
        let intervals: Vec<(usize, usize)> = rs.iter().map(|c| (c.start(), c.end())).collect();
        assert_eq!(intervals, vec![(3, 3), (6, 6), (7, 7), (8, 8)]);
    }

    #[test]
    fn sell_buy_sequence_requires_order() {
        let rs = eval_text("SELL AS x ; BUY AS y", &stocks());
        assert!(rs.iter().all(|c| {
            let xs = c.bag("x");
            let ys = c.bag("y");
            let ordered = xs.iter().all(|e| ys.iter().all(|b| e.time() < b.time()));
            ordered
        }));
        assert!(!rs.is_empty());
    }

    #[test]
    fn contiguous_sequence_is_adjacent() {
        let rs = eval_text("SELL : BUY", &stocks());
        let intervals: Vec<(usize, usize)> = rs.iter().map(|c| (c.start(), c.end())).collect();
        assert_eq!(intervals, vec![(2, 3), (5, 6)]);
    }

    #[test]
    fn msft_intel_amzn_chain() {
        let rs = eval_text(
            "((SELL AS msft ; SELL AS intel) ; SELL AS amzn) \
             FILTER (msft[name = \"MSFT\"] AND (intel[name = \"INTC\"] AND amzn[name = \"AMZN\"]))",
            &stocks(),
        );
        let intervals: BTreeSet<(usize, usize)> =
            rs.iter().map(|c| (c.start(), c.end())).collect();
        assert_eq!(intervals, BTreeSet::from([(0, 4), (1, 4)]));
        for c in &rs {
            assert_eq!(c.bag("intel").iter().map(|e| e.time()).collect::<Vec<_>>(), vec![2]);
            assert_eq!(c.bag("amzn").iter().map(|e| e.time()).collect::<Vec<_>>(), vec![4]);
            // AS copies every already-bound event, so the SELL bag carries
            // all three legs.
            assert_eq!(c.bag("SELL").len(), 3);
        }
    }

    #[test]
    fn aggregation_appends_an_untyped_event() {
        let rs = eval_text(
            "AGG M[MAX <- max intel(price)](SELL AS intel FILTER intel[name = \"INTC\"])",
            &stocks(),
        );
        assert_eq!(rs.len(), 3);
        for c in &rs {
            let m = c.bag("M");
            assert_eq!(m.len(), 1);
            let e = m.iter().next().unwrap();
            assert_eq!(e.time(), c.end() as u64);
            assert_eq!(e.event_type(), None);
            assert!(matches!(e.get("MAX"), Value::Int(_)));
        }
    }

    #[test]
    fn avg_and_empty_source() {
        let rs = eval_text("AGG M[A <- avg x(price)](BUY AS x)", &stocks());
        assert_eq!(rs.len(), 4);
        let err = evaluate(
            &desugar(&parse_query("AGG M[A <- avg y(price)](BUY AS x)").unwrap()),
            &stocks(),
        );
        assert_eq!(err.unwrap_err(), EvalError::DivisionByZero);
    }

    #[test]
    fn iteration_fixpoint_counts_subsets() {
        // BUY+ over four BUY positions: every nonempty subset ordered by
        // position, 2^4 - 1 results.
        let rs = eval_text("BUY+", &stocks());
        assert_eq!(rs.len(), 15);
        let contig = eval_text("BUY(+)", &stocks());
        // Contiguous runs of BUY positions {3}, {6,7,8}: 1 + 3 + 2 + 1.
        assert_eq!(contig.len(), 7);
    }

    #[test]
    fn position_semantics_agrees_with_event_semantics() {
        let s = stocks();
        for text in ["SELL AS x ; BUY AS y", "BUY+", "SELL : BUY", "(SELL OR BUY) AS z"] {
            let f = desugar(&parse_query(text).unwrap());
            let direct = evaluate(&f, &s).unwrap();
            let via: ResultSet = evaluate_positions(&f, &s)
                .unwrap()
                .iter()
                .map(|p| positions_to_events(p, &s).unwrap())
                .collect();
            assert_eq!(direct, via, "{text}");
        }
    }

    #[test]
    fn position_semantics_rejects_aggregates() {
        let f = desugar(&parse_query("AGG M[A <- sum x(price)](BUY AS x)").unwrap());
        assert!(matches!(
            evaluate_positions(&f, &stocks()),
            Err(EvalError::UnsupportedFragment(_))
        ));
    }

    #[test]
    fn filter_error_rejects_instead_of_aborting() {
        // Ordering text values is an evaluation error; the filter simply
        // rejects such candidates.
        let rs = eval_text("SELL AS x FILTER x[name > 10]", &stocks());
        assert!(rs.is_empty());
    }

    #[test]
    fn empty_stream_everything_empty() {
        let s = Stream::default();
        assert!(eval_text("SELL", &s).is_empty());
        assert!(eval_text("SELL+", &s).is_empty());
        assert!(eval_text("NEXT(SELL)", &s).is_empty());
    }
}
