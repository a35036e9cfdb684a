//! Register automata over event streams.
//!
//! An ACEA transition carries an assignment (recomputing the whole register
//! event from the incoming event layered over the old registers), a
//! predicate over the new registers, and an output mapping that emits events
//! into complex-event variables through per-variable bags of output
//! assignments. A run consumes one stream event per step; reaching a final
//! state yields a complex event whose bags collect everything emitted along
//! the way, each emitted event stamped with the step it was produced at.
//!
//! The simpler CEA model (predicate plus variable marks, no registers) is
//! included as the translation source for the embedding in the compiler.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use crate::error::EvalError;
use crate::interp::{PositionResultSet, ResultSet};
use crate::model::{
    ComplexEvent, Event, EventBag, Expression, OpKind, PositionComplexEvent, Predicate,
    Renaming, Stream,
};

pub type StateId = usize;

/// Register assignment: the next register event has exactly this domain,
/// each register computed over the incoming event layered on the previous
/// registers. The empty assignment erases all registers.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Assignment(BTreeMap<String, Expression>);

impl Assignment {
    pub fn empty() -> Assignment {
        Assignment::default()
    }

    pub fn from_pairs<I, S>(pairs: I) -> Assignment
    where
        I: IntoIterator<Item = (S, Expression)>,
        S: Into<String>,
    {
        Assignment(pairs.into_iter().map(|(k, v)| (k.into(), v)).collect())
    }

    pub fn set(&mut self, register: impl Into<String>, x: Expression) {
        self.0.insert(register.into(), x);
    }

    pub fn get(&self, register: &str) -> Option<&Expression> {
        self.0.get(register)
    }

    pub fn domain(&self) -> impl Iterator<Item = &str> {
        self.0.keys().map(|s| s.as_str())
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Expression)> {
        self.0.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn input_attrs(&self) -> BTreeSet<&str> {
        self.0.values().flat_map(|x| x.attrs()).collect()
    }

    /// Disjoint union of two assignments; panics on overlap, which the
    /// compiler's register allocation rules out.
    pub fn disjoint_union(&self, other: &Assignment) -> Assignment {
        let mut out = self.0.clone();
        for (k, v) in &other.0 {
            let prev = out.insert(k.clone(), v.clone());
            assert!(prev.is_none(), "register {k} assigned on both sides");
        }
        Assignment(out)
    }

    /// Evaluates every register expression over `input`, producing the new
    /// register event. Reading an attribute absent from `input` is an error.
    pub fn apply(&self, input: &Event) -> Result<Event, EvalError> {
        let mut attrs = BTreeMap::new();
        for (reg, x) in &self.0 {
            attrs.insert(reg.clone(), x.eval(input)?);
        }
        Ok(Event::new(0, attrs))
    }
}

/// One emitted event: output attribute to expression over register names.
/// A plain renaming `out <- reg` is the common case; compound expressions
/// appear only for emission-time aggregate finalizers.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct OutputAssignment(BTreeMap<String, Expression>);

impl OutputAssignment {
    pub fn from_pairs<I, S>(pairs: I) -> OutputAssignment
    where
        I: IntoIterator<Item = (S, Expression)>,
        S: Into<String>,
    {
        OutputAssignment(pairs.into_iter().map(|(k, v)| (k.into(), v)).collect())
    }

    /// Builds the output assignment that realizes a renaming: for a
    /// renaming sending register r to output a, emit `a <- r`.
    pub fn from_renaming(r: &Renaming) -> OutputAssignment {
        OutputAssignment(
            r.0.iter().map(|(from, to)| (to.clone(), Expression::attr(from))).collect(),
        )
    }

    pub fn set(&mut self, out_attr: impl Into<String>, x: Expression) {
        self.0.insert(out_attr.into(), x);
    }

    pub fn get(&self, out_attr: &str) -> Option<&Expression> {
        self.0.get(out_attr)
    }

    pub fn domain(&self) -> impl Iterator<Item = &str> {
        self.0.keys().map(|s| s.as_str())
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Expression)> {
        self.0.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn input_registers(&self) -> BTreeSet<&str> {
        self.0.values().flat_map(|x| x.attrs()).collect()
    }

    pub fn is_renaming(&self) -> bool {
        self.0.values().all(|x| matches!(x, Expression::Attr(_)))
    }

    /// Emits the output event over the current registers, stamped with the
    /// step index.
    pub fn emit(&self, registers: &Event, step: usize) -> Result<Event, EvalError> {
        let mut attrs = BTreeMap::new();
        for (out, x) in &self.0 {
            attrs.insert(out.clone(), x.eval(registers)?);
        }
        Ok(Event::new(step as u64, attrs))
    }
}

/// Variable to bag of output assignments; the bag may contain duplicates,
/// each producing its own occurrence in the result bag.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct OutputMapping(BTreeMap<String, Vec<OutputAssignment>>);

impl OutputMapping {
    pub fn empty() -> OutputMapping {
        OutputMapping::default()
    }

    pub fn single(var: impl Into<String>, out: OutputAssignment) -> OutputMapping {
        OutputMapping(BTreeMap::from([(var.into(), vec![out])]))
    }

    pub fn push(&mut self, var: impl Into<String>, out: OutputAssignment) {
        self.0.entry(var.into()).or_default().push(out);
    }

    pub fn get(&self, var: &str) -> &[OutputAssignment] {
        self.0.get(var).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn vars(&self) -> impl Iterator<Item = &str> {
        self.0.keys().map(|s| s.as_str())
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &[OutputAssignment])> {
        self.0.iter().map(|(k, v)| (k.as_str(), v.as_slice()))
    }

    pub fn is_empty(&self) -> bool {
        self.0.values().all(Vec::is_empty)
    }

    /// Applies `f` to every bag, keeping variables whose new bag is
    /// non-empty.
    pub fn map_bags<F>(&self, mut f: F) -> OutputMapping
    where
        F: FnMut(&str, &[OutputAssignment]) -> Vec<OutputAssignment>,
    {
        OutputMapping(
            self.0
                .iter()
                .map(|(var, outs)| (var.clone(), f(var, outs)))
                .filter(|(_, outs)| !outs.is_empty())
                .collect(),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transition {
    pub from: StateId,
    pub assign: Assignment,
    pub pred: Predicate,
    pub output: OutputMapping,
    pub to: StateId,
}

/// An aggregation complex event automaton.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Acea {
    pub states: BTreeSet<StateId>,
    pub transitions: Vec<Transition>,
    pub initial: StateId,
    pub finals: BTreeSet<StateId>,
}

impl Acea {
    pub fn new(
        states: BTreeSet<StateId>,
        transitions: Vec<Transition>,
        initial: StateId,
        finals: BTreeSet<StateId>,
    ) -> Acea {
        let a = Acea { states, transitions, initial, finals };
        a.check();
        a
    }

    fn check(&self) {
        assert!(self.states.contains(&self.initial), "initial state not in state set");
        assert!(self.finals.is_subset(&self.states), "final state not in state set");
        for t in &self.transitions {
            assert!(self.states.contains(&t.from) && self.states.contains(&t.to));
            // Compound arithmetic stays in output assignments; register
            // assignments use only monoid operations.
            for (_, x) in t.assign.iter() {
                assert!(
                    !contains_op(x, &[OpKind::Div, OpKind::Sub]),
                    "div/sub are emission-only operations"
                );
            }
        }
    }

    pub fn transitions_from(&self, q: StateId) -> impl Iterator<Item = &Transition> {
        self.transitions.iter().filter(move |t| t.from == q)
    }

    /// Deterministic text dump for golden tests and --emit-automaton.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "states: {:?}", self.states.iter().collect::<Vec<_>>());
        let _ = writeln!(out, "initial: {}", self.initial);
        let _ = writeln!(out, "finals: {:?}", self.finals.iter().collect::<Vec<_>>());
        let mut lines: Vec<String> = self
            .transitions
            .iter()
            .map(|t| {
                let mut line = format!("{} -> {}\n", t.from, t.to);
                for (reg, x) in t.assign.iter() {
                    let _ = writeln!(line, "  {reg} <- {x}");
                }
                let _ = writeln!(line, "  if {}", t.pred);
                for (var, outs) in t.output.iter() {
                    for o in outs {
                        let parts: Vec<String> =
                            o.iter().map(|(a, x)| format!("{a}<-{x}")).collect();
                        let _ = writeln!(line, "  {var} += {{{}}}", parts.join(", "));
                    }
                }
                line
            })
            .collect();
        lines.sort();
        for l in lines {
            out.push_str(&l);
        }
        out
    }
}

fn contains_op(x: &Expression, ops: &[OpKind]) -> bool {
    match x {
        Expression::Const(_) | Expression::Attr(_) => false,
        Expression::Op(k, a, b) => {
            ops.contains(k) || contains_op(a, ops) || contains_op(b, ops)
        }
    }
}

/// A run-time configuration: current state plus the register event.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Configuration {
    pub state: StateId,
    pub registers: Event,
}

impl Configuration {
    pub fn initial(a: &Acea) -> Configuration {
        Configuration { state: a.initial, registers: Event::new(0, BTreeMap::new()) }
    }
}

/// Applies one transition to a configuration for the incoming event.
/// Returns None when the transition is inapplicable: wrong source state, a
/// register expression reading an unbound attribute, or a failing (or
/// erroring) predicate.
pub fn acea_step(c: &Configuration, e: &Event, t: &Transition) -> Option<Configuration> {
    if t.from != c.state {
        return None;
    }
    let input = e.update_over(&c.registers);
    let registers = t.assign.apply(&input).ok()?;
    match t.pred.eval(&registers) {
        Ok(true) => Some(Configuration { state: t.to, registers }),
        _ => None,
    }
}

/// Enumerates every accepting run over every interval of the stream and
/// collects the complex events they produce. Exponential; ground truth only.
pub fn acea_enumerate(a: &Acea, s: &Stream) -> Result<ResultSet, EvalError> {
    let mut out = ResultSet::new();
    for start in 0..s.len() {
        let mut valuation = BTreeMap::new();
        let cfg = Configuration::initial(a);
        run_from(a, s, start, start, &cfg, &mut valuation, &mut out)?;
    }
    Ok(out)
}

fn run_from(
    a: &Acea,
    s: &Stream,
    start: usize,
    k: usize,
    cfg: &Configuration,
    valuation: &mut BTreeMap<String, EventBag>,
    out: &mut ResultSet,
) -> Result<(), EvalError> {
    let Some(e) = s.get(k) else {
        return Ok(());
    };
    for t in a.transitions_from(cfg.state) {
        let Some(next) = acea_step(cfg, e, t) else {
            continue;
        };
        let mut emitted: Vec<(String, Event)> = Vec::new();
        for (var, outs) in t.output.iter() {
            for o in outs {
                emitted.push((var.to_string(), o.emit(&next.registers, k)?));
            }
        }
        for (var, ev) in &emitted {
            valuation.entry(var.clone()).or_insert_with(EventBag::empty).insert(ev.clone());
        }
        if a.finals.contains(&next.state) {
            out.insert(ComplexEvent::new(start, k, valuation.clone()));
        }
        run_from(a, s, start, k + 1, &next, valuation, out)?;
        // Backtrack this transition's emissions.
        for (var, ev) in emitted.iter().rev() {
            let bag = valuation.get_mut(var).expect("bag inserted above");
            let mut events: Vec<Event> = bag.iter().cloned().collect();
            let idx = events.iter().rposition(|x| x == ev).expect("event inserted above");
            events.remove(idx);
            if events.is_empty() {
                valuation.remove(var);
            } else {
                *bag = EventBag::from_vec(events);
            }
        }
    }
    Ok(())
}

/// A classic complex event automaton transition: predicate over the raw
/// event, set of variables marked with the current position.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CeaTransition {
    pub from: StateId,
    pub pred: Predicate,
    pub marks: BTreeSet<String>,
    pub to: StateId,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cea {
    pub states: BTreeSet<StateId>,
    pub transitions: Vec<CeaTransition>,
    pub initial: StateId,
    pub finals: BTreeSet<StateId>,
}

/// Enumerates accepting CEA runs, producing position-based complex events.
pub fn cea_enumerate(a: &Cea, s: &Stream) -> PositionResultSet {
    let mut out = PositionResultSet::new();
    for start in 0..s.len() {
        let mut valuation: BTreeMap<String, BTreeSet<usize>> = BTreeMap::new();
        cea_run(a, s, start, start, a.initial, &mut valuation, &mut out);
    }
    out
}

fn cea_run(
    a: &Cea,
    s: &Stream,
    start: usize,
    k: usize,
    state: StateId,
    valuation: &mut BTreeMap<String, BTreeSet<usize>>,
    out: &mut PositionResultSet,
) {
    let Some(e) = s.get(k) else {
        return;
    };
    for t in a.transitions.iter().filter(|t| t.from == state) {
        if !t.pred.eval(e).unwrap_or(false) {
            continue;
        }
        let mut added: Vec<&String> = Vec::new();
        for var in &t.marks {
            if valuation.entry(var.clone()).or_default().insert(k) {
                added.push(var);
            }
        }
        if a.finals.contains(&t.to) {
            out.insert(PositionComplexEvent::new(start, k, valuation.clone()));
        }
        cea_run(a, s, start, k + 1, t.to, valuation, out);
        for var in added {
            let set = valuation.get_mut(var).expect("mark added above");
            set.remove(&k);
            if set.is_empty() {
                valuation.remove(var);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{CmpOp, Value, TYPE_ATTR};

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

    fn small_stream() -> Stream {
        Stream::new(vec![
            stock(0, "SELL", "MSFT", 101),
            stock(1, "BUY", "MSFT", 102),
            stock(2, "SELL", "INTC", 80),
        ])
    }

    /// Two-state automaton accepting a single SELL and emitting it back.
    fn sell_acea() -> Acea {
        let assign = Assignment::from_pairs([
            ("t", Expression::attr(TYPE_ATTR)),
            ("n", Expression::attr("name")),
            ("p", Expression::attr("price")),
        ]);
        let out = OutputAssignment::from_pairs([
            (TYPE_ATTR, Expression::attr("t")),
            ("name", Expression::attr("n")),
            ("price", Expression::attr("p")),
        ]);
        Acea::new(
            BTreeSet::from([0, 1]),
            vec![Transition {
                from: 0,
                assign,
                // The predicate runs over the new registers, so it tests
                // the copied type register rather than the raw event.
                pred: Predicate::AttrCmp("t".into(), CmpOp::Eq, Value::text("SELL")),
                output: OutputMapping::single("SELL", out),
                to: 1,
            }],
            0,
            BTreeSet::from([1]),
        )
    }

    #[test]
    fn assignment_replaces_the_register_event() {
        let sigma = Assignment::from_pairs([(
            "a",
            Expression::op(
                OpKind::Max,
                Expression::op(OpKind::Add, Expression::attr("a"), Expression::attr("b")),
                Expression::attr("c"),
            ),
        )]);
        let e = Event::from_pairs(
            0,
            [("a", Value::Int(4)), ("b", Value::Int(2)), ("c", Value::Int(5))],
        );
        let out = sigma.apply(&e).unwrap();
        assert_eq!(out.get("a"), Value::Int(6));
        assert!(!out.has_attr("b"));
    }

    #[test]
    fn step_fails_on_unbound_register_or_failed_predicate() {
        let a = sell_acea();
        let cfg = Configuration::initial(&a);
        let buy = stock(1, "BUY", "MSFT", 102);
        assert!(acea_step(&cfg, &buy, &a.transitions[0]).is_none());
        let missing = Event::from_pairs(0, [(TYPE_ATTR, Value::text("SELL"))]);
        assert!(acea_step(&cfg, &missing, &a.transitions[0]).is_none());
    }

    #[test]
    fn single_sell_enumeration_matches_event_type_semantics() {
        let s = small_stream();
        let got = acea_enumerate(&sell_acea(), &s).unwrap();
        let want =
            crate::interp::evaluate(&crate::lang::Formula::EventType("SELL".into()), &s).unwrap();
        assert_eq!(got, want);
    }

    #[test]
    fn emitted_events_take_the_step_time() {
        let got = acea_enumerate(&sell_acea(), &small_stream()).unwrap();
        for c in &got {
            for e in c.bag("SELL").iter() {
                assert_eq!(e.time() as usize, c.end());
            }
        }
    }

    #[test]
    fn register_doubling_growth() {
        // One state looping with c <- c + c after initializing c <- 1;
        // register value after n steps is 2^(n-1).
        let states = BTreeSet::from([0, 1]);
        let init = Transition {
            from: 0,
            assign: Assignment::from_pairs([("c", Expression::Const(Value::Int(1)))]),
            pred: Predicate::True,
            output: OutputMapping::single(
                "X",
                OutputAssignment::from_pairs([("b", Expression::attr("c"))]),
            ),
            to: 1,
        };
        let double = Transition {
            from: 1,
            assign: Assignment::from_pairs([(
                "c",
                Expression::op(OpKind::Add, Expression::attr("c"), Expression::attr("c")),
            )]),
            pred: Predicate::True,
            output: OutputMapping::single(
                "X",
                OutputAssignment::from_pairs([("b", Expression::attr("c"))]),
            ),
            to: 1,
        };
        let a = Acea::new(states, vec![init, double], 0, BTreeSet::from([1]));
        let s = Stream::new(
            (0..4).map(|i| Event::from_pairs(i, [(TYPE_ATTR, Value::text("U"))])).collect(),
        );
        let got = acea_enumerate(&a, &s).unwrap();
        let full: Vec<&ComplexEvent> =
            got.iter().filter(|c| c.start() == 0 && c.end() == 3).collect();
        assert_eq!(full.len(), 1);
        let values: Vec<Value> =
            full[0].bag("X").iter().map(|e| e.get("b")).collect();
        assert_eq!(
            values,
            vec![Value::Int(1), Value::Int(2), Value::Int(4), Value::Int(8)]
        );
    }

    #[test]
    fn cea_marks_positions() {
        let cea = Cea {
            states: BTreeSet::from([0, 1]),
            transitions: vec![CeaTransition {
                from: 0,
                pred: Predicate::TypeIs("SELL".into()),
                marks: BTreeSet::from(["X".to_string()]),
                to: 1,
            }],
            initial: 0,
            finals: BTreeSet::from([1]),
        };
        let got = cea_enumerate(&cea, &small_stream());
        let positions: Vec<usize> =
            got.iter().flat_map(|c| c.positions("X").into_iter()).collect();
        assert_eq!(positions, vec![0, 2]);
    }

    #[test]
    fn dump_is_deterministic() {
        let a = sell_acea();
        assert_eq!(a.dump(), a.dump());
        assert!(a.dump().contains("0 -> 1"));
        assert!(a.dump().contains("t = \"SELL\""));
    }
}
