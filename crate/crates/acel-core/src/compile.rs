//! Formula-to-automaton compiler.
//!
//! Each core constructor has a structural construction over the
//! sub-automaton: a fresh two-state automaton per event type, output
//! rewrites for AS and the projections, predicate strengthening for FILTER,
//! state-graph surgery for the connectives, and a register-threading rewrite
//! for aggregation. Sub-automata always get disjoint state and register
//! names ("$g…" for event copies, "$a…" for aggregation accumulators, both
//! rejected by the parser), so constructions can combine them freely.
//!
//! The companion translation `cea_to_acea` embeds classic mark-only
//! automata by copying every schema attribute into registers and emitting
//! identity renamings for each marked variable.

use std::collections::{BTreeMap, BTreeSet};

use crate::agg::{self, AggKind};
use crate::error::CompileError;
use crate::lang::{AggBinding, FilterKind, Formula};
use crate::machine::{
    Acea, Assignment, Cea, OutputAssignment, OutputMapping, StateId, Transition,
};
use crate::model::{Expression, OpKind, Predicate, Schema, Value, TYPE_ATTR};

/// A compiled automaton plus warnings about constructions that leave the
/// pure-renaming fragment (avg and range need emission-time arithmetic).
#[derive(Debug, Clone)]
pub struct Compiled {
    pub automaton: Acea,
    pub warnings: Vec<String>,
}

/// Compiles a core formula into an equivalent automaton.
pub fn compile(f: &Formula, schema: &Schema) -> Result<Compiled, CompileError> {
    let mut ctx = Ctx::default();
    let automaton = compile_core(f, schema, &mut ctx)?;
    Ok(Compiled { automaton, warnings: ctx.warnings })
}

#[derive(Default)]
struct Ctx {
    next_state: StateId,
    next_group: usize,
    warnings: Vec<String>,
}

impl Ctx {
    fn state(&mut self) -> StateId {
        let s = self.next_state;
        self.next_state += 1;
        s
    }

    fn group(&mut self) -> usize {
        let g = self.next_group;
        self.next_group += 1;
        g
    }
}

fn compile_core(f: &Formula, schema: &Schema, ctx: &mut Ctx) -> Result<Acea, CompileError> {
    match f {
        Formula::EventType(r) => Ok(base_automaton(schema, ctx, Some(r), r)),
        Formula::AnyEvent(x) => Ok(any_automaton(schema, ctx, x)),
        Formula::As(inner, x) => {
            let a = compile_core(inner, schema, ctx)?;
            Ok(rewrite_outputs(&a, |output| {
                if output.is_empty() {
                    return output.clone();
                }
                let mut everything: Vec<OutputAssignment> = Vec::new();
                for (_, outs) in output.iter() {
                    everything.extend(outs.iter().cloned());
                }
                let mut new = OutputMapping::empty();
                for (var, outs) in output.iter() {
                    if var != x {
                        for o in outs {
                            new.push(var, o.clone());
                        }
                    }
                }
                for o in everything {
                    new.push(x.clone(), o);
                }
                new
            }))
        }
        Formula::Filter(inner, x, FilterKind::Event(p)) => {
            let a = compile_core(inner, schema, ctx)?;
            let transitions = a
                .transitions
                .iter()
                .map(|t| {
                    let marks = t.output.get(x);
                    if marks.is_empty() {
                        return t.clone();
                    }
                    let mut pred = t.pred.clone();
                    for r in marks {
                        let map: BTreeMap<String, Expression> =
                            r.iter().map(|(a, e)| (a.to_string(), e.clone())).collect();
                        pred = Predicate::and(pred, p.substitute(&map));
                    }
                    Transition { pred, ..t.clone() }
                })
                .collect();
            Ok(Acea::new(a.states.clone(), transitions, a.initial, a.finals.clone()))
        }
        Formula::Filter(_, _, FilterKind::Multiset(m)) => {
            Err(CompileError::UnsupportedMultisetPredicate(m.to_string()))
        }
        Formula::ProjectVars(inner, keep) => {
            let a = compile_core(inner, schema, ctx)?;
            Ok(rewrite_outputs(&a, |output| {
                output.map_bags(|var, outs| {
                    if keep.contains(var) {
                        outs.to_vec()
                    } else {
                        Vec::new()
                    }
                })
            }))
        }
        Formula::ProjectAttrs(inner, x, attrs) => {
            let a = compile_core(inner, schema, ctx)?;
            Ok(rewrite_outputs(&a, |output| {
                output.map_bags(|var, outs| {
                    if var != x {
                        return outs.to_vec();
                    }
                    outs.iter()
                        .map(|o| {
                            OutputAssignment::from_pairs(
                                o.iter()
                                    .filter(|(a, _)| attrs.contains(*a))
                                    .map(|(a, e)| (a.to_string(), e.clone())),
                            )
                        })
                        .collect()
                })
            }))
        }
        Formula::Or(a, b) => {
            let a1 = compile_core(a, schema, ctx)?;
            let a2 = compile_core(b, schema, ctx)?;
            Ok(union_automaton(&a1, &a2, ctx))
        }
        Formula::And(a, b) => {
            let a1 = compile_core(a, schema, ctx)?;
            let a2 = compile_core(b, schema, ctx)?;
            Ok(product_automaton(&a1, &a2, ctx))
        }
        Formula::SeqNonContig(a, b) => {
            let a1 = compile_core(a, schema, ctx)?;
            let a2 = compile_core(b, schema, ctx)?;
            Ok(splice_automaton(&a1, &a2, true))
        }
        Formula::SeqContig(a, b) => {
            let a1 = compile_core(a, schema, ctx)?;
            let a2 = compile_core(b, schema, ctx)?;
            Ok(splice_automaton(&a1, &a2, false))
        }
        Formula::IterNonContig(inner) => {
            let a = compile_core(inner, schema, ctx)?;
            Ok(iterate_automaton(&a, ctx, true))
        }
        Formula::IterContig(inner) => {
            let a = compile_core(inner, schema, ctx)?;
            Ok(iterate_automaton(&a, ctx, false))
        }
        Formula::Agg(inner, y, bindings) => {
            let a = compile_core(inner, schema, ctx)?;
            aggregate_automaton(&a, y, bindings, ctx)
        }
        Formula::FilterConnective(..) => Err(CompileError::SugarNotDesugared("FILTER connective")),
        Formula::Next(_) => Err(CompileError::SugarNotDesugared("NEXT")),
    }
}

fn rewrite_outputs<F>(a: &Acea, mut f: F) -> Acea
where
    F: FnMut(&OutputMapping) -> OutputMapping,
{
    let transitions = a
        .transitions
        .iter()
        .map(|t| Transition { output: f(&t.output), ..t.clone() })
        .collect();
    Acea::new(a.states.clone(), transitions, a.initial, a.finals.clone())
}

fn copy_register(group: usize, attr: &str) -> String {
    format!("$g{group}.{attr}")
}

fn type_attrs<'a>(schema: &'a Schema, event_type: &str) -> Vec<&'a str> {
    let mut attrs: Vec<&str> = schema
        .attrs_of(event_type)
        .map(|set| set.iter().map(String::as_str).collect())
        .unwrap_or_default();
    attrs.push(TYPE_ATTR);
    attrs
}

/// One transition copying an event of the given type into a register group
/// and emitting it back unchanged into `var`.
fn copy_transition(
    schema: &Schema,
    group: usize,
    event_type: &str,
    var: &str,
    from: StateId,
    to: StateId,
) -> Transition {
    let attrs = type_attrs(schema, event_type);
    let assign = Assignment::from_pairs(
        attrs.iter().map(|a| (copy_register(group, a), Expression::attr(*a))),
    );
    let output = OutputAssignment::from_pairs(
        attrs.iter().map(|a| (a.to_string(), Expression::attr(copy_register(group, a)))),
    );
    Transition {
        from,
        assign,
        pred: Predicate::AttrCmp(
            copy_register(group, TYPE_ATTR),
            crate::model::CmpOp::Eq,
            Value::text(event_type),
        ),
        output: OutputMapping::single(var, output),
        to,
    }
}

fn base_automaton(schema: &Schema, ctx: &mut Ctx, only: Option<&str>, var: &str) -> Acea {
    let p1 = ctx.state();
    let p2 = ctx.state();
    let group = ctx.group();
    let transitions = match only {
        Some(t) => vec![copy_transition(schema, group, t, var, p1, p2)],
        None => Vec::new(),
    };
    Acea::new(BTreeSet::from([p1, p2]), transitions, p1, BTreeSet::from([p2]))
}

/// Wildcard: one copy transition per schema type, all binding `var`.
fn any_automaton(schema: &Schema, ctx: &mut Ctx, var: &str) -> Acea {
    let p1 = ctx.state();
    let p2 = ctx.state();
    let group = ctx.group();
    let transitions = schema
        .types()
        .map(|t| copy_transition(schema, group, t, var, p1, p2))
        .collect();
    Acea::new(BTreeSet::from([p1, p2]), transitions, p1, BTreeSet::from([p2]))
}

/// OR: fresh initial state with copies of both initial states' outgoing
/// transitions; accepts whatever either automaton accepts.
fn union_automaton(a1: &Acea, a2: &Acea, ctx: &mut Ctx) -> Acea {
    let q0 = ctx.state();
    let mut states: BTreeSet<StateId> = a1.states.union(&a2.states).copied().collect();
    states.insert(q0);
    let mut transitions: Vec<Transition> = Vec::new();
    transitions.extend(a1.transitions.iter().cloned());
    transitions.extend(a2.transitions.iter().cloned());
    for t in a1.transitions_from(a1.initial).chain(a2.transitions_from(a2.initial)) {
        transitions.push(Transition { from: q0, ..t.clone() });
    }
    let finals: BTreeSet<StateId> = a1.finals.union(&a2.finals).copied().collect();
    Acea::new(states, transitions, q0, finals)
}

/// AND: lock-step product. A transition pair combines only when both sides
/// mark the same variables with renaming bags of identical attribute-set
/// multisets; a runtime predicate then demands some bag bijection under
/// which all paired output values agree, so both runs emit the same events.
fn product_automaton(a1: &Acea, a2: &Acea, ctx: &mut Ctx) -> Acea {
    let mut ids: BTreeMap<(StateId, StateId), StateId> = BTreeMap::new();
    for &p in &a1.states {
        for &q in &a2.states {
            ids.insert((p, q), ctx.state());
        }
    }
    let mut transitions = Vec::new();
    for t1 in &a1.transitions {
        for t2 in &a2.transitions {
            let Some(equal) = output_equality_predicate(&t1.output, &t2.output) else {
                continue;
            };
            transitions.push(Transition {
                from: ids[&(t1.from, t2.from)],
                assign: t1.assign.disjoint_union(&t2.assign),
                pred: Predicate::and(
                    Predicate::and(t1.pred.clone(), t2.pred.clone()),
                    equal,
                ),
                output: t1.output.clone(),
                to: ids[&(t1.to, t2.to)],
            });
        }
    }
    let mut finals = BTreeSet::new();
    for &p in &a1.finals {
        for &q in &a2.finals {
            finals.insert(ids[&(p, q)]);
        }
    }
    let initial = ids[&(a1.initial, a2.initial)];
    Acea::new(ids.into_values().collect(), transitions, initial, finals)
}

/// Builds the value-equality predicate between two output mappings, or None
/// when their shapes (variables, bag sizes, attribute-set multisets) cannot
/// match.
fn output_equality_predicate(o1: &OutputMapping, o2: &OutputMapping) -> Option<Predicate> {
    let vars1: BTreeSet<&str> = o1.vars().collect();
    let vars2: BTreeSet<&str> = o2.vars().collect();
    if vars1 != vars2 {
        return None;
    }
    let mut pred = Predicate::True;
    for var in vars1 {
        let bag1 = o1.get(var);
        let bag2 = o2.get(var);
        if bag1.len() != bag2.len() {
            return None;
        }
        let doms = |bag: &[OutputAssignment]| {
            let mut v: Vec<Vec<String>> = bag
                .iter()
                .map(|o| o.domain().map(str::to_string).collect())
                .collect();
            v.sort();
            v
        };
        if doms(bag1) != doms(bag2) {
            return None;
        }
        let mut any_bijection: Option<Predicate> = None;
        for perm in domain_matching_bijections(bag1, bag2) {
            let mut all = Predicate::True;
            for (r1, idx2) in bag1.iter().zip(&perm) {
                let r2 = &bag2[*idx2];
                for (attr, x1) in r1.iter() {
                    let x2 = r2.get(attr).expect("domains matched");
                    all = Predicate::and(
                        all,
                        Predicate::ExprCmp(x1.clone(), crate::model::CmpOp::Eq, x2.clone()),
                    );
                }
            }
            any_bijection = Some(match any_bijection {
                None => all,
                Some(prev) => Predicate::or(prev, all),
            });
        }
        match any_bijection {
            None => return None,
            Some(p) => pred = Predicate::and(pred, p),
        }
    }
    Some(pred)
}

/// All bijections bag1[i] -> bag2[perm[i]] whose paired assignments have
/// equal output-attribute sets.
fn domain_matching_bijections(
    bag1: &[OutputAssignment],
    bag2: &[OutputAssignment],
) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut used = vec![false; bag2.len()];
    let mut current = Vec::new();
    fn rec(
        bag1: &[OutputAssignment],
        bag2: &[OutputAssignment],
        used: &mut Vec<bool>,
        current: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        let i = current.len();
        if i == bag1.len() {
            out.push(current.clone());
            return;
        }
        let dom1: Vec<&str> = bag1[i].domain().collect();
        for j in 0..bag2.len() {
            if used[j] {
                continue;
            }
            let dom2: Vec<&str> = bag2[j].domain().collect();
            if dom1 == dom2 {
                used[j] = true;
                current.push(j);
                rec(bag1, bag2, used, current, out);
                current.pop();
                used[j] = false;
            }
        }
    }
    rec(bag1, bag2, &mut used, &mut current, &mut out);
    out
}

/// Sequencing: run the first automaton, then hand over to the second's
/// initial state. With `gap`, a register-erasing self-loop lets arbitrary
/// events pass between the two parts.
fn splice_automaton(a1: &Acea, a2: &Acea, gap: bool) -> Acea {
    let states: BTreeSet<StateId> = a1.states.union(&a2.states).copied().collect();
    let mut transitions: Vec<Transition> = Vec::new();
    transitions.extend(a1.transitions.iter().cloned());
    transitions.extend(a2.transitions.iter().cloned());
    for t in &a1.transitions {
        if a1.finals.contains(&t.to) {
            transitions.push(Transition { to: a2.initial, ..t.clone() });
        }
    }
    if gap {
        transitions.push(waiting_loop(a2.initial));
    }
    Acea::new(states, transitions, a1.initial, a2.finals.clone())
}

fn waiting_loop(state: StateId) -> Transition {
    Transition {
        from: state,
        assign: Assignment::empty(),
        pred: Predicate::True,
        output: OutputMapping::empty(),
        to: state,
    }
}

/// Iteration: a fresh restart state receives every sub-match completion and
/// replays the initial state's outgoing transitions. Completions that take
/// a single step restart directly into the restart state again so any
/// number of one-step sub-matches can chain. With `gap`, a waiting
/// self-loop at the restart state allows events between sub-matches.
fn iterate_automaton(a: &Acea, ctx: &mut Ctx, gap: bool) -> Acea {
    let q_new = ctx.state();
    let mut states = a.states.clone();
    states.insert(q_new);
    let mut transitions: Vec<Transition> = a.transitions.clone();
    for t in &a.transitions {
        if a.finals.contains(&t.to) {
            transitions.push(Transition { to: q_new, ..t.clone() });
        }
    }
    if gap {
        transitions.push(waiting_loop(q_new));
    }
    for t in a.transitions_from(a.initial) {
        transitions.push(Transition { from: q_new, ..t.clone() });
        if a.finals.contains(&t.to) {
            transitions.push(Transition { from: q_new, to: q_new, ..t.clone() });
        }
    }
    Acea::new(states, transitions, a.initial, a.finals.clone())
}

/// Rebases an automaton so the initial state has only outgoing transitions
/// and a single fresh final state has only incoming ones, preserving the
/// enumerated results.
pub fn normalize_acea(a: &Acea) -> Acea {
    let next = a.states.iter().max().map_or(0, |m| m + 1);
    normalize_with(a, next, next + 1)
}

fn normalize_with(a: &Acea, ni: StateId, nf: StateId) -> Acea {
    let mut states = a.states.clone();
    states.insert(ni);
    states.insert(nf);
    let mut transitions: Vec<Transition> = a.transitions.clone();
    for t in &a.transitions {
        let from_init = t.from == a.initial;
        let to_final = a.finals.contains(&t.to);
        if from_init {
            transitions.push(Transition { from: ni, ..t.clone() });
        }
        if to_final {
            transitions.push(Transition { to: nf, ..t.clone() });
        }
        if from_init && to_final {
            transitions.push(Transition { from: ni, to: nf, ..t.clone() });
        }
    }
    Acea::new(states, transitions, ni, BTreeSet::from([nf]))
}

struct BindingPlan {
    binding: AggBinding,
    /// Accumulator registers with their fold operation and identity.
    registers: Vec<(String, OpKind, Value)>,
    /// Expression emitted for the target attribute, over the accumulators.
    output: Expression,
}

/// `min(max(v, 0), 0)`: zero for any number, Null for Null. Lets the count
/// contribution `1 + zero_clamp(v)` propagate Null using monoid operations
/// only.
fn zero_clamp(v: Expression) -> Expression {
    let zero = Expression::Const(Value::Int(0));
    Expression::op(OpKind::Min, Expression::op(OpKind::Max, v, zero.clone()), zero)
}

fn count_contribution(v: Expression) -> Expression {
    Expression::op(OpKind::Add, Expression::Const(Value::Int(1)), zero_clamp(v))
}

fn plan_binding(b: &AggBinding, ctx: &mut Ctx) -> Result<BindingPlan, CompileError> {
    let f = agg::lookup(&b.aggregate)
        .ok_or_else(|| CompileError::UnknownAggregate(b.aggregate.clone()))?;
    let tag = ctx.group();
    let reg = |suffix: &str| format!("$a{tag}{suffix}");
    let plan = match (f.name, &f.kind) {
        ("sum", _) => BindingPlan {
            binding: b.clone(),
            registers: vec![(reg(""), OpKind::Add, Value::Int(0))],
            output: Expression::attr(reg("")),
        },
        ("min", _) => BindingPlan {
            binding: b.clone(),
            registers: vec![(reg(""), OpKind::Min, Value::Float(f64::INFINITY))],
            output: Expression::attr(reg("")),
        },
        ("max", _) => BindingPlan {
            binding: b.clone(),
            registers: vec![(reg(""), OpKind::Max, Value::Float(f64::NEG_INFINITY))],
            output: Expression::attr(reg("")),
        },
        ("count", _) => BindingPlan {
            binding: b.clone(),
            registers: vec![(reg(""), OpKind::Add, Value::Int(0))],
            output: Expression::attr(reg("")),
        },
        ("avg", _) => {
            ctx.warnings.push(format!(
                "avg for {} emits a division at output time; the automaton leaves the \
                 pure-renaming fragment",
                b.target
            ));
            BindingPlan {
                binding: b.clone(),
                registers: vec![
                    (reg(".s"), OpKind::Add, Value::Int(0)),
                    (reg(".n"), OpKind::Add, Value::Int(0)),
                ],
                output: Expression::op(
                    OpKind::Div,
                    Expression::attr(reg(".s")),
                    Expression::attr(reg(".n")),
                ),
            }
        }
        ("range", _) => {
            ctx.warnings.push(format!(
                "range for {} emits a subtraction at output time; the automaton leaves \
                 the pure-renaming fragment",
                b.target
            ));
            BindingPlan {
                binding: b.clone(),
                registers: vec![
                    (reg(".hi"), OpKind::Max, Value::Float(f64::NEG_INFINITY)),
                    (reg(".lo"), OpKind::Min, Value::Float(f64::INFINITY)),
                ],
                output: Expression::op(
                    OpKind::Sub,
                    Expression::attr(reg(".hi")),
                    Expression::attr(reg(".lo")),
                ),
            }
        }
        (other, AggKind::SelfDecomposable(_) | AggKind::Decomposable { .. }) => {
            return Err(CompileError::UnknownAggregate(other.to_string()))
        }
    };
    Ok(plan)
}

/// The per-transition value a marked renaming contributes to an
/// accumulator: the renaming's expression for the aggregated attribute with
/// every register replaced by what this transition assigns to it.
fn mark_value(r: &OutputAssignment, attr: &str, assign: &Assignment) -> Expression {
    let map: BTreeMap<String, Expression> =
        assign.iter().map(|(reg, x)| (reg.to_string(), x.clone())).collect();
    match r.get(attr) {
        Some(x) => x.substitute(&map),
        None => Expression::Const(Value::Null),
    }
}

/// Aggregation: normalize the sub-automaton, then thread accumulator
/// registers through every transition (folding marked values in), and emit
/// the aggregate attributes into the target variable on final transitions.
fn aggregate_automaton(
    a: &Acea,
    target_var: &str,
    bindings: &[AggBinding],
    ctx: &mut Ctx,
) -> Result<Acea, CompileError> {
    let ni = ctx.state();
    let nf = ctx.state();
    let normalized = normalize_with(a, ni, nf);
    let plans: Vec<BindingPlan> =
        bindings.iter().map(|b| plan_binding(b, ctx)).collect::<Result<_, _>>()?;

    let transitions = normalized
        .transitions
        .iter()
        .map(|t| {
            let from_init = t.from == ni;
            let to_final = t.to == nf;
            let mut assign = t.assign.clone();
            for plan in &plans {
                for (idx, (reg, op, identity)) in plan.registers.iter().enumerate() {
                    let base = if from_init {
                        Expression::Const(identity.clone())
                    } else {
                        Expression::attr(reg.clone())
                    };
                    let is_count_like = plan.binding.aggregate.eq_ignore_ascii_case("count")
                        || (plan.binding.aggregate.eq_ignore_ascii_case("avg") && idx == 1);
                    let mut acc = base;
                    for r in t.output.get(&plan.binding.source_var) {
                        let v = mark_value(r, &plan.binding.source_attr, &t.assign);
                        let contribution =
                            if is_count_like { count_contribution(v) } else { v };
                        acc = Expression::op(*op, acc, contribution);
                    }
                    assign.set(reg.clone(), acc);
                }
            }
            let mut output = t.output.clone();
            if to_final {
                let mut emit = OutputAssignment::default();
                for plan in &plans {
                    emit.set(plan.binding.target.clone(), plan.output.clone());
                }
                output.push(target_var, emit);
            }
            Transition { assign, output, ..t.clone() }
        })
        .collect();

    Ok(Acea::new(
        normalized.states.clone(),
        transitions,
        normalized.initial,
        normalized.finals.clone(),
    ))
}

/// Embeds a mark-only automaton: one register-copying transition per (CEA
/// transition, schema type), testing the original predicate over the copied
/// registers plus the type, and emitting each marked variable's event via
/// the identity renaming.
pub fn cea_to_acea(a: &Cea, schema: &Schema, ctx_group: usize) -> Acea {
    let mut transitions = Vec::new();
    for t in &a.transitions {
        for event_type in schema.types() {
            let attrs = type_attrs(schema, event_type);
            let assign = Assignment::from_pairs(
                attrs.iter().map(|at| (copy_register(ctx_group, at), Expression::attr(*at))),
            );
            let map: BTreeMap<String, Expression> = attrs
                .iter()
                .map(|at| (at.to_string(), Expression::attr(copy_register(ctx_group, at))))
                .collect();
            let pred = Predicate::and(
                t.pred.substitute(&map),
                Predicate::AttrCmp(
                    copy_register(ctx_group, TYPE_ATTR),
                    crate::model::CmpOp::Eq,
                    Value::text(event_type),
                ),
            );
            let mut output = OutputMapping::empty();
            for var in &t.marks {
                output.push(
                    var.clone(),
                    OutputAssignment::from_pairs(attrs.iter().map(|at| {
                        (at.to_string(), Expression::attr(copy_register(ctx_group, at)))
                    })),
                );
            }
            transitions.push(Transition {
                from: t.from,
                assign,
                pred,
                output,
                to: t.to,
            });
        }
    }
    Acea::new(a.states.clone(), transitions, a.initial, a.finals.clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interp::{evaluate, positions_to_events, ResultSet};
    use crate::lang::{desugar, parse_query};
    use crate::machine::{acea_enumerate, cea_enumerate, CeaTransition};
    use crate::model::{Event, Stream};

    fn stocks_schema() -> Schema {
        Schema::from_pairs([("BUY", vec!["name", "price"]), ("SELL", vec!["name", "price"])])
    }

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

    fn stocks() -> Stream {
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

    fn diff(text: &str, s: &Stream) {
        let f = desugar(&parse_query(text).unwrap());
        let want = evaluate(&f, s).unwrap();
        let compiled = compile(&f, &stocks_schema()).unwrap();
        let got = acea_enumerate(&compiled.automaton, s).unwrap();
        assert_eq!(got, want, "{text}");
    }

    #[test]
    fn base_case_matches_oracle() {
        diff("SELL", &stocks());
        diff("BUY", &stocks());
    }

    #[test]
    fn connectives_match_oracle() {
        diff("SELL AS x ; BUY AS y", &stocks());
        diff("SELL : BUY", &stocks());
        diff("SELL OR BUY", &stocks());
        diff("SELL AND (SELL FILTER SELL[price > 100])", &stocks());
    }

    #[test]
    fn filters_and_projections_match_oracle() {
        diff("SELL AS x FILTER x[price > 100]", &stocks());
        diff("PROJ[y]((SELL AS x ; BUY AS y) FILTER x[name = \"MSFT\"])", &stocks());
        diff("PROJ x(price)(SELL AS x)", &stocks());
    }

    #[test]
    fn iteration_matches_oracle() {
        diff("BUY+", &stocks());
        diff("BUY(+)", &stocks());
        diff("(SELL : BUY)+", &stocks());
    }

    #[test]
    fn three_single_step_iterations_chain() {
        let s = Stream::new(vec![
            stock(0, "BUY", "A", 1),
            stock(1, "BUY", "B", 2),
            stock(2, "BUY", "C", 3),
        ]);
        diff("BUY+", &s);
        diff("BUY(+)", &s);
    }

    #[test]
    fn aggregates_match_oracle() {
        diff("AGG M[S <- sum x(price)](SELL AS x FILTER x[name = \"INTC\"])", &stocks());
        diff("AGG M[C <- count x(price)](BUY AS x)", &stocks());
        diff("AGG M[MAX <- max x(price), LOW <- min x(price)](SELL AS x)", &stocks());
        diff("AGG M[A <- avg x(price)](BUY AS x)", &stocks());
        diff("AGG M[R <- range x(price)](BUY AS x)", &stocks());
    }

    #[test]
    fn aggregate_over_aggregate_output() {
        diff(
            "AGG M[MAX <- max x(price)](SELL AS x) FILTER M[MAX >= 100]",
            &stocks(),
        );
    }

    #[test]
    fn next_matches_oracle() {
        diff("NEXT(BUY)", &stocks());
        diff("SELL : NEXT(BUY)", &stocks());
    }

    #[test]
    fn multiset_filter_is_rejected() {
        let f = desugar(&parse_query("SELL+ AS x FILTER x[price]").unwrap());
        assert!(matches!(
            compile(&f, &stocks_schema()),
            Err(CompileError::UnsupportedMultisetPredicate(_))
        ));
    }

    #[test]
    fn avg_compilation_warns() {
        let f = desugar(&parse_query("AGG M[A <- avg x(price)](SELL AS x)").unwrap());
        let compiled = compile(&f, &stocks_schema()).unwrap();
        assert_eq!(compiled.warnings.len(), 1);
    }

    #[test]
    fn normalization_preserves_results() {
        let f = desugar(&parse_query("SELL AS x ; BUY AS y").unwrap());
        let a = compile(&f, &stocks_schema()).unwrap().automaton;
        let n = normalize_acea(&a);
        assert_eq!(
            acea_enumerate(&a, &stocks()).unwrap(),
            acea_enumerate(&n, &stocks()).unwrap()
        );
    }

    #[test]
    fn cea_embedding_preserves_results() {
        let cea = Cea {
            states: BTreeSet::from([0, 1, 2]),
            transitions: vec![
                CeaTransition {
                    from: 0,
                    pred: Predicate::TypeIs("SELL".into()),
                    marks: BTreeSet::from(["X".to_string()]),
                    to: 1,
                },
                CeaTransition {
                    from: 1,
                    pred: Predicate::AttrCmp(
                        "price".into(),
                        crate::model::CmpOp::Gt,
                        Value::Int(100),
                    ),
                    marks: BTreeSet::from(["Y".to_string()]),
                    to: 2,
                },
            ],
            initial: 0,
            finals: BTreeSet::from([1, 2]),
        };
        let s = stocks();
        let via_cea: ResultSet = cea_enumerate(&cea, &s)
            .iter()
            .map(|p| positions_to_events(p, &s).unwrap())
            .collect();
        let acea = cea_to_acea(&cea, &stocks_schema(), 0);
        let via_acea = acea_enumerate(&acea, &s).unwrap();
        assert_eq!(via_acea, via_cea);
    }
}
