//! Value-withdrawal explanations.
//!
//! Every reduction rule `r`, output value `e` and support function `arc` give a
//! deduction rule `(e, out_r) <- body`: if every atom of the body is withdrawn,
//! so is `e`. With several input variables a choice function `t` picks, for each
//! support tuple `f ∈ arc(e)`, the coordinate `(f_{t(f)}, t(f))` whose withdrawal
//! kills `f`. An explanation for `(e, y)` is a proof tree over these rules.
//!
//! Trees are extracted from a [`WithdrawalTrace`]; each event carries the
//! deduction-rule instance that was attached when the event was recorded, so
//! extraction is a walk over the trace index. Choice functions are resolved by
//! earliest withdrawal step, then by variable index.

use std::collections::{BTreeMap, VecDeque};
use std::fmt::Write as _;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::model::{CspModel, Value, VarId};
use crate::propagation::{simultaneous_closure, WithdrawalTrace};
use crate::rules::{ReductionRule, RuleId};

/// A `(value, variable)` pair: "this value is withdrawn from this variable".
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Atom {
    pub var: VarId,
    pub value: Value,
}

impl Atom {
    pub fn new(value: Value, var: VarId) -> Self {
        Atom { var, value }
    }

    pub fn display(&self, model: &CspModel) -> String {
        format!("({}, {})", self.value, model.name(self.var))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeductionRule {
    pub rule: RuleId,
    pub arc_index: usize,
    /// Number of support functions of the rule; the arc is part of the name only when > 1.
    pub arc_count: usize,
    /// For rules with several inputs: every support tuple of `arc(e)` with its chosen variable.
    pub choice: Option<Vec<(Vec<Value>, VarId)>>,
    pub head: Atom,
    /// Sorted by variable, then value; no duplicates.
    pub body: Vec<Atom>,
}

impl DeductionRule {
    /// The instance `(e, r, arc, t)` where `picks[k]` is the position in `in_r`
    /// chosen for the `k`-th support tuple of `arc(e)`.
    pub fn with_choice(rule: &ReductionRule, e: Value, arc_index: usize, picks: &[usize]) -> Result<Self> {
        if arc_index >= rule.arcs().len() {
            return Err(Error::Input(format!("rule {} has no support function #{arc_index}", rule.id)));
        }
        let supports = rule.arc(arc_index, e);
        let inputs = rule.inputs();
        if picks.len() != supports.len() || picks.iter().any(|&p| p >= inputs.len()) {
            return Err(Error::Input(format!(
                "choice for ({e}, {}) must pick one of {} inputs for each of {} supports",
                rule.id,
                inputs.len(),
                supports.len()
            )));
        }
        let mut body: Vec<Atom> =
            supports.iter().zip(picks).map(|(f, &p)| Atom::new(f[p], inputs[p])).collect();
        body.sort();
        body.dedup();
        let choice = (inputs.len() > 1)
            .then(|| supports.into_iter().zip(picks).map(|(f, &p)| (f, inputs[p])).collect());
        Ok(DeductionRule {
            rule: rule.id.clone(),
            arc_index,
            arc_count: rule.arcs().len(),
            choice,
            head: Atom::new(e, rule.output()),
            body,
        })
    }

    pub fn is_fact(&self) -> bool {
        self.body.is_empty()
    }

    /// `(e, r)`, `(e, r, arcK)` or `(e, r[, arcK], t=[...])`.
    pub fn name(&self, model: &CspModel) -> String {
        let mut s = format!("({}, {}", self.head.value, self.rule.label);
        if self.arc_count > 1 {
            let _ = write!(s, ", arc{}", self.arc_index + 1);
        }
        if let Some(choice) = &self.choice {
            let parts: Vec<String> = choice
                .iter()
                .map(|(f, x)| {
                    let tuple: Vec<String> = f.iter().map(Value::to_string).collect();
                    format!("({})->{}", tuple.join(","), model.name(*x))
                })
                .collect();
            let _ = write!(s, ", t=[{}]", parts.join("; "));
        }
        s.push(')');
        s
    }
}

/// The deduction-rule instance justifying the removal of `e` by `arc_index`,
/// given the withdrawal steps recorded so far.
///
/// Every support tuple must have at least one withdrawn coordinate; otherwise the
/// rule could not have removed `e` and the trace is corrupt.
pub fn deduction_instance(
    rule: &ReductionRule,
    e: Value,
    arc_index: usize,
    withdrawn_at: impl Fn(Atom) -> Option<usize>,
) -> Result<DeductionRule> {
    if arc_index >= rule.arcs().len() {
        return Err(Error::Input(format!("rule {} has no support function #{arc_index}", rule.id)));
    }
    let inputs = rule.inputs();
    let picks = rule
        .arc(arc_index, e)
        .iter()
        .map(|f| {
            (0..inputs.len())
                .filter_map(|p| withdrawn_at(Atom::new(f[p], inputs[p])).map(|s| (s, inputs[p], p)))
                .min()
                .map(|(_, _, p)| p)
                .ok_or_else(|| {
                    Error::Internal(format!(
                        "rule {} removed {e} but support {f:?} has no withdrawn coordinate",
                        rule.id
                    ))
                })
        })
        .collect::<Result<Vec<_>>>()?;
    DeductionRule::with_choice(rule, e, arc_index, &picks)
}

/// Every instance `(e, r, arc, t)` over all choice functions `t : arc(e) -> in_r`.
pub fn all_deduction_instances(rule: &ReductionRule, e: Value, arc_index: usize) -> Result<Vec<DeductionRule>> {
    if arc_index >= rule.arcs().len() {
        return Err(Error::Input(format!("rule {} has no support function #{arc_index}", rule.id)));
    }
    let n_sup = rule.arc(arc_index, e).len();
    let width = rule.inputs().len();
    let mut picks = vec![0usize; n_sup];
    let mut out = Vec::new();
    loop {
        out.push(DeductionRule::with_choice(rule, e, arc_index, &picks)?);
        if width == 1 {
            return Ok(out);
        }
        let mut k = n_sup;
        loop {
            if k == 0 {
                return Ok(out);
            }
            k -= 1;
            picks[k] += 1;
            if picks[k] < width {
                break;
            }
            picks[k] = 0;
        }
    }
}

/// A proof tree. Subtrees may be shared in memory; they are still read as a tree,
/// so a pair can label several nodes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Explanation {
    pub rule: DeductionRule,
    /// One subtree per body atom, in body order.
    pub children: Vec<Arc<Explanation>>,
}

impl Explanation {
    pub fn new(rule: DeductionRule, children: Vec<Arc<Explanation>>) -> Result<Arc<Self>> {
        let roots: Vec<Atom> = children.iter().map(|c| c.root()).collect();
        if roots != rule.body {
            return Err(Error::Input("children do not match the deduction-rule body".into()));
        }
        Ok(Arc::new(Explanation { rule, children }))
    }

    pub fn root(&self) -> Atom {
        self.rule.head
    }

    /// Number of tree nodes, counting shared subtrees once per occurrence.
    pub fn node_count(&self) -> usize {
        1 + self.children.iter().map(|c| c.node_count()).sum::<usize>()
    }

    pub fn depth(&self) -> usize {
        1 + self.children.iter().map(|c| c.depth()).max().unwrap_or(0)
    }

    /// Nodes in breadth-first order from the root, children in body order.
    pub fn bfs(&self) -> Vec<&Explanation> {
        let mut order = Vec::new();
        let mut queue = VecDeque::from([self]);
        while let Some(node) = queue.pop_front() {
            order.push(node);
            queue.extend(node.children.iter().map(|c| c.as_ref()));
        }
        order
    }

    /// Checks every node against the rule set: the named rule exists, the head is
    /// `(e, out_r)` with `e ∈ D_out`, the body is exactly what `arc(e)` and the
    /// recorded choice give, and the children are rooted at the body atoms.
    pub fn validate(&self, model: &CspModel, rules: &[ReductionRule]) -> Result<()> {
        let bad = |msg: String| Err(Error::Internal(msg));
        for node in self.bfs() {
            let d = &node.rule;
            let Some(rule) = rules.iter().find(|r| r.id == d.rule) else {
                return Err(Error::UnknownRule(d.rule.label.clone()));
            };
            if d.head.var != rule.output() || !model.domain(d.head.var).contains(d.head.value) {
                return bad(format!("head {} does not fit rule {}", d.head.display(model), rule.id));
            }
            if d.arc_index >= rule.arcs().len() || d.arc_count != rule.arcs().len() {
                return bad(format!("bad support function index in {}", d.name(model)));
            }
            let supports = rule.arc(d.arc_index, d.head.value);
            let picks: Vec<usize> = match &d.choice {
                None if rule.inputs().len() == 1 => vec![0; supports.len()],
                Some(choice) if rule.inputs().len() > 1 => {
                    let recorded: Vec<&Vec<Value>> = choice.iter().map(|(f, _)| f).collect();
                    if recorded != supports.iter().collect::<Vec<_>>() {
                        return bad(format!("choice of {} does not cover arc(e)", d.name(model)));
                    }
                    let mut picks = Vec::with_capacity(choice.len());
                    for (_, x) in choice {
                        match rule.inputs().iter().position(|i| i == x) {
                            Some(p) => picks.push(p),
                            None => return bad(format!("choice of {} leaves in_r", d.name(model))),
                        }
                    }
                    picks
                }
                _ => return bad(format!("choice presence does not match the arity of {}", rule.id)),
            };
            let expected = DeductionRule::with_choice(rule, d.head.value, d.arc_index, &picks)?;
            if expected.body != d.body {
                return bad(format!("body of {} differs from arc(e)", d.name(model)));
            }
            let roots: Vec<Atom> = node.children.iter().map(|c| c.root()).collect();
            if roots != d.body {
                return bad(format!("children of {} do not match its body", d.name(model)));
            }
        }
        Ok(())
    }
}

/// The explanation `expl(e, y, i)` for the event that withdrew `e` from `y`.
pub fn explain_from_trace(
    model: &CspModel,
    trace: &WithdrawalTrace,
    e: Value,
    y: VarId,
) -> Result<Arc<Explanation>> {
    let root = Atom::new(e, y);
    if trace.withdrawal_step(root).is_none() {
        return Err(Error::NotInTrace { value: e, var: model.name(y).to_string() });
    }
    let mut memo = BTreeMap::new();
    build(model, trace, root, None, &mut memo)
}

fn build(
    model: &CspModel,
    trace: &WithdrawalTrace,
    atom: Atom,
    before: Option<usize>,
    memo: &mut BTreeMap<Atom, Arc<Explanation>>,
) -> Result<Arc<Explanation>> {
    let ev = trace.event(atom.value, atom.var).ok_or_else(|| {
        Error::Internal(format!("body atom {} has no withdrawal event", atom.display(model)))
    })?;
    if let Some(limit) = before {
        if ev.step >= limit {
            return Err(Error::Internal(format!(
                "{} withdrawn at step {} but used at step {limit}",
                atom.display(model),
                ev.step
            )));
        }
    }
    if let Some(done) = memo.get(&atom) {
        return Ok(done.clone());
    }
    let children = ev
        .deduction
        .body
        .iter()
        .map(|a| build(model, trace, *a, Some(ev.step), memo))
        .collect::<Result<Vec<_>>>()?;
    let node = Arc::new(Explanation { rule: ev.deduction.clone(), children });
    memo.insert(atom, node.clone());
    Ok(node)
}

/// A run prefix that withdraws the root: the node rules in reverse breadth-first order.
pub fn replay(expl: &Explanation, rules: &[ReductionRule]) -> Result<Vec<RuleId>> {
    let mut script: Vec<RuleId> = expl.bfs().iter().map(|n| n.rule.rule.clone()).collect();
    if let Some(id) = script.iter().find(|id| !rules.iter().any(|r| &r.id == *id)) {
        return Err(Error::UnknownRule(id.label.clone()));
    }
    script.reverse();
    Ok(script)
}

/// Whether some explanation for `(e, y)` exists, i.e. `e` is outside the closure at `y`.
pub fn explanation_exists(model: &CspModel, rules: &[ReductionRule], e: Value, y: VarId) -> Result<bool> {
    if y.0 >= model.num_vars() || !model.domain(y).contains(e) {
        return Err(Error::Input(format!("{e} is not in the initial domain of the queried variable")));
    }
    Ok(!simultaneous_closure(model, rules)[y].contains(e))
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// Graphviz text. Shared subtrees are written out once per occurrence.
pub fn export_dot(expl: &Explanation, model: &CspModel) -> String {
    let mut out = String::from("digraph explanation {\n  node [shape=box];\n");
    let mut next = 0usize;
    dot_node(expl, model, &mut next, &mut out);
    out.push_str("}\n");
    out
}

fn dot_node(node: &Explanation, model: &CspModel, next: &mut usize, out: &mut String) -> usize {
    let me = *next;
    *next += 1;
    let name = escape(&node.rule.name(model));
    let _ = writeln!(out, "  n{me} [label=\"{}\", xlabel=\"{name}\"];", escape(&node.root().display(model)));
    for child in &node.children {
        let c = dot_node(child, model, next, out);
        let _ = writeln!(out, "  n{me} -> n{c} [label=\"{name}\"];");
    }
    me
}

/// Indented tree, two spaces per level: `(value, var) [rule name]`.
pub fn render_text(expl: &Explanation, model: &CspModel) -> String {
    let mut out = String::new();
    text_node(expl, model, 0, &mut out);
    out
}

fn text_node(node: &Explanation, model: &CspModel, depth: usize, out: &mut String) {
    let _ = writeln!(
        out,
        "{}{} [{}]",
        "  ".repeat(depth),
        node.root().display(model),
        node.rule.name(model)
    );
    for child in &node.children {
        text_node(child, model, depth + 1, out);
    }
}
