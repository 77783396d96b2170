//! Reduction rules in hyper-arc form.
//!
//! A rule has input variables `in_r`, one output variable `out_r` and a list of
//! support functions `Arc_r`. A value `e` of the output domain survives iff every
//! support function still has a support tuple inside the product of the input domains.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::model::{enumerate_solutions, ConstraintDef, ConstraintId, CspModel, Domain, DomainFamily, Relation, Value, VarId};

/// Position of a rule in its rule set plus its display label (`r1`, `r2`, ...).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RuleId {
    pub index: usize,
    pub label: String,
}

impl RuleId {
    /// The conventional id for position `index`: label `r<index + 1>`.
    pub fn numbered(index: usize) -> Self {
        RuleId { index, label: format!("r{}", index + 1) }
    }
}

impl fmt::Display for RuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label)
    }
}

/// A support function `arc : D_out -> P(∏ D_in)`.
///
/// Closed forms take one input variable unless stated otherwise; `f` is the input
/// value (or tuple) and `e` the output value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SupportFn {
    /// `{ f | e < f }`
    Above,
    /// `{ f | f < e }`
    Below,
    /// `{ f | f + c = e }`
    Shifted(Value),
    /// `{ f | f + c <= e }`, the lower-bound half of `out in min(in)+c..max(in)+c`.
    LowerBound(Value),
    /// `{ f | e <= f + c }`, the upper-bound half.
    UpperBound(Value),
    /// Two inputs `(a, b)`: `{ (a, b) | e = a + b }`.
    SumOf,
    /// Two inputs `(a, b)`: `{ (a, b) | e = a - b }`.
    DifferenceOf,
    /// Precomputed support tuples per output value. Missing keys have no support.
    Table(BTreeMap<Value, Vec<Vec<Value>>>),
}

impl SupportFn {
    fn input_arity(&self) -> Option<usize> {
        match self {
            SupportFn::Above
            | SupportFn::Below
            | SupportFn::Shifted(_)
            | SupportFn::LowerBound(_)
            | SupportFn::UpperBound(_) => Some(1),
            SupportFn::SumOf | SupportFn::DifferenceOf => Some(2),
            SupportFn::Table(_) => None,
        }
    }

    /// `arc(e)` restricted to `∏ universe`, in lexicographic order.
    pub fn supports(&self, e: Value, universe: &[Domain]) -> Vec<Vec<Value>> {
        let unary = |keep: &dyn Fn(Value) -> bool| -> Vec<Vec<Value>> {
            universe[0].iter().filter(|&f| keep(f)).map(|f| vec![f]).collect()
        };
        match self {
            SupportFn::Above => unary(&|f| e < f),
            SupportFn::Below => unary(&|f| f < e),
            SupportFn::Shifted(c) => unary(&|f| f + c == e),
            SupportFn::LowerBound(c) => unary(&|f| f + c <= e),
            SupportFn::UpperBound(c) => unary(&|f| e <= f + c),
            SupportFn::SumOf => universe[0]
                .iter()
                .filter(|a| universe[1].contains(e - a))
                .map(|a| vec![a, e - a])
                .collect(),
            SupportFn::DifferenceOf => universe[0]
                .iter()
                .filter(|a| universe[1].contains(a - e))
                .map(|a| vec![a, a - e])
                .collect(),
            SupportFn::Table(map) => map
                .get(&e)
                .map(|rows| {
                    rows.iter()
                        .filter(|row| row.iter().zip(universe).all(|(v, d)| d.contains(*v)))
                        .cloned()
                        .collect()
                })
                .unwrap_or_default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReductionRule {
    pub id: RuleId,
    inputs: Vec<VarId>,
    output: VarId,
    arcs: Vec<SupportFn>,
    origin: Option<ConstraintId>,
    // initial domains of `inputs`, so that arc(e) ⊆ ∏ D_in
    universe: Vec<Domain>,
}

impl ReductionRule {
    pub fn new(
        model: &CspModel,
        id: RuleId,
        inputs: Vec<VarId>,
        output: VarId,
        arcs: Vec<SupportFn>,
        origin: Option<ConstraintId>,
    ) -> Result<Self> {
        let n = model.num_vars();
        if inputs.is_empty() {
            return Err(Error::Input(format!("rule {id} has no input variable")));
        }
        if arcs.is_empty() {
            return Err(Error::Input(format!("rule {id} has no support function")));
        }
        if output.0 >= n || inputs.iter().any(|x| x.0 >= n) {
            return Err(Error::Input(format!("rule {id} refers to an unknown variable")));
        }
        for arc in &arcs {
            if let Some(k) = arc.input_arity() {
                if k != inputs.len() {
                    return Err(Error::Input(format!(
                        "rule {id}: support function expects {k} inputs, rule has {}",
                        inputs.len()
                    )));
                }
            }
        }
        let universe = inputs.iter().map(|x| model.domain(*x).clone()).collect();
        Ok(ReductionRule { id, inputs, output, arcs, origin, universe })
    }

    pub fn inputs(&self) -> &[VarId] {
        &self.inputs
    }

    pub fn output(&self) -> VarId {
        self.output
    }

    pub fn arcs(&self) -> &[SupportFn] {
        &self.arcs
    }

    pub fn origin(&self) -> Option<ConstraintId> {
        self.origin
    }

    /// The type `W = in_r ∪ {out_r}`, sorted.
    pub fn scope(&self) -> Vec<VarId> {
        let mut w = self.inputs.clone();
        w.push(self.output);
        w.sort();
        w.dedup();
        w
    }

    /// `arc(e)` for the support function at `arc_index`.
    pub fn arc(&self, arc_index: usize, e: Value) -> Vec<Vec<Value>> {
        self.arcs[arc_index].supports(e, &self.universe)
    }

    fn survives(&self, support: &[Value], d: &DomainFamily) -> bool {
        support.iter().zip(&self.inputs).all(|(v, x)| d[*x].contains(*v))
    }

    /// Index of the first support function with no surviving support for `e`.
    pub fn exhausted_arc(&self, e: Value, d: &DomainFamily) -> Option<usize> {
        (0..self.arcs.len()).find(|&k| !self.arc(k, e).iter().any(|f| self.survives(f, d)))
    }
}

/// Result of applying one rule to a family.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReductionOutcome {
    pub new_domain: Domain,
    /// Removed values with the index of the support function that ran out of support.
    pub removed: Vec<(Value, usize)>,
}

pub fn apply_rule(rule: &ReductionRule, d: &DomainFamily) -> ReductionOutcome {
    let mut new_domain = Domain::new();
    let mut removed = Vec::new();
    for e in d[rule.output].iter() {
        match rule.exhausted_arc(e, d) {
            Some(k) => removed.push((e, k)),
            None => {
                new_domain.insert(e);
            }
        }
    }
    ReductionOutcome { new_domain, removed }
}

/// `reduc_r(d)`: `d` with the output domain replaced by `r(d)`.
pub fn reduce_operator(rule: &ReductionRule, d: &DomainFamily) -> DomainFamily {
    let mut next = d.clone();
    next.set(rule.output, apply_rule(rule, d).new_domain);
    next
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RuleMode {
    /// Hyper-arc consistency from the constraint relation.
    Full,
    /// Bound reasoning (`x in min(y)+c..max(y)+c`); offset equalities only.
    Bounds,
}

/// One rule per scope variable, in scope order, numbered from `first_index`.
pub fn rules_for_constraint(
    model: &CspModel,
    c: &ConstraintDef,
    mode: RuleMode,
    first_index: usize,
) -> Result<Vec<ReductionRule>> {
    use SupportFn::*;
    let s = &c.scope;
    let specs: Vec<(Vec<VarId>, VarId, Vec<SupportFn>)> = match (&c.relation, mode) {
        (Relation::LessThan, RuleMode::Full) => {
            vec![(vec![s[1]], s[0], vec![Above]), (vec![s[0]], s[1], vec![Below])]
        }
        (Relation::OffsetEq(k), RuleMode::Full) => vec![
            (vec![s[1]], s[0], vec![Shifted(*k)]),
            (vec![s[0]], s[1], vec![Shifted(-*k)]),
        ],
        (Relation::OffsetEq(k), RuleMode::Bounds) => vec![
            (vec![s[1]], s[0], vec![LowerBound(*k), UpperBound(*k)]),
            (vec![s[0]], s[1], vec![LowerBound(-*k), UpperBound(-*k)]),
        ],
        (Relation::Sum3, RuleMode::Full) => vec![
            (vec![s[1], s[2]], s[0], vec![SumOf]),
            (vec![s[0], s[2]], s[1], vec![DifferenceOf]),
            (vec![s[0], s[1]], s[2], vec![DifferenceOf]),
        ],
        (Relation::Table(rows), RuleMode::Full) => (0..s.len())
            .map(|k| {
                let inputs: Vec<VarId> =
                    s.iter().enumerate().filter(|(i, _)| *i != k).map(|(_, x)| *x).collect();
                let mut map: BTreeMap<Value, Vec<Vec<Value>>> = BTreeMap::new();
                for row in rows {
                    let rest =
                        row.iter().enumerate().filter(|(i, _)| *i != k).map(|(_, v)| *v).collect();
                    map.entry(row[k]).or_default().push(rest);
                }
                for supports in map.values_mut() {
                    supports.sort();
                    supports.dedup();
                }
                (inputs, s[k], vec![Table(map)])
            })
            .collect(),
        (rel, RuleMode::Bounds) => {
            return Err(Error::Config(format!(
                "bounds rules are only defined for offset equalities, not {}",
                relation_kind(rel)
            )))
        }
    };
    specs
        .into_iter()
        .enumerate()
        .map(|(i, (inputs, output, arcs))| {
            ReductionRule::new(model, RuleId::numbered(first_index + i), inputs, output, arcs, Some(c.id))
        })
        .collect()
}

fn relation_kind(rel: &Relation) -> &'static str {
    match rel {
        Relation::LessThan => "`<`",
        Relation::OffsetEq(_) => "offset equalities",
        Relation::Sum3 => "ternary sums",
        Relation::Table(_) => "tables",
    }
}

/// Rules for the whole model, numbered `r1, r2, ...` in constraint order, then scope order.
///
/// `mode_of` picks the mode per constraint. `Bounds` is used only where it is defined
/// and falls back to `Full` elsewhere.
pub fn build_rules_with(
    model: &CspModel,
    mode_of: impl Fn(&ConstraintDef) -> RuleMode,
) -> Result<Vec<ReductionRule>> {
    let mut rules = Vec::new();
    for c in model.constraints() {
        let mode = match (mode_of(c), &c.relation) {
            (RuleMode::Bounds, Relation::OffsetEq(_)) => RuleMode::Bounds,
            _ => RuleMode::Full,
        };
        rules.extend(rules_for_constraint(model, c, mode, rules.len())?);
    }
    Ok(rules)
}

pub fn build_rules(model: &CspModel, mode: RuleMode) -> Result<Vec<ReductionRule>> {
    build_rules_with(model, |_| mode)
}

/// Family where every variable of `scope` is pinned to one value and the rest keep `D`.
fn pinned(model: &CspModel, scope: &[VarId], values: &[Value]) -> DomainFamily {
    let mut d = model.initial_family();
    for (x, v) in scope.iter().zip(values) {
        d.set(*x, Domain::singleton(*v));
    }
    d
}

/// Correctness w.r.t. a constraint: `r(({t_x})_{x∈W}) = {t_y}` for every `t ∈ T_c`.
pub fn check_correct_wrt_constraint(model: &CspModel, rule: &ReductionRule, c: &ConstraintDef) -> Result<bool> {
    if let Some(x) = rule.scope().iter().find(|x| !c.scope.contains(x)) {
        return Err(Error::Input(format!(
            "rule {} reads `{}`, which is not in the scope of {}",
            rule.id,
            model.name(*x),
            c.id
        )));
    }
    let y = c.scope.iter().position(|x| *x == rule.output).expect("output in scope");
    Ok(model.materialize(c).iter().all(|t| {
        let d = pinned(model, &c.scope, t);
        apply_rule(rule, &d).new_domain == Domain::singleton(t[y])
    }))
}

/// Correctness w.r.t. the model: the same condition over every solution of the CSP.
pub fn check_correct(model: &CspModel, rule: &ReductionRule) -> bool {
    let all: Vec<VarId> = model.var_ids().collect();
    enumerate_solutions(model, &model.initial_family()).iter().all(|t| {
        let d = pinned(model, &all, t.values());
        apply_rule(rule, &d).new_domain == Domain::singleton(t.get(rule.output))
    })
}
