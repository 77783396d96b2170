//! Iterations of a rule set from the initial domains.
//!
//! [`iterate`] applies one rule per step and logs every withdrawal together with
//! the deduction-rule instance that justifies it. Scheduling is change driven: a
//! rule is pending while one of its input domains shrank since it last ran, and
//! the iteration ends when nothing is pending. [`simultaneous_closure`] reaches the
//! same family with the intersection operator and serves as the reference.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::explanation::{deduction_instance, Atom, DeductionRule};
use crate::model::{CspModel, DomainFamily, Value, VarId};
use crate::rules::{apply_rule, reduce_operator, ReductionRule, RuleId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Strategy {
    /// FIFO on the time a rule became pending, rule index breaking ties.
    Worklist,
    /// Cycle through the rules in order, running the pending ones.
    RoundRobin,
    /// Uniform choice among pending rules.
    SeededRandom(u64),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Run {
    /// Apply exactly these rules first, no-ops included, then continue with [`Strategy::Worklist`].
    Scripted(Vec<RuleId>),
    Strategy(Strategy),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WithdrawalEvent {
    pub value: Value,
    pub variable: VarId,
    /// The `i` with `value ∈ d^{i-1}` and `value ∉ d^i`.
    pub step: usize,
    pub rule: RuleId,
    pub arc_index: usize,
    /// Deduction-rule instance attached when the event was recorded.
    pub deduction: DeductionRule,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WithdrawalTrace {
    pub events: Vec<WithdrawalEvent>,
    index: BTreeMap<Atom, usize>,
    pub applied: Vec<RuleId>,
    pub final_family: DomainFamily,
}

impl WithdrawalTrace {
    fn new(initial: DomainFamily) -> Self {
        WithdrawalTrace { events: Vec::new(), index: BTreeMap::new(), applied: Vec::new(), final_family: initial }
    }

    pub fn event(&self, value: Value, variable: VarId) -> Option<&WithdrawalEvent> {
        self.index.get(&Atom::new(value, variable)).map(|&i| &self.events[i])
    }

    pub fn withdrawal_step(&self, atom: Atom) -> Option<usize> {
        self.index.get(&atom).map(|&i| self.events[i].step)
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// One line per event: `step<TAB>rule_label<TAB>var=value<TAB>arc_index`.
    pub fn export_text(&self, model: &CspModel) -> String {
        let mut out = String::new();
        for ev in &self.events {
            let _ = writeln!(
                out,
                "{}\t{}\t{}={}\t{}",
                ev.step,
                ev.rule.label,
                model.name(ev.variable),
                ev.value,
                ev.arc_index
            );
        }
        out
    }
}

/// A line of the exported trace format.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceLine {
    pub step: usize,
    pub rule_label: String,
    pub var_name: String,
    pub value: Value,
    pub arc_index: usize,
}

pub fn parse_trace_text(text: &str) -> Result<Vec<TraceLine>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(n, line)| {
            let bad = || Error::Input(format!("trace line {}: malformed `{line}`", n + 1));
            let cols: Vec<&str> = line.split('\t').collect();
            let [step, rule, assign, arc] = cols[..] else { return Err(bad()) };
            let (var, value) = assign.split_once('=').ok_or_else(bad)?;
            Ok(TraceLine {
                step: step.parse().map_err(|_| bad())?,
                rule_label: rule.to_string(),
                var_name: var.to_string(),
                value: value.parse().map_err(|_| bad())?,
                arc_index: arc.parse().map_err(|_| bad())?,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Closed,
    /// Stopped early because this variable's domain became empty.
    Failed(VarId),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClosureResult {
    pub closure: DomainFamily,
    pub trace: WithdrawalTrace,
    pub status: Status,
}

struct Scheduler {
    pending: Vec<Option<u64>>,
    clock: u64,
    // rules reading each variable
    readers: Vec<Vec<usize>>,
    cursor: usize,
    rng: Option<ChaCha8Rng>,
}

impl Scheduler {
    fn new(num_vars: usize, rules: &[ReductionRule]) -> Self {
        let mut readers = vec![Vec::new(); num_vars];
        for (k, r) in rules.iter().enumerate() {
            for x in r.inputs() {
                if !readers[x.0].contains(&k) {
                    readers[x.0].push(k);
                }
            }
        }
        Scheduler { pending: vec![Some(0); rules.len()], clock: 1, readers, cursor: 0, rng: None }
    }

    fn applied(&mut self, k: usize, changed: Option<VarId>) {
        self.pending[k] = None;
        if let Some(x) = changed {
            for &j in &self.readers[x.0] {
                if self.pending[j].is_none() {
                    self.pending[j] = Some(self.clock);
                    self.clock += 1;
                }
            }
        }
    }

    fn next(&mut self, strategy: Strategy) -> Option<usize> {
        let n = self.pending.len();
        match strategy {
            Strategy::Worklist => (0..n)
                .filter_map(|k| self.pending[k].map(|t| (t, k)))
                .min()
                .map(|(_, k)| k),
            Strategy::RoundRobin => {
                let k = (0..n).map(|i| (self.cursor + i) % n).find(|&k| self.pending[k].is_some())?;
                self.cursor = (k + 1) % n;
                Some(k)
            }
            Strategy::SeededRandom(seed) => {
                let candidates: Vec<usize> = (0..n).filter(|&k| self.pending[k].is_some()).collect();
                if candidates.is_empty() {
                    return None;
                }
                let rng = self.rng.get_or_insert_with(|| ChaCha8Rng::seed_from_u64(seed));
                Some(candidates[rng.gen_range(0..candidates.len())])
            }
        }
    }
}

fn rule_position(rules: &[ReductionRule], id: &RuleId) -> Result<usize> {
    rules.iter().position(|r| &r.id == id).ok_or_else(|| Error::UnknownRule(id.label.clone()))
}

/// Runs the iteration `d^0 = D`, `d^{j+1} = reduc_{r_{j+1}}(d^j)` until no rule is pending,
/// or until a domain empties when `stop_on_failure` is set.
pub fn iterate(model: &CspModel, rules: &[ReductionRule], run: &Run, stop_on_failure: bool) -> Result<ClosureResult> {
    let mut sched = Scheduler::new(model.num_vars(), rules);
    let mut trace = WithdrawalTrace::new(model.initial_family());

    let (script, strategy) = match run {
        Run::Scripted(ids) => (
            ids.iter().map(|id| rule_position(rules, id)).collect::<Result<Vec<_>>>()?,
            Strategy::Worklist,
        ),
        Run::Strategy(s) => (Vec::new(), *s),
    };

    let mut script = script.into_iter();
    loop {
        let k = match script.next() {
            Some(k) => k,
            None => match sched.next(strategy) {
                Some(k) => k,
                None => break,
            },
        };
        let changed = step(&rules[k], &mut trace)?;
        sched.applied(k, changed);
        if let Some(x) = changed {
            if stop_on_failure && trace.final_family[x].is_empty() {
                return Ok(ClosureResult {
                    closure: trace.final_family.clone(),
                    trace,
                    status: Status::Failed(x),
                });
            }
        }
    }
    Ok(ClosureResult { closure: trace.final_family.clone(), trace, status: Status::Closed })
}

/// Applies one rule to the trace's current family; returns the output variable if it shrank.
fn step(rule: &ReductionRule, trace: &mut WithdrawalTrace) -> Result<Option<VarId>> {
    let i = trace.applied.len() + 1;
    trace.applied.push(rule.id.clone());
    let outcome = apply_rule(rule, &trace.final_family);
    if outcome.removed.is_empty() {
        return Ok(None);
    }
    // deduction instances only look at events of earlier steps
    let mut fresh = Vec::with_capacity(outcome.removed.len());
    for &(e, arc_index) in &outcome.removed {
        let deduction = deduction_instance(rule, e, arc_index, |a| trace.withdrawal_step(a))?;
        fresh.push(WithdrawalEvent {
            value: e,
            variable: rule.output(),
            step: i,
            rule: rule.id.clone(),
            arc_index,
            deduction,
        });
    }
    for ev in fresh {
        trace.index.insert(Atom::new(ev.value, ev.variable), trace.events.len());
        trace.events.push(ev);
    }
    trace.final_family.set(rule.output(), outcome.new_domain);
    Ok(Some(rule.output()))
}

/// The families `d^0, ..., d^n` along exactly the given rule sequence.
pub fn run_script(model: &CspModel, rules: &[ReductionRule], script: &[RuleId]) -> Result<Vec<DomainFamily>> {
    let mut d = model.initial_family();
    let mut seq = vec![d.clone()];
    for id in script {
        let r = &rules[rule_position(rules, id)?];
        d = reduce_operator(r, &d);
        seq.push(d.clone());
    }
    Ok(seq)
}

/// Fixpoint of `d ↦ (⋂_r reduc_r(d)_x)_x` from `D`.
pub fn simultaneous_closure(model: &CspModel, rules: &[ReductionRule]) -> DomainFamily {
    let mut d = model.initial_family();
    loop {
        let mut next = d.clone();
        for r in rules {
            let y = r.output();
            let reduced = apply_rule(r, &d).new_domain;
            next.set(y, next[y].intersection(&reduced));
        }
        if next == d {
            return d;
        }
        d = next;
    }
}

pub fn is_common_fixpoint(rules: &[ReductionRule], d: &DomainFamily) -> bool {
    rules.iter().all(|r| reduce_operator(r, d) == *d)
}
