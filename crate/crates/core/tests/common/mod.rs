#![allow(dead_code)]

use std::collections::BTreeSet;

use fdexplain::prelude::*;
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};

pub const X: VarId = VarId(0);
pub const Y: VarId = VarId(1);
pub const Z: VarId = VarId(2);

pub fn triangle() -> (CspModel, Vec<ReductionRule>) {
    let src = ModelSource::inline(
        "var x in {0,1,2};\nvar y in {0,1,2};\nvar z in {0,1,2};\n\
         constraint x < y;\nconstraint y < z;\nconstraint z < x;\n",
    );
    let model = parse_model(&src).unwrap();
    let rules = build_rules(&model, RuleMode::Full).unwrap();
    (model, rules)
}

pub fn leq() -> CspModel {
    parse_model(&ModelSource::inline(
        "var x in {0,1};\nvar y in {0,1};\nconstraint table(x, y) { (0,0), (0,1), (1,1) };\n",
    ))
    .unwrap()
}

pub fn sum3() -> (CspModel, Vec<ReductionRule>) {
    let model =
        parse_model(&ModelSource::inline("var x in {1,2,3};\nvar y in {1,2,3};\nvar z in {1,2,3};\nconstraint x = y ++ z;\n"))
            .unwrap();
    let rules = build_rules(&model, RuleMode::Full).unwrap();
    (model, rules)
}

pub fn rid(label_number: usize) -> RuleId {
    RuleId::numbered(label_number - 1)
}

pub fn script(labels: &[usize]) -> Vec<RuleId> {
    labels.iter().map(|&k| rid(k)).collect()
}

/// A random model with at most 4 variables, domains of at most 4 values and at most
/// 4 constraints, together with rules built in a random per-constraint mode.
pub struct RandomCase {
    pub seed: u64,
    pub model: CspModel,
    pub rules: Vec<ReductionRule>,
}

pub fn random_case(seed: u64) -> RandomCase {
    let mut rng = StdRng::seed_from_u64(seed);
    let n = rng.gen_range(2..=4);
    let mut model = CspModel::new();
    let pool: Vec<Value> = (-1..=4).collect();
    for i in 0..n {
        let size = rng.gen_range(1..=4);
        let dom: Domain = pool.choose_multiple(&mut rng, size).copied().collect();
        model.add_variable(format!("v{i}"), dom).unwrap();
    }
    let vars: Vec<VarId> = model.var_ids().collect();
    let n_cons = rng.gen_range(0..=4);
    for _ in 0..n_cons {
        let kind = rng.gen_range(0..4);
        let relation_and_scope = match kind {
            0 => Some((Relation::LessThan, pick(&mut rng, &vars, 2))),
            1 => Some((Relation::OffsetEq(rng.gen_range(-2..=2)), pick(&mut rng, &vars, 2))),
            2 if n >= 3 => Some((Relation::Sum3, pick(&mut rng, &vars, 3))),
            _ => {
                let arity = rng.gen_range(2..=n.min(3));
                let scope = pick(&mut rng, &vars, arity);
                Some((random_table(&mut rng, &model, &scope), scope))
            }
        };
        if let Some((rel, scope)) = relation_and_scope {
            model.add_constraint(scope, rel).unwrap();
        }
    }
    let modes: Vec<RuleMode> = model
        .constraints()
        .iter()
        .map(|_| if rng.gen_bool(0.5) { RuleMode::Bounds } else { RuleMode::Full })
        .collect();
    let rules = build_rules_with(&model, |c| modes[c.id.0]).unwrap();
    RandomCase { seed, model, rules }
}

fn pick(rng: &mut StdRng, vars: &[VarId], k: usize) -> Vec<VarId> {
    vars.choose_multiple(rng, k).copied().collect()
}

pub fn random_table(rng: &mut StdRng, model: &CspModel, scope: &[VarId]) -> Relation {
    let doms: Vec<&Domain> = scope.iter().map(|x| model.domain(*x)).collect();
    let rows = fdexplain::model::product(&doms).filter(|_| rng.gen_bool(0.5)).collect();
    Relation::table(rows)
}

/// The fair strategies compared in confluence checks.
pub fn strategies(k: usize) -> Vec<Strategy> {
    let mut all = vec![Strategy::Worklist, Strategy::RoundRobin];
    all.extend((0..k.saturating_sub(2) as u64).map(|s| Strategy::SeededRandom(1000 + s)));
    all
}

/// Least set of atoms closed under every deduction rule `(e, r, arc, t)`.
///
/// Reads the rules only through `arc(e)`; it never runs an iteration.
pub fn derivable_atoms(model: &CspModel, rules: &[ReductionRule]) -> BTreeSet<Atom> {
    let mut known: BTreeSet<Atom> = BTreeSet::new();
    loop {
        let mut grew = false;
        for r in rules {
            let y = r.output();
            for e in model.domain(y).iter() {
                let head = Atom::new(e, y);
                if known.contains(&head) {
                    continue;
                }
                let fires = (0..r.arcs().len()).any(|k| {
                    r.arc(k, e).iter().all(|f| {
                        f.iter().zip(r.inputs()).any(|(v, x)| known.contains(&Atom::new(*v, *x)))
                    })
                });
                if fires {
                    known.insert(head);
                    grew = true;
                }
            }
        }
        if !grew {
            return known;
        }
    }
}

/// Every `(e, y)` with `e ∈ D_y`.
pub fn all_atoms(model: &CspModel) -> Vec<Atom> {
    model.var_ids().flat_map(|y| model.domain(y).iter().map(move |e| Atom::new(e, y))).collect()
}

/// Applies exactly `script` and checks that node `i` (in the order of the script)
/// has its value withdrawn by step `i`.
pub fn replay_withdraws_root(
    model: &CspModel,
    rules: &[ReductionRule],
    expl: &Explanation,
) -> Result<bool> {
    let script = replay(expl, rules)?;
    let seq = run_script(model, rules, &script)?;
    let nodes: Vec<&Explanation> = expl.bfs().into_iter().rev().collect();
    let n = nodes.len();
    let every_node = nodes
        .iter()
        .enumerate()
        .all(|(i, node)| !seq[i + 1][node.root().var].contains(node.root().value));
    let root = expl.root();
    Ok(script.len() == n && every_node && !seq[n][root.var].contains(root.value))
}
