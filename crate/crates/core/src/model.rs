//! CSP instances: variables with finite integer domains, constraints over them,
//! families of domains (points of the search space) and the generate-and-test oracle.

use std::collections::{BTreeSet, HashSet};
use std::fmt;

use crate::error::{Error, Result};

pub type Value = i64;

/// Index of a variable inside its [`CspModel`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarId(pub usize);

impl VarId {
    pub fn index(self) -> usize {
        self.0
    }
}

/// Index of a constraint inside its [`CspModel`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ConstraintId(pub usize);

impl fmt::Display for ConstraintId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "c{}", self.0 + 1)
    }
}

/// A finite set of values, kept sorted.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Domain(BTreeSet<Value>);

impl Domain {
    pub fn new() -> Self {
        Domain(BTreeSet::new())
    }

    pub fn singleton(v: Value) -> Self {
        Domain(BTreeSet::from([v]))
    }

    pub fn contains(&self, v: Value) -> bool {
        self.0.contains(&v)
    }

    pub fn insert(&mut self, v: Value) -> bool {
        self.0.insert(v)
    }

    pub fn remove(&mut self, v: Value) -> bool {
        self.0.remove(&v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl DoubleEndedIterator<Item = Value> + '_ {
        self.0.iter().copied()
    }

    pub fn min(&self) -> Option<Value> {
        self.0.first().copied()
    }

    pub fn max(&self) -> Option<Value> {
        self.0.last().copied()
    }

    pub fn is_subset(&self, other: &Domain) -> bool {
        self.0.is_subset(&other.0)
    }

    pub fn intersection(&self, other: &Domain) -> Domain {
        Domain(self.0.intersection(&other.0).copied().collect())
    }
}

impl FromIterator<Value> for Domain {
    fn from_iter<I: IntoIterator<Item = Value>>(iter: I) -> Self {
        Domain(iter.into_iter().collect())
    }
}

impl<const N: usize> From<[Value; N]> for Domain {
    fn from(values: [Value; N]) -> Self {
        values.into_iter().collect()
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, v) in self.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{v}")?;
        }
        f.write_str("}")
    }
}

/// One domain per model variable, indexed by [`VarId`].
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DomainFamily {
    domains: Vec<Domain>,
}

impl DomainFamily {
    pub fn new(domains: Vec<Domain>) -> Self {
        DomainFamily { domains }
    }

    pub fn len(&self) -> usize {
        self.domains.len()
    }

    pub fn is_empty(&self) -> bool {
        self.domains.is_empty()
    }

    pub fn get(&self, x: VarId) -> &Domain {
        &self.domains[x.0]
    }

    pub fn set(&mut self, x: VarId, d: Domain) {
        self.domains[x.0] = d;
    }

    pub fn domains(&self) -> &[Domain] {
        &self.domains
    }

    pub fn iter(&self) -> impl Iterator<Item = (VarId, &Domain)> {
        self.domains.iter().enumerate().map(|(i, d)| (VarId(i), d))
    }

    /// First variable whose domain is empty.
    pub fn first_empty(&self) -> Option<VarId> {
        self.domains.iter().position(Domain::is_empty).map(VarId)
    }

    pub fn contains_assignment(&self, t: &Assignment) -> bool {
        t.values().len() == self.domains.len()
            && t.values().iter().zip(&self.domains).all(|(v, d)| d.contains(*v))
    }
}

impl std::ops::Index<VarId> for DomainFamily {
    type Output = Domain;

    fn index(&self, x: VarId) -> &Domain {
        &self.domains[x.0]
    }
}

/// Pointwise inclusion `a ⊑ b`.
pub fn family_leq(a: &DomainFamily, b: &DomainFamily) -> Result<bool> {
    if a.len() != b.len() {
        return Err(Error::Input(format!(
            "families over {} and {} variables cannot be compared",
            a.len(),
            b.len()
        )));
    }
    Ok(a.domains.iter().zip(&b.domains).all(|(x, y)| x.is_subset(y)))
}

/// A value for every model variable, indexed by [`VarId`].
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Assignment(Vec<Value>);

impl Assignment {
    pub fn new(values: Vec<Value>) -> Self {
        Assignment(values)
    }

    pub fn values(&self) -> &[Value] {
        &self.0
    }

    pub fn get(&self, x: VarId) -> Value {
        self.0[x.0]
    }

    pub fn project(&self, scope: &[VarId]) -> Vec<Value> {
        scope.iter().map(|x| self.0[x.0]).collect()
    }
}

/// The relation of a constraint, read over the constraint's scope in order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Relation {
    /// `x < y`
    LessThan,
    /// `x = y + c`
    OffsetEq(Value),
    /// `x = y + z`
    Sum3,
    /// Explicit tuples, sorted and without duplicates.
    Table(Vec<Vec<Value>>),
}

impl Relation {
    pub fn table(mut tuples: Vec<Vec<Value>>) -> Self {
        tuples.sort();
        tuples.dedup();
        Relation::Table(tuples)
    }

    /// Arity the form demands, `None` for tables (any arity of at least two).
    pub fn fixed_arity(&self) -> Option<usize> {
        match self {
            Relation::LessThan | Relation::OffsetEq(_) => Some(2),
            Relation::Sum3 => Some(3),
            Relation::Table(_) => None,
        }
    }

    pub fn holds(&self, t: &[Value]) -> bool {
        match self {
            Relation::LessThan => t[0] < t[1],
            Relation::OffsetEq(c) => t[0] == t[1] + c,
            Relation::Sum3 => t[0] == t[1] + t[2],
            Relation::Table(rows) => rows.binary_search_by(|row| row.as_slice().cmp(t)).is_ok(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstraintDef {
    pub id: ConstraintId,
    pub scope: Vec<VarId>,
    pub relation: Relation,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Variable {
    pub name: String,
    pub domain: Domain,
}

/// Variables, their initial domains `D`, and the constraints.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CspModel {
    variables: Vec<Variable>,
    constraints: Vec<ConstraintDef>,
}

impl CspModel {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_variable(&mut self, name: impl Into<String>, domain: Domain) -> Result<VarId> {
        let name = name.into();
        if domain.is_empty() {
            return Err(Error::Input(format!("variable `{name}` has an empty domain")));
        }
        if self.var_by_name(&name).is_some() {
            return Err(Error::Input(format!("variable `{name}` declared twice")));
        }
        self.variables.push(Variable { name, domain });
        Ok(VarId(self.variables.len() - 1))
    }

    pub fn add_constraint(&mut self, scope: Vec<VarId>, relation: Relation) -> Result<ConstraintId> {
        if let Some(x) = scope.iter().find(|x| x.0 >= self.variables.len()) {
            return Err(Error::Input(format!("scope refers to unknown variable #{}", x.0)));
        }
        let distinct: HashSet<_> = scope.iter().collect();
        if distinct.len() != scope.len() {
            return Err(Error::Input("a constraint scope may not repeat a variable".into()));
        }
        match relation.fixed_arity() {
            Some(n) if n != scope.len() => {
                return Err(Error::Input(format!(
                    "constraint form expects {n} variables, got {}",
                    scope.len()
                )))
            }
            None if scope.len() < 2 => {
                return Err(Error::Input("table constraints need at least two variables".into()))
            }
            _ => {}
        }
        if let Relation::Table(rows) = &relation {
            for row in rows {
                if row.len() != scope.len() {
                    return Err(Error::Input(format!(
                        "table row of length {} over a scope of {} variables",
                        row.len(),
                        scope.len()
                    )));
                }
                for (v, x) in row.iter().zip(&scope) {
                    if !self.domain(*x).contains(*v) {
                        return Err(Error::Input(format!(
                            "table value {v} is outside the domain of `{}`",
                            self.name(*x)
                        )));
                    }
                }
            }
        }
        let id = ConstraintId(self.constraints.len());
        self.constraints.push(ConstraintDef { id, scope, relation });
        Ok(id)
    }

    pub fn num_vars(&self) -> usize {
        self.variables.len()
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn var_ids(&self) -> impl Iterator<Item = VarId> {
        (0..self.variables.len()).map(VarId)
    }

    pub fn constraints(&self) -> &[ConstraintDef] {
        &self.constraints
    }

    pub fn constraint(&self, c: ConstraintId) -> &ConstraintDef {
        &self.constraints[c.0]
    }

    pub fn name(&self, x: VarId) -> &str {
        &self.variables[x.0].name
    }

    pub fn domain(&self, x: VarId) -> &Domain {
        &self.variables[x.0].domain
    }

    pub fn var_by_name(&self, name: &str) -> Option<VarId> {
        self.variables.iter().position(|v| v.name == name).map(VarId)
    }

    /// The initial family `D`.
    pub fn initial_family(&self) -> DomainFamily {
        DomainFamily::new(self.variables.iter().map(|v| v.domain.clone()).collect())
    }

    /// Checks that `d` has one domain per variable, each inside the initial one.
    pub fn check_family(&self, d: &DomainFamily) -> Result<()> {
        if d.len() != self.num_vars() {
            return Err(Error::Input(format!(
                "family has {} domains, model has {} variables",
                d.len(),
                self.num_vars()
            )));
        }
        for (x, dom) in d.iter() {
            if !dom.is_subset(self.domain(x)) {
                return Err(Error::Input(format!(
                    "domain {dom} of `{}` is not inside its initial domain",
                    self.name(x)
                )));
            }
        }
        Ok(())
    }

    /// All tuples of `∏ D|scope` satisfying the constraint. Oracle use only.
    pub fn materialize(&self, c: &ConstraintDef) -> Vec<Vec<Value>> {
        let doms: Vec<&Domain> = c.scope.iter().map(|x| self.domain(*x)).collect();
        product(&doms).filter(|t| c.relation.holds(t)).collect()
    }

    pub fn format_family(&self, d: &DomainFamily) -> String {
        let mut out = String::new();
        for (x, dom) in d.iter() {
            out.push_str(&format!("{} in {}\n", self.name(x), dom));
        }
        out
    }

    pub fn format_assignment(&self, t: &Assignment) -> String {
        self.var_ids()
            .map(|x| format!("{}={}", self.name(x), t.get(x)))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

/// Cartesian product of the given domains, in lexicographic order.
pub fn product<'a>(doms: &[&'a Domain]) -> impl Iterator<Item = Vec<Value>> + 'a {
    let cols: Vec<Vec<Value>> = doms.iter().map(|d| d.iter().collect()).collect();
    let empty = cols.iter().any(Vec::is_empty);
    let mut cursor = vec![0usize; cols.len()];
    let mut done = empty;
    std::iter::from_fn(move || {
        if done {
            return None;
        }
        let item: Vec<Value> = cursor.iter().zip(&cols).map(|(&i, col)| col[i]).collect();
        // odometer, last position fastest
        let mut k = cols.len();
        loop {
            if k == 0 {
                done = true;
                break;
            }
            k -= 1;
            cursor[k] += 1;
            if cursor[k] < cols[k].len() {
                break;
            }
            cursor[k] = 0;
        }
        Some(item)
    })
}

pub fn is_solution(model: &CspModel, t: &Assignment) -> Result<bool> {
    if t.values().len() != model.num_vars() {
        return Err(Error::Input(format!(
            "tuple assigns {} values, model has {} variables",
            t.values().len(),
            model.num_vars()
        )));
    }
    for x in model.var_ids() {
        if !model.domain(x).contains(t.get(x)) {
            return Err(Error::Input(format!(
                "value {} is outside the domain of `{}`",
                t.get(x),
                model.name(x)
            )));
        }
    }
    Ok(model
        .constraints()
        .iter()
        .all(|c| c.relation.holds(&t.project(&c.scope))))
}

/// Generate and test over `∏ within`, lexicographic by variable index then value.
pub fn enumerate_solutions(model: &CspModel, within: &DomainFamily) -> Vec<Assignment> {
    let doms: Vec<&Domain> = within.domains().iter().collect();
    product(&doms)
        .map(Assignment::new)
        .filter(|t| {
            model
                .constraints()
                .iter()
                .all(|c| c.relation.holds(&t.project(&c.scope)))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn leq() -> CspModel {
        let mut m = CspModel::new();
        let x = m.add_variable("x", Domain::from([0, 1])).unwrap();
        let y = m.add_variable("y", Domain::from([0, 1])).unwrap();
        m.add_constraint(vec![x, y], Relation::table(vec![vec![0, 0], vec![0, 1], vec![1, 1]]))
            .unwrap();
        m
    }

    fn triangle() -> CspModel {
        let mut m = CspModel::new();
        let v: Vec<VarId> = ["x", "y", "z"]
            .iter()
            .map(|n| m.add_variable(*n, Domain::from([0, 1, 2])).unwrap())
            .collect();
        for (a, b) in [(0, 1), (1, 2), (2, 0)] {
            m.add_constraint(vec![v[a], v[b]], Relation::LessThan).unwrap();
        }
        m
    }

    #[test]
    fn leq_solutions() {
        let m = leq();
        assert!(is_solution(&m, &Assignment::new(vec![0, 1])).unwrap());
        assert!(!is_solution(&m, &Assignment::new(vec![1, 0])).unwrap());
        let sols = enumerate_solutions(&m, &m.initial_family());
        let got: Vec<_> = sols.iter().map(|t| t.values().to_vec()).collect();
        assert_eq!(got, vec![vec![0, 0], vec![0, 1], vec![1, 1]]);
    }

    #[test]
    fn unconstrained_model_accepts_everything() {
        let mut m = CspModel::new();
        m.add_variable("a", Domain::from([3, 4])).unwrap();
        assert!(is_solution(&m, &Assignment::new(vec![4])).unwrap());
    }

    #[test]
    fn malformed_tuples_are_rejected() {
        let m = leq();
        assert!(is_solution(&m, &Assignment::new(vec![0])).is_err());
        assert!(is_solution(&m, &Assignment::new(vec![0, 1, 1])).is_err());
        assert!(is_solution(&m, &Assignment::new(vec![0, 5])).is_err());
    }

    #[test]
    fn triangle_has_no_solution() {
        let m = triangle();
        let full = m.initial_family();
        assert_eq!(product(&full.domains().iter().collect::<Vec<_>>()).count(), 27);
        assert!(enumerate_solutions(&m, &full).is_empty());
    }

    #[test]
    fn empty_domain_in_within_gives_no_tuple() {
        let m = leq();
        let mut d = m.initial_family();
        d.set(VarId(1), Domain::new());
        assert!(enumerate_solutions(&m, &d).is_empty());
    }

    #[test]
    fn family_order() {
        let m = leq();
        let b = m.initial_family();
        let mut a = b.clone();
        assert!(family_leq(&a, &b).unwrap());
        a.set(VarId(0), Domain::from([0]));
        assert!(family_leq(&a, &b).unwrap());
        a.set(VarId(0), Domain::from([2]));
        assert!(!family_leq(&a, &b).unwrap());
        let short = DomainFamily::new(vec![Domain::from([0])]);
        assert!(family_leq(&short, &b).is_err());
    }

    #[test]
    fn model_invariants_enforced() {
        let mut m = CspModel::new();
        assert!(m.add_variable("x", Domain::new()).is_err());
        let x = m.add_variable("x", Domain::from([0])).unwrap();
        assert!(m.add_variable("x", Domain::from([1])).is_err());
        let y = m.add_variable("y", Domain::from([0, 1])).unwrap();
        assert!(m.add_constraint(vec![x, x], Relation::LessThan).is_err());
        assert!(m.add_constraint(vec![x], Relation::LessThan).is_err());
        assert!(m.add_constraint(vec![x, y], Relation::Sum3).is_err());
        assert!(m.add_constraint(vec![x, VarId(7)], Relation::LessThan).is_err());
        assert!(m
            .add_constraint(vec![x, y], Relation::table(vec![vec![1, 0]]))
            .is_err());
        assert!(m.add_constraint(vec![y, x], Relation::table(vec![vec![1, 0]])).is_ok());
    }
}
