//! Abstract models and their possibility closure.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::algebra::{Attr, Catalog, Name, SubstrateId, Task, Variable};
use crate::conservation::EnergyLabeling;
use crate::relation::{Conflict, PossibilityRelation, Status, StatusLookup};

/// Declared substrates, attributes, facts and variables of a finite model.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AbstractModel {
    pub catalog: Catalog,
    pub labeling: Option<EnergyLabeling>,
    pub facts: PossibilityRelation,
    /// Declared verdicts on "this variable is distinguishable".
    pub distinguishing: BTreeMap<Variable, Status>,
    pub variables: BTreeMap<Name, Variable>,
}

impl AbstractModel {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn declare(&mut self, task: Task, status: Status) -> Result<bool, Conflict> {
        self.facts.insert(task, status)
    }

    pub fn declare_distinguishing(&mut self, y: Variable, status: Status) -> Result<(), ClosureError> {
        match self.distinguishing.get(&y) {
            Some(&s) if s != status => Err(ClosureError::ConflictingDistinguishing(y)),
            _ => {
                self.distinguishing.insert(y, status);
                Ok(())
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ClosureRuleSet {
    pub serial: bool,
    pub parallel: bool,
    /// `T ⊗ id` and `id ⊗ T` from `T`.
    pub spectator: bool,
}

impl Default for ClosureRuleSet {
    fn default() -> Self {
        ClosureRuleSet {
            serial: true,
            parallel: true,
            spectator: true,
        }
    }
}

impl ClosureRuleSet {
    pub fn none() -> Self {
        ClosureRuleSet {
            serial: false,
            parallel: false,
            spectator: false,
        }
    }
}

/// How a Possible fact was obtained.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Derivation {
    Declared,
    /// `first` is a fact or a restriction of one.
    Serial { first: Task, second: Task },
    Parallel { left: Task, right: Task },
    Spectator { core: Task, spectator: Attr, before: bool },
}

impl Derivation {
    pub fn rule(&self) -> &'static str {
        match self {
            Derivation::Declared => "declared",
            Derivation::Serial { .. } => "serial",
            Derivation::Parallel { .. } => "parallel",
            Derivation::Spectator { .. } => "spectator",
        }
    }

    pub fn premises(&self) -> Vec<&Task> {
        match self {
            Derivation::Declared | Derivation::Spectator { .. } => match self {
                Derivation::Spectator { core, .. } => vec![core],
                _ => vec![],
            },
            Derivation::Serial { first, second } => vec![first, second],
            Derivation::Parallel { left, right } => vec![left, right],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceStep {
    pub task: Task,
    pub rule: &'static str,
    pub premises: Vec<Task>,
}

impl fmt::Display for TraceStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} [{}]", self.task, self.rule)?;
        for p in &self.premises {
            write!(f, " <- {p}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ClosureError {
    #[error("inconsistent model: {possible} is possible but {impossible} is declared impossible")]
    InconsistentModel {
        possible: Task,
        impossible: Task,
        trace: Vec<TraceStep>,
    },
    #[error("closure exceeded {limit} facts")]
    TooLarge { limit: usize },
    #[error("variable {0} is declared both distinguishable and not")]
    ConflictingDistinguishing(Variable),
}

/// Upper bound on closed facts before giving up.
pub const MAX_FACTS: usize = 200_000;

/// A closed possibility relation with derivations for every Possible fact.
#[derive(Debug, Clone)]
pub struct ClosedRelation {
    relation: PossibilityRelation,
    derivations: BTreeMap<Task, Derivation>,
    by_substrate: BTreeMap<SubstrateId, Vec<Task>>,
    impossible_by_substrate: BTreeMap<SubstrateId, Vec<Task>>,
    rules: ClosureRuleSet,
    depth: usize,
}

/// Slot permutation `σ` with `output = input∘σ` on every pair and the
/// substrate fixed by `σ`. Identity tasks give the identity permutation.
pub fn structural_permutation(task: &Task) -> Option<Vec<usize>> {
    let n = task.substrate().arity();
    let parts = task.substrate().parts();
    let pairs: Vec<(&Attr, &Attr)> = task.pairs().collect();
    // Candidate sources per output slot, intersected over all pairs.
    let mut cands: Vec<Vec<usize>> = (0..n)
        .map(|i| (0..n).filter(|&j| parts[j] == parts[i]).collect())
        .collect();
    for (a, b) in &pairs {
        for (i, c) in cands.iter_mut().enumerate() {
            c.retain(|&j| a.names()[j] == b.names()[i]);
        }
    }
    let mut perm = vec![usize::MAX; n];
    let mut used = vec![false; n];
    fn assign(i: usize, cands: &[Vec<usize>], perm: &mut [usize], used: &mut [bool]) -> bool {
        if i == cands.len() {
            return true;
        }
        for &j in &cands[i] {
            if !used[j] {
                used[j] = true;
                perm[i] = j;
                if assign(i + 1, cands, perm, used) {
                    return true;
                }
                used[j] = false;
            }
        }
        false
    }
    if assign(0, &cands, &mut perm, &mut used) {
        Some(perm)
    } else {
        None
    }
}

pub fn is_structural(task: &Task) -> bool {
    task.is_identity() || structural_permutation(task).is_some()
}

/// Strips slots on which every pair is the identity. Returns the remaining
/// task, or `None` if nothing can be stripped or the remainder is not a
/// function of its inputs.
pub fn strip_spectators(task: &Task) -> Option<Task> {
    let n = task.substrate().arity();
    let keep: Vec<usize> = (0..n)
        .filter(|&i| task.pairs().any(|(a, b)| a.names()[i] != b.names()[i]))
        .collect();
    if keep.is_empty() || keep.len() == n {
        return None;
    }
    let sub = SubstrateId::from_parts(keep.iter().map(|&i| task.substrate().parts()[i].clone()).collect());
    let mut pairs: BTreeMap<Attr, Attr> = BTreeMap::new();
    for (a, b) in task.pairs() {
        let (pa, pb) = (a.project(&keep), b.project(&keep));
        match pairs.get(&pa) {
            Some(prev) if *prev != pb => return None,
            _ => {
                pairs.insert(pa, pb);
            }
        }
    }
    Task::new(sub, pairs).ok()
}

/// Why a status lookup answered the way it did.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Justification {
    Structural,
    Fact,
    SubtaskOf(Task),
    ContainsImpossible(Task),
    Spectators(Task),
    None,
}

impl ClosedRelation {
    pub fn relation(&self) -> &PossibilityRelation {
        &self.relation
    }

    pub fn rules(&self) -> ClosureRuleSet {
        self.rules
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn derivation(&self, task: &Task) -> Option<&Derivation> {
        self.derivations.get(task)
    }

    pub fn possible_on(&self, s: &SubstrateId) -> &[Task] {
        self.by_substrate.get(s).map_or(&[], |v| v.as_slice())
    }

    /// Status with its justification; see [`StatusLookup`] for the order.
    pub fn explain(&self, task: &Task) -> (Status, Justification) {
        if is_structural(task) {
            return (Status::Possible, Justification::Structural);
        }
        match self.relation.get(task) {
            Status::Unknown => {}
            s => return (s, Justification::Fact),
        }
        if let Some(p) = self.possible_on(task.substrate()).iter().find(|p| task.is_subtask_of(p)) {
            return (Status::Possible, Justification::SubtaskOf(p.clone()));
        }
        if let Some(i) = self
            .impossible_by_substrate
            .get(task.substrate())
            .and_then(|v| v.iter().find(|i| i.is_subtask_of(task)))
        {
            return (Status::Impossible, Justification::ContainsImpossible(i.clone()));
        }
        if self.rules.spectator {
            if let Some(core) = strip_spectators(task) {
                if self.explain(&core).0 == Status::Possible {
                    return (Status::Possible, Justification::Spectators(core));
                }
            }
        }
        (Status::Unknown, Justification::None)
    }

    /// Flattened derivation of a Possible fact, premises first.
    pub fn trace(&self, task: &Task) -> Vec<TraceStep> {
        trace_of(&self.derivations, task)
    }

    /// Recomputes a derived fact from its premises with the algebra
    /// operations and checks that the premises are themselves supported.
    pub fn replay(&self, task: &Task) -> bool {
        let Some(d) = self.derivations.get(task) else {
            return false;
        };
        let supported = |t: &Task| self.explain(t).0 == Status::Possible;
        match d {
            Derivation::Declared => true,
            Derivation::Serial { first, second } => {
                supported(first) && supported(second) && first.serial(second).ok().as_ref() == Some(task)
            }
            Derivation::Parallel { left, right } => {
                supported(left) && supported(right) && &left.parallel(right) == task
            }
            Derivation::Spectator { core, spectator, before } => {
                let owner = spectator_substrate(spectator, core, *before, task);
                let id = Task::identity(owner, [spectator.clone()]).ok();
                let rebuilt = id.map(|id| if *before { id.parallel(core) } else { core.parallel(&id) });
                supported(core) && rebuilt.as_ref() == Some(task)
            }
        }
    }
}

fn spectator_substrate(_a: &Attr, core: &Task, before: bool, task: &Task) -> SubstrateId {
    let parts = task.substrate().parts();
    let k = core.substrate().arity();
    if before {
        SubstrateId::from_parts(parts[..parts.len() - k].to_vec())
    } else {
        SubstrateId::from_parts(parts[k..].to_vec())
    }
}

fn trace_of(derivations: &BTreeMap<Task, Derivation>, task: &Task) -> Vec<TraceStep> {
    let mut out = Vec::new();
    let mut seen = BTreeSet::new();
    fn go(
        d: &BTreeMap<Task, Derivation>,
        t: &Task,
        seen: &mut BTreeSet<Task>,
        out: &mut Vec<TraceStep>,
    ) {
        if !seen.insert(t.clone()) {
            return;
        }
        let Some(der) = d.get(t) else {
            return;
        };
        for p in der.premises() {
            // Restricted premises are not facts themselves; follow their source.
            if d.contains_key(p) {
                go(d, p, seen, out);
            } else if let Some((src, _)) = d.iter().find(|(s, _)| p.is_subtask_of(s)) {
                go(d, src, seen, out);
            }
        }
        out.push(TraceStep {
            task: t.clone(),
            rule: der.rule(),
            premises: der.premises().into_iter().cloned().collect(),
        });
    }
    go(derivations, task, &mut seen, &mut out);
    out
}

/// Least fixpoint of the enabled rules over tasks of arity at most `depth`.
pub fn close(model: &AbstractModel, rules: ClosureRuleSet, depth: usize) -> Result<ClosedRelation, ClosureError> {
    let mut derivations: BTreeMap<Task, Derivation> = BTreeMap::new();
    let mut order: Vec<Task> = Vec::new();
    let impossible: Vec<Task> = model.facts.impossible().cloned().collect();

    let check = |t: &Task, derivations: &BTreeMap<Task, Derivation>| -> Result<(), ClosureError> {
        if let Some(i) = impossible.iter().find(|i| i.is_subtask_of(t)) {
            return Err(ClosureError::InconsistentModel {
                possible: t.clone(),
                impossible: i.clone(),
                trace: trace_of(derivations, t),
            });
        }
        Ok(())
    };

    for i in &impossible {
        if is_structural(i) {
            return Err(ClosureError::InconsistentModel {
                possible: i.clone(),
                impossible: i.clone(),
                trace: Vec::new(),
            });
        }
    }
    for t in model.facts.possible() {
        derivations.insert(t.clone(), Derivation::Declared);
        order.push(t.clone());
        check(t, &derivations)?;
    }

    let spectators: Vec<(SubstrateId, Attr)> = model
        .catalog
        .atomic_substrates()
        .flat_map(|s| {
            model
                .catalog
                .atomic_attributes(s)
                .into_iter()
                .map(move |a| (SubstrateId::atomic(s.clone()), a))
        })
        .collect();

    let mut next = 0;
    while next < order.len() {
        let t = order[next].clone();
        next += 1;
        let mut fresh: Vec<(Task, Derivation)> = Vec::new();
        for u in order[..next].iter() {
            if rules.serial && t.substrate() == u.substrate() {
                for (a, b) in [(&t, u), (u, &t)] {
                    let kept: Vec<&Attr> = a.pairs().filter(|(_, o)| b.apply(o).is_some()).map(|(i, _)| i).collect();
                    if let Some(first) = a.restrict(kept) {
                        if let Ok(c) = first.serial(b) {
                            fresh.push((
                                c,
                                Derivation::Serial {
                                    first,
                                    second: b.clone(),
                                },
                            ));
                        }
                    }
                }
            }
            if rules.parallel && t.substrate().arity() + u.substrate().arity() <= depth {
                for (a, b) in [(&t, u), (u, &t)] {
                    fresh.push((
                        a.parallel(b),
                        Derivation::Parallel {
                            left: a.clone(),
                            right: b.clone(),
                        },
                    ));
                }
            }
        }
        if rules.spectator && t.substrate().arity() < depth {
            for (s, a) in &spectators {
                let id = Task::identity(s.clone(), [a.clone()]).expect("nonempty");
                for before in [false, true] {
                    let c = if before { id.parallel(&t) } else { t.parallel(&id) };
                    fresh.push((
                        c,
                        Derivation::Spectator {
                            core: t.clone(),
                            spectator: a.clone(),
                            before,
                        },
                    ));
                }
            }
        }
        for (c, d) in fresh {
            if derivations.contains_key(&c) || is_structural(&c) {
                continue;
            }
            derivations.insert(c.clone(), d);
            check(&c, &derivations)?;
            order.push(c);
            if order.len() > MAX_FACTS {
                return Err(ClosureError::TooLarge { limit: MAX_FACTS });
            }
        }
    }

    let mut relation = PossibilityRelation::new();
    let mut by_substrate: BTreeMap<SubstrateId, Vec<Task>> = BTreeMap::new();
    for t in &order {
        relation.insert(t.clone(), Status::Possible).expect("checked above");
        by_substrate.entry(t.substrate().clone()).or_default().push(t.clone());
    }
    let mut impossible_by_substrate: BTreeMap<SubstrateId, Vec<Task>> = BTreeMap::new();
    for t in impossible {
        relation.insert(t.clone(), Status::Impossible).expect("checked above");
        impossible_by_substrate.entry(t.substrate().clone()).or_default().push(t);
    }
    Ok(ClosedRelation {
        relation,
        derivations,
        by_substrate,
        impossible_by_substrate,
        rules,
        depth,
    })
}

impl StatusLookup for ClosedRelation {
    /// In order: identity and slot-permutation tasks are Possible; closed
    /// facts; subtasks of Possible facts are Possible; tasks containing an
    /// Impossible fact are Impossible; with the spectator rule, a task whose
    /// non-identity slots form a Possible task is Possible.
    fn status(&self, task: &Task) -> Status {
        self.explain(task).0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s() -> SubstrateId {
        SubstrateId::atomic("s")
    }

    fn at(n: &str) -> Attr {
        Attr::atomic(n)
    }

    fn pw(a: &str, b: &str) -> Task {
        Task::pairwise(s(), at(a), at(b)).unwrap()
    }

    fn model(attrs: &[&str]) -> AbstractModel {
        let mut m = AbstractModel::new();
        m.catalog.add_substrate("s".into());
        for a in attrs {
            m.catalog.add_attribute(&"s".into(), (*a).into());
        }
        m
    }

    #[test]
    fn serial_rule_derives_chain() {
        let mut m = model(&["a", "b", "c"]);
        m.declare(pw("a", "b"), Status::Possible).unwrap();
        m.declare(pw("b", "c"), Status::Possible).unwrap();
        let c = close(&m, ClosureRuleSet::default(), 1).unwrap();
        assert_eq!(c.status(&pw("a", "c")), Status::Possible);
        assert!(c.replay(&pw("a", "c")));
        let tr = c.trace(&pw("a", "c"));
        assert_eq!(tr.last().unwrap().rule, "serial");
        assert_eq!(tr.len(), 3);
    }

    #[test]
    fn direct_clash_is_caught_upstream() {
        let mut m = model(&["a", "b"]);
        m.declare(pw("a", "b"), Status::Possible).unwrap();
        assert!(m.declare(pw("a", "b"), Status::Impossible).is_err());
    }

    #[test]
    fn derived_clash_is_inconsistent() {
        let mut m = model(&["a", "b", "c"]);
        m.declare(pw("a", "b"), Status::Possible).unwrap();
        m.declare(pw("b", "c"), Status::Possible).unwrap();
        m.declare(pw("a", "c"), Status::Impossible).unwrap();
        match close(&m, ClosureRuleSet::default(), 1) {
            Err(ClosureError::InconsistentModel { possible, trace, .. }) => {
                assert_eq!(possible, pw("a", "c"));
                assert!(!trace.is_empty());
            }
            other => panic!("{other:?}"),
        }
        assert!(close(&m, ClosureRuleSet::none(), 1).is_ok());
    }

    #[test]
    fn empty_facts_empty_closure() {
        let m = model(&["a", "b"]);
        let c = close(&m, ClosureRuleSet::default(), 2).unwrap();
        assert!(c.relation().is_empty());
        assert_eq!(c.status(&pw("a", "a")), Status::Possible);
        assert_eq!(c.status(&pw("a", "b")), Status::Unknown);
    }

    #[test]
    fn parallel_and_spectator() {
        let mut m = model(&["a", "b"]);
        m.declare(pw("a", "b"), Status::Possible).unwrap();
        let c = close(&m, ClosureRuleSet::default(), 2).unwrap();
        let ss = s().compose(&s());
        let t = Task::pairwise(ss.clone(), Attr::tuple([&at("a"), &at("b")]), Attr::tuple([&at("b"), &at("b")]))
            .unwrap();
        assert_eq!(c.status(&t), Status::Possible);
        assert!(c.replay(&t));
        let prod = pw("a", "b").parallel(&pw("a", "b"));
        assert_eq!(c.status(&prod), Status::Possible);
        assert!(c.replay(&prod));
    }

    #[test]
    fn lookup_order() {
        let mut m = model(&["a", "b", "c"]);
        let two = Task::new(s(), [(at("a"), at("b")), (at("b"), at("c"))]).unwrap();
        m.declare(two.clone(), Status::Possible).unwrap();
        m.declare(pw("c", "a"), Status::Impossible).unwrap();
        let c = close(&m, ClosureRuleSet::none(), 1).unwrap();
        assert_eq!(c.explain(&pw("a", "b")), (Status::Possible, Justification::SubtaskOf(two)));
        let bigger = Task::new(s(), [(at("c"), at("a")), (at("a"), at("a"))]).unwrap();
        assert_eq!(c.status(&bigger), Status::Impossible);
    }

    #[test]
    fn structural_tasks() {
        let ss = s().compose(&s());
        let ab = Attr::tuple([&at("a"), &at("b")]);
        let ba = Attr::tuple([&at("b"), &at("a")]);
        let swap = Task::new(ss.clone(), [(ab.clone(), ba.clone()), (ba.clone(), ab.clone())]).unwrap();
        assert_eq!(structural_permutation(&swap), Some(vec![1, 0]));
        let not = Task::new(ss, [(ab.clone(), ba), (ab.concat(&Attr::atomic("x")).project(&[0, 0]), ab)]);
        assert!(not.is_err() || structural_permutation(&not.unwrap()).is_none());
    }

    #[test]
    fn idempotent() {
        let mut m = model(&["a", "b", "c"]);
        m.declare(pw("a", "b"), Status::Possible).unwrap();
        m.declare(pw("b", "c"), Status::Possible).unwrap();
        m.declare(pw("c", "b"), Status::Impossible).unwrap();
        let once = close(&m, ClosureRuleSet::default(), 2).unwrap();
        let mut again = m.clone();
        again.facts = once.relation().clone();
        let twice = close(&again, ClosureRuleSet::default(), 2).unwrap();
        assert_eq!(once.relation(), twice.relation());
    }
}
