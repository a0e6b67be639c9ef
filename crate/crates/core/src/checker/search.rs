//! Exhaustive search over small abstract models for one where work can be
//! extracted from a variable that is not distinguishable.
//!
//! Universe for `A` attributes on one substrate `s` (with `s ⊕ s` as the
//! work-task substrate):
//! - an integer energy per attribute in `0..A`, minimum 0;
//! - a complete pairwise relation: each `a → b`, `a ≠ b`, is Possible or
//!   Impossible;
//! - per ordered distinct triple `(p, z, m)` the work-axiom task is Possible or
//!   left Unknown (only when the arity bound is at least 2);
//! - per unordered pair a declared "distinguishable" bit.
//!
//! Models equal up to renaming attributes are examined once: only the member
//! with the smallest encoding is kept. Distinguishability is closed-world:
//! a pair is distinguishable only when declared or derived by the enabled
//! rules.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use thiserror::Error;

use crate::algebra::{Attr, SubstrateId, Task, Variable};
use crate::checker::closure::AbstractModel;
use crate::conservation::{Energy, EnergyLabeling};
use crate::derive::{derive_task, DeriveOutcome};
use crate::info_media::permutations;
use crate::relation::Status;
use crate::work_media::{build_asymptotic_extractor_task, build_work_axiom_task, WorkExtractionSpec, WorkVariable};

/// Refuse searches whose raw model count exceeds this.
pub const MAX_MODELS: u128 = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchBounds {
    pub attributes: usize,
    pub arity: usize,
    pub n_truncation: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Principle {
    Conservation,
    Asymptotic,
    Interoperability,
    Serial,
    Parallel,
    Spectator,
}

impl Principle {
    pub const ALL: [Principle; 6] = [
        Principle::Conservation,
        Principle::Asymptotic,
        Principle::Interoperability,
        Principle::Serial,
        Principle::Parallel,
        Principle::Spectator,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Principle::Conservation => "conservation",
            Principle::Asymptotic => "asymptotic",
            Principle::Interoperability => "interoperability",
            Principle::Serial => "serial",
            Principle::Parallel => "parallel",
            Principle::Spectator => "spectator",
        }
    }
}

impl fmt::Display for Principle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Principle {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Principle::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| format!("unknown principle `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Toggles {
    pub conservation: bool,
    pub asymptotic: bool,
    pub interoperability: bool,
    pub serial: bool,
    pub parallel: bool,
    pub spectator: bool,
    /// Accept any injective work map, not only those onto `{w+, w0}`.
    pub any_work_outcome: bool,
}

impl Default for Toggles {
    fn default() -> Self {
        Toggles {
            conservation: true,
            asymptotic: true,
            interoperability: true,
            serial: true,
            parallel: true,
            spectator: true,
            any_work_outcome: false,
        }
    }
}

impl Toggles {
    pub fn without(mut self, p: Principle) -> Self {
        match p {
            Principle::Conservation => self.conservation = false,
            Principle::Asymptotic => self.asymptotic = false,
            Principle::Interoperability => self.interoperability = false,
            Principle::Serial => self.serial = false,
            Principle::Parallel => self.parallel = false,
            Principle::Spectator => self.spectator = false,
        }
        self
    }

    pub fn disabled(&self) -> Vec<Principle> {
        let on = [
            self.conservation,
            self.asymptotic,
            self.interoperability,
            self.serial,
            self.parallel,
            self.spectator,
        ];
        Principle::ALL.into_iter().zip(on).filter(|(_, on)| !on).map(|(p, _)| p).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SearchError {
    #[error("bounds admit about {estimate} models, above the limit of {limit}")]
    BoundsTooLarge { estimate: u128, limit: u128 },
    #[error("invalid bounds: {0}")]
    InvalidBounds(String),
}

type Pair = (usize, usize);

/// A model found by the search, with attributes named `a0`, `a1`, ... on `s`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Counterexample {
    pub attributes: usize,
    pub energies: Vec<i64>,
    pub possible_transitions: Vec<Pair>,
    pub work_tasks: Vec<(usize, usize, usize)>,
    pub distinguishing: Vec<Pair>,
    pub work: (usize, usize, usize),
    /// `(x, w0) → (f, w)` for both source members.
    pub extraction: [(Pair, Pair); 2],
}

pub fn attribute_name(i: usize) -> Attr {
    Attr::atomic(format!("a{i}").as_str())
}

impl Counterexample {
    pub fn source(&self) -> Pair {
        (self.extraction[0].0 .0, self.extraction[1].0 .0)
    }

    /// The same model as declared facts, with every undeclared pair recorded
    /// as not distinguishable.
    pub fn to_model(&self) -> (AbstractModel, WorkVariable, WorkExtractionSpec) {
        let s = SubstrateId::atomic("s");
        let mut m = AbstractModel::new();
        m.catalog.add_substrate("s".into());
        for i in 0..self.attributes {
            m.catalog.add_attribute(&"s".into(), attribute_name(i).names()[0].clone());
        }
        m.labeling = Some(EnergyLabeling::from_values(
            self.energies.iter().enumerate().map(|(i, &e)| (attribute_name(i), Energy::from_integer(e.into()))),
        ));
        for a in 0..self.attributes {
            for b in 0..self.attributes {
                if a == b {
                    continue;
                }
                let st = if self.possible_transitions.contains(&(a, b)) {
                    Status::Possible
                } else {
                    Status::Impossible
                };
                let t = Task::pairwise(s.clone(), attribute_name(a), attribute_name(b)).expect("single pair");
                m.declare(t, st).expect("fresh");
            }
        }
        for &(p, z, mi) in &self.work_tasks {
            let w = WorkVariable::new(s.clone(), attribute_name(p), attribute_name(z), attribute_name(mi)).expect("distinct");
            m.declare(build_work_axiom_task(&w), Status::Possible).expect("fresh");
        }
        for a in 0..self.attributes {
            for b in a + 1..self.attributes {
                let v = Variable::new(s.clone(), vec![attribute_name(a), attribute_name(b)]).expect("distinct");
                let st = if self.distinguishing.contains(&(a, b)) {
                    Status::Possible
                } else {
                    Status::Impossible
                };
                m.declare_distinguishing(v, st).expect("fresh");
            }
        }
        let (p, z, mi) = self.work;
        let w = WorkVariable::new(s.clone(), attribute_name(p), attribute_name(z), attribute_name(mi)).expect("distinct");
        let (x1, x2) = self.source();
        let source = Variable::new(s, vec![attribute_name(x1), attribute_name(x2)]).expect("distinct");
        let spec = WorkExtractionSpec::new(
            source,
            self.extraction
                .iter()
                .map(|&((x, _), (f, wx))| (attribute_name(x), attribute_name(f), attribute_name(wx))),
        );
        (m, w, spec)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SearchOutcome {
    Exhausted,
    Counterexample(Box<Counterexample>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchReport {
    pub bounds: SearchBounds,
    pub toggles: Toggles,
    /// Raw model count before symmetry reduction.
    pub estimated: u128,
    /// Models evaluated after symmetry reduction.
    pub examined: u64,
    pub inconsistent: u64,
    pub principle_failures: u64,
    /// Consistent models with at least one certified work variable.
    pub with_work: u64,
    pub counterexamples: u64,
    /// Depth of the extractor derivation at the truncation level, if found.
    pub extractor_depth: Option<usize>,
    pub outcome: SearchOutcome,
}

fn labelings(a: usize) -> Vec<Vec<i64>> {
    let mut out = Vec::new();
    let total = a.pow(a as u32);
    for mut code in 0..total {
        let mut v = Vec::with_capacity(a);
        for _ in 0..a {
            v.push((code % a) as i64);
            code /= a;
        }
        v.reverse();
        if v.contains(&0) {
            out.push(v);
        }
    }
    out
}

/// Index maps for labeling slots, pairwise, work and distinguishing bits.
type BitMaps = (Vec<usize>, Vec<usize>, Vec<usize>, Vec<usize>);

struct Universe {
    a: usize,
    pairs: Vec<Pair>,
    triples: Vec<(usize, usize, usize)>,
    unordered: Vec<Pair>,
    /// Bit maps under each nontrivial attribute permutation.
    perms: Vec<BitMaps>,
}

impl Universe {
    fn new(a: usize, arity: usize) -> Self {
        let pairs: Vec<Pair> = (0..a).flat_map(|i| (0..a).filter(move |&j| j != i).map(move |j| (i, j))).collect();
        let triples: Vec<(usize, usize, usize)> = if arity >= 2 {
            let mut t = Vec::new();
            for p in 0..a {
                for z in 0..a {
                    for m in 0..a {
                        if p != z && z != m && p != m {
                            t.push((p, z, m));
                        }
                    }
                }
            }
            t
        } else {
            Vec::new()
        };
        let unordered: Vec<Pair> = (0..a).flat_map(|i| (i + 1..a).map(move |j| (i, j))).collect();
        let perms = permutations(a)
            .into_iter()
            .skip(1)
            .map(|pi| {
                let pm = pairs.iter().map(|&(i, j)| pairs.iter().position(|&q| q == (pi[i], pi[j])).unwrap()).collect();
                let tm = triples
                    .iter()
                    .map(|&(p, z, m)| triples.iter().position(|&q| q == (pi[p], pi[z], pi[m])).unwrap())
                    .collect();
                let um = unordered
                    .iter()
                    .map(|&(i, j)| {
                        let (x, y) = (pi[i].min(pi[j]), pi[i].max(pi[j]));
                        unordered.iter().position(|&q| q == (x, y)).unwrap()
                    })
                    .collect();
                (pi, pm, tm, um)
            })
            .collect();
        Universe {
            a,
            pairs,
            triples,
            unordered,
            perms,
        }
    }

    fn is_canonical(&self, lab: &[i64], pw: u64, work: u64, dist: u64) -> bool {
        let key = (lab.to_vec(), pw, work, dist);
        for (pi, pm, tm, um) in &self.perms {
            let mut l2 = vec![0; self.a];
            for i in 0..self.a {
                l2[pi[i]] = lab[i];
            }
            let map = |bits: u64, m: &[usize]| {
                let mut out = 0u64;
                for (k, &t) in m.iter().enumerate() {
                    if bits >> k & 1 == 1 {
                        out |= 1 << t;
                    }
                }
                out
            };
            if (l2, map(pw, pm), map(work, tm), map(dist, um)) < key {
                return false;
            }
        }
        true
    }
}

enum Eval {
    Inconsistent,
    PrincipleFailure,
    NoWork,
    Holds,
    Counter(Box<Counterexample>),
}

struct Model<'u> {
    u: &'u Universe,
    lab: &'u [i64],
    pw: u64,
    work: u64,
    dist: u64,
}

impl Model<'_> {
    fn possible(&self, i: usize, j: usize) -> bool {
        i == j || self.pw >> self.u.pairs.iter().position(|&q| q == (i, j)).unwrap() & 1 == 1
    }

    fn work_bits(&self) -> impl Iterator<Item = (usize, usize, usize)> + '_ {
        self.u.triples.iter().enumerate().filter(|(k, _)| self.work >> k & 1 == 1).map(|(_, &t)| t)
    }

    fn declared_dist(&self, i: usize, j: usize) -> bool {
        let key = (i.min(j), i.max(j));
        self.dist >> self.u.unordered.iter().position(|&q| q == key).unwrap() & 1 == 1
    }

    fn evaluate(&self, t: &Toggles, chain: bool) -> Eval {
        let a = self.u.a;
        if t.serial {
            for i in 0..a {
                for j in 0..a {
                    for k in 0..a {
                        if self.possible(i, j) && self.possible(j, k) && !self.possible(i, k) {
                            return Eval::Inconsistent;
                        }
                    }
                }
            }
        }
        let e = self.lab;
        if t.conservation {
            for i in 0..a {
                for j in 0..a {
                    if i != j && self.possible(i, j) != (e[i] == e[j]) {
                        return Eval::PrincipleFailure;
                    }
                }
            }
            if self.work_bits().any(|(p, z, m)| e[p] + e[m] != 2 * e[z]) {
                return Eval::PrincipleFailure;
            }
        }

        let certified: Vec<(usize, usize, usize)> = self
            .work_bits()
            .filter(|&(p, z, m)| {
                let w = [p, z, m];
                let no_transitions = w.iter().all(|&x| w.iter().all(|&y| x == y || !self.possible(x, y)));
                no_transitions && e[p] - e[z] == e[z] - e[m]
            })
            .collect();
        if certified.is_empty() {
            return Eval::NoWork;
        }

        // Possible two-pair tasks on s ⊕ s whose inputs share the second slot.
        let mut two_pair: Vec<[(Pair, Pair); 2]> = Vec::new();
        for (p, z, m) in self.work_bits() {
            two_pair.push([((p, z), (z, p)), ((z, z), (p, m))]);
            if t.serial {
                two_pair.push([((p, z), (p, z)), ((z, z), (m, p))]);
            }
        }

        let mut dist: Vec<Vec<bool>> = (0..a)
            .map(|i| (0..a).map(|j| i != j && self.declared_dist(i, j)).collect())
            .collect();
        if chain {
            for (p, z, _) in self.work_bits() {
                dist[p][z] = true;
                dist[z][p] = true;
            }
        }
        if t.serial && t.interoperability {
            loop {
                let mut changed = false;
                for task in &two_pair {
                    let [((x1, _), o1), ((x2, _), o2)] = *task;
                    if dist[x1][x2] {
                        continue;
                    }
                    if (o1.0 != o2.0 && dist[o1.0][o2.0]) || (o1.1 != o2.1 && dist[o1.1][o2.1]) {
                        dist[x1][x2] = true;
                        dist[x2][x1] = true;
                        changed = true;
                    }
                }
                if !changed {
                    break;
                }
            }
        }

        for &(p, z, m) in &certified {
            let in_w = |x: usize| x == p || x == z || x == m;
            let mut candidates: Vec<[(Pair, Pair); 2]> = Vec::new();
            for x1 in 0..a {
                for x2 in x1 + 1..a {
                    candidates.push([((x1, z), (z, x1)), ((x2, z), (z, x2))]);
                }
            }
            candidates.extend(two_pair.iter().filter(|c| c[0].0 .1 == z && c[1].0 .1 == z).copied());
            for c in candidates {
                let (w1, w2) = (c[0].1 .1, c[1].1 .1);
                if w1 == w2 || !in_w(w1) || !in_w(w2) {
                    continue;
                }
                if !t.any_work_outcome && !((w1 == p && w2 == z) || (w1 == z && w2 == p)) {
                    continue;
                }
                let (x1, x2) = (c[0].0 .0, c[1].0 .0);
                if !dist[x1][x2] {
                    return Eval::Counter(Box::new(self.describe((p, z, m), c)));
                }
            }
        }
        Eval::Holds
    }

    fn describe(&self, work: (usize, usize, usize), extraction: [(Pair, Pair); 2]) -> Counterexample {
        Counterexample {
            attributes: self.u.a,
            energies: self.lab.to_vec(),
            possible_transitions: self.u.pairs.iter().copied().filter(|&(i, j)| self.possible(i, j)).collect(),
            work_tasks: self.work_bits().collect(),
            distinguishing: self.u.unordered.iter().copied().filter(|&(i, j)| self.declared_dist(i, j)).collect(),
            work,
            extraction,
        }
    }
}

/// Enumeration position (attribute count, labeling, pairwise, work, distinguishing bits).
type ModelKey = (usize, usize, u64, u64, u64);

#[derive(Default)]
struct Tally {
    examined: u64,
    inconsistent: u64,
    principle_failures: u64,
    with_work: u64,
    counterexamples: u64,
    first: Option<(ModelKey, Box<Counterexample>)>,
}

impl Tally {
    fn merge(mut self, o: Tally) -> Tally {
        self.examined += o.examined;
        self.inconsistent += o.inconsistent;
        self.principle_failures += o.principle_failures;
        self.with_work += o.with_work;
        self.counterexamples += o.counterexamples;
        self.first = match (self.first, o.first) {
            (Some(a), Some(b)) => Some(if a.0 <= b.0 { a } else { b }),
            (a, b) => a.or(b),
        };
        self
    }
}

pub fn estimate_models(bounds: &SearchBounds) -> u128 {
    (1..=bounds.attributes)
        .map(|a| {
            let pairs = a * (a - 1);
            let triples = if bounds.arity >= 2 { a * (a - 1) * a.saturating_sub(2) } else { 0 };
            let unordered = pairs / 2;
            let bits = pairs + triples + unordered;
            let labs = (a as u128).pow(a as u32) - ((a - 1) as u128).pow(a as u32);
            labs.checked_shl(bits as u32).filter(|_| bits < 100).unwrap_or(u128::MAX)
        })
        .fold(0u128, |acc, x| acc.saturating_add(x))
}

/// Depth at which the work-axiom task alone yields the extractor on
/// `n + 1`... `2n + 1` copies; `None` when no derivation is found.
pub fn extractor_depth(n: usize) -> Option<usize> {
    let s = SubstrateId::atomic("m");
    let w = WorkVariable::new(s, Attr::atomic("p"), Attr::atomic("z"), Attr::atomic("n")).expect("distinct");
    let target = build_asymptotic_extractor_task(&w, n).ok()?;
    match derive_task(&target, &[build_work_axiom_task(&w)], 4 * n + 2) {
        DeriveOutcome::Found(p) => Some(p.depth()),
        DeriveOutcome::NotFound { .. } => None,
    }
}

pub fn search_counterexample_theorem1(bounds: SearchBounds, toggles: Toggles) -> Result<SearchReport, SearchError> {
    if bounds.attributes == 0 || bounds.arity == 0 || bounds.n_truncation == 0 {
        return Err(SearchError::InvalidBounds(
            "attributes, arity and truncation must be positive".into(),
        ));
    }
    let estimated = estimate_models(&bounds);
    if estimated > MAX_MODELS {
        return Err(SearchError::BoundsTooLarge {
            estimate: estimated,
            limit: MAX_MODELS,
        });
    }

    let extractor = if toggles.asymptotic && toggles.serial && toggles.spectator && bounds.arity >= 2 {
        extractor_depth(bounds.n_truncation)
    } else {
        None
    };
    let chain = extractor.is_some() && toggles.interoperability;

    let mut tally = Tally::default();
    for a in 1..=bounds.attributes {
        let u = Universe::new(a, bounds.arity);
        let labs = labelings(a);
        let np = 1u64 << u.pairs.len();
        let nw = 1u64 << u.triples.len();
        let nd = 1u64 << u.unordered.len();
        let jobs: Vec<(usize, u64)> = (0..labs.len()).flat_map(|l| (0..np).map(move |pw| (l, pw))).collect();
        let part = jobs
            .par_iter()
            .map(|&(li, pw)| {
                let mut t = Tally::default();
                for work in 0..nw {
                    for dist in 0..nd {
                        if !u.is_canonical(&labs[li], pw, work, dist) {
                            continue;
                        }
                        t.examined += 1;
                        let m = Model {
                            u: &u,
                            lab: &labs[li],
                            pw,
                            work,
                            dist,
                        };
                        match m.evaluate(&toggles, chain) {
                            Eval::Inconsistent => t.inconsistent += 1,
                            Eval::PrincipleFailure => t.principle_failures += 1,
                            Eval::NoWork => {}
                            Eval::Holds => t.with_work += 1,
                            Eval::Counter(c) => {
                                t.with_work += 1;
                                t.counterexamples += 1;
                                if t.first.is_none() {
                                    t.first = Some(((a, li, pw, work, dist), c));
                                }
                            }
                        }
                    }
                }
                t
            })
            .reduce(Tally::default, Tally::merge);
        tally = tally.merge(part);
    }
    let outcome = match tally.first {
        Some((_, c)) => SearchOutcome::Counterexample(c),
        None => SearchOutcome::Exhausted,
    };
    Ok(SearchReport {
        bounds,
        toggles,
        estimated,
        examined: tally.examined,
        inconsistent: tally.inconsistent,
        principle_failures: tally.principle_failures,
        with_work: tally.with_work,
        counterexamples: tally.counterexamples,
        extractor_depth: extractor,
        outcome,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backend::{AbstractBackend, ModelBackend};
    use crate::checker::closure::ClosureRuleSet;
    use crate::work_media::theorem1_check;

    fn bounds() -> SearchBounds {
        SearchBounds {
            attributes: 3,
            arity: 2,
            n_truncation: 1,
        }
    }

    #[test]
    fn estimate_and_guard() {
        assert_eq!(estimate_models(&bounds()), 1 + 3 * 8 + 19 * (1 << 15));
        let big = SearchBounds { attributes: 4, ..bounds() };
        assert!(matches!(
            search_counterexample_theorem1(big, Toggles::default()),
            Err(SearchError::BoundsTooLarge { .. })
        ));
        let zero = SearchBounds { n_truncation: 0, ..bounds() };
        assert!(matches!(search_counterexample_theorem1(zero, Toggles::default()), Err(SearchError::InvalidBounds(_))));
    }

    #[test]
    fn canonical_forms_are_one_per_orbit() {
        let u = Universe::new(2, 2);
        let labs = labelings(2);
        let mut n = 0;
        for l in &labs {
            for pw in 0..4 {
                for d in 0..2 {
                    n += u.is_canonical(l, pw, 0, d) as usize;
                }
            }
        }
        // Orbits of (labeling, two bits, one symmetric bit) under the swap.
        assert_eq!(n, 14);
    }

    #[test]
    fn principle_names_round_trip() {
        for p in Principle::ALL {
            assert_eq!(p.as_str().parse::<Principle>().unwrap(), p);
        }
        assert!("gravity".parse::<Principle>().is_err());
    }

    #[test]
    fn counterexample_without_asymptotic_replays() {
        let r = search_counterexample_theorem1(bounds(), Toggles::default().without(Principle::Asymptotic)).unwrap();
        let SearchOutcome::Counterexample(c) = r.outcome else {
            panic!("expected a counterexample");
        };
        let (model, w, spec) = c.to_model();
        let b = ModelBackend::Abstract(AbstractBackend::new(model, ClosureRuleSet::default(), 2).unwrap());
        let lab = b.labeling().unwrap();
        assert!(theorem1_check(&spec, &w, &b, &lab).unwrap().is_violation());
    }

    #[test]
    fn all_principles_exhaust() {
        let r = search_counterexample_theorem1(bounds(), Toggles::default()).unwrap();
        eprintln!("{r:?}");
        assert_eq!(r.outcome, SearchOutcome::Exhausted);
        assert_eq!(r.extractor_depth, Some(1));
        assert!(r.with_work > 0);
    }

    #[test]
    fn any_work_map_is_not_covered() {
        let t = Toggles {
            any_work_outcome: true,
            ..Toggles::default()
        };
        let r = search_counterexample_theorem1(bounds(), t).unwrap();
        assert!(matches!(r.outcome, SearchOutcome::Counterexample(_)));
    }
}
