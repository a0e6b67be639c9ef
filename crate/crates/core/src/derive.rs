//! Bounded search for a composition of generator tasks equal to a target.
//!
//! A move places one generator on an ordered selection of slots of the
//! target substrate, with the identity on every other slot; that is
//! `(g ⊗ id)` conjugated by a slot permutation. Parallel products of
//! generators are reached as consecutive moves on disjoint slots. A pure slot
//! permutation is also a move. The search is breadth-first over the tuple of
//! current attributes, one entry per target input, so it returns a shortest
//! sequence; ties break by generator index, then selection order.

use std::collections::{HashSet, VecDeque};

use crate::algebra::{Attr, SubstrateId, Task};
use crate::checker::closure::structural_permutation;
use crate::info_media::permutations;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Move {
    /// Generator index and the target slots it acts on, in generator slot order.
    Apply { generator: usize, slots: Vec<usize> },
    /// Output slot `i` takes the content of input slot `perm[i]`.
    Permute { perm: Vec<usize> },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DerivationPath {
    pub moves: Vec<Move>,
    /// The explicit task of each move, restricted to the attributes it sees.
    pub steps: Vec<Task>,
    pub result: Task,
}

impl DerivationPath {
    /// Number of serial compositions; a single move has depth 0.
    pub fn depth(&self) -> usize {
        self.moves.len().saturating_sub(1)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DeriveOutcome {
    Found(DerivationPath),
    NotFound { depth: usize, frontier: usize, explored: usize },
}

type State = Vec<Attr>;

fn selections(parts: &[crate::algebra::Name], want: &[crate::algebra::Name]) -> Vec<Vec<usize>> {
    let n = parts.len();
    let k = want.len();
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn go(
        parts: &[crate::algebra::Name],
        want: &[crate::algebra::Name],
        n: usize,
        k: usize,
        cur: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in 0..n {
            if !cur.contains(&i) && parts[i] == want[cur.len()] {
                cur.push(i);
                go(parts, want, n, k, cur, out);
                cur.pop();
            }
        }
    }
    go(parts, want, n, k, &mut cur, &mut out);
    out
}

fn apply_move(state: &State, g: &Task, slots: &[usize]) -> Option<State> {
    state
        .iter()
        .map(|a| {
            let out = g.apply(&a.project(slots))?;
            let mut names = a.names().to_vec();
            for (j, &s) in slots.iter().enumerate() {
                names[s] = out.names()[j].clone();
            }
            Some(Attr::from_names(names))
        })
        .collect()
}

fn inverse(perm: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; perm.len()];
    for (i, &p) in perm.iter().enumerate() {
        inv[p] = i;
    }
    inv
}

/// The explicit task of one move on the attributes in `state`, built with the
/// algebra operations: `g ⊗ id_rest`, slots reordered, then restricted.
pub fn lifted_task(target: &SubstrateId, g: &Task, slots: &[usize], state: &State) -> Option<Task> {
    let n = target.arity();
    let rest: Vec<usize> = (0..n).filter(|i| !slots.contains(i)).collect();
    let order: Vec<usize> = slots.iter().chain(rest.iter()).copied().collect();
    let wide = if rest.is_empty() {
        g.clone()
    } else {
        let rest_sub = SubstrateId::from_parts(rest.iter().map(|&i| target.parts()[i].clone()).collect());
        let id = Task::identity(rest_sub, state.iter().map(|a| a.project(&rest)).collect::<std::collections::BTreeSet<_>>())
            .ok()?;
        g.parallel(&id)
    };
    let placed = wide.permute_slots(&inverse(&order)).ok()?;
    placed.restrict(state.iter())
}

fn permute_task(target: &SubstrateId, perm: &[usize], state: &State) -> Option<Task> {
    Task::slot_permutation(target.clone(), perm, state.iter().cloned()).ok()
}

/// Recomputes the composite with `Task::serial` and compares it with `target`.
pub fn replay(path: &DerivationPath, target: &Task) -> bool {
    let mut acc: Option<Task> = None;
    for s in &path.steps {
        acc = Some(match acc {
            None => s.clone(),
            Some(a) => match a.serial(s) {
                Ok(t) => t,
                Err(_) => return false,
            },
        });
    }
    match acc {
        Some(t) => &t == target && t == path.result,
        None => target.is_identity(),
    }
}

/// Breadth-first search for at most `depth + 1` moves.
pub fn derive_task(target: &Task, generators: &[Task], depth: usize) -> DeriveOutcome {
    let sub = target.substrate().clone();
    let parts = sub.parts().to_vec();
    let start: State = target.inputs().cloned().collect();
    let goal: State = target.outputs().cloned().collect();
    let max_moves = depth + 1;

    if start == goal {
        return DeriveOutcome::Found(DerivationPath {
            moves: Vec::new(),
            steps: Vec::new(),
            result: target.clone(),
        });
    }

    // Move catalogue in tie-break order.
    let mut catalogue: Vec<Move> = Vec::new();
    for (gi, g) in generators.iter().enumerate() {
        for slots in selections(&parts, g.substrate().parts()) {
            catalogue.push(Move::Apply { generator: gi, slots });
        }
    }
    if parts.len() <= 6 {
        for perm in permutations(parts.len()).into_iter().skip(1) {
            if SubstrateId::from_parts(perm.iter().map(|&i| parts[i].clone()).collect()) == sub {
                catalogue.push(Move::Permute { perm });
            }
        }
    }

    let mut seen: HashSet<State> = HashSet::new();
    seen.insert(start.clone());
    let mut queue: VecDeque<(State, Vec<usize>)> = VecDeque::new();
    queue.push_back((start.clone(), Vec::new()));
    let mut explored = 0;
    while let Some((state, path)) = queue.pop_front() {
        if path.len() >= max_moves {
            queue.push_front((state, path));
            break;
        }
        explored += 1;
        for (mi, mv) in catalogue.iter().enumerate() {
            let next = match mv {
                Move::Apply { generator, slots } => apply_move(&state, &generators[*generator], slots),
                Move::Permute { perm } => Some(state.iter().map(|a| a.permute(perm)).collect()),
            };
            let Some(next) = next else { continue };
            if !seen.insert(next.clone()) {
                continue;
            }
            let mut p = path.clone();
            p.push(mi);
            if next == goal {
                return DeriveOutcome::Found(materialize(target, generators, &catalogue, &p, &start));
            }
            queue.push_back((next, p));
        }
    }
    DeriveOutcome::NotFound {
        depth,
        frontier: queue.len(),
        explored,
    }
}

fn materialize(target: &Task, generators: &[Task], catalogue: &[Move], path: &[usize], start: &State) -> DerivationPath {
    let sub = target.substrate();
    let mut state = start.clone();
    let mut moves = Vec::new();
    let mut steps = Vec::new();
    for &mi in path {
        let mv = catalogue[mi].clone();
        let step = match &mv {
            Move::Apply { generator, slots } => lifted_task(sub, &generators[*generator], slots, &state),
            Move::Permute { perm } => permute_task(sub, perm, &state),
        }
        .expect("move was applicable");
        state = state.iter().map(|a| step.apply(a).expect("restricted").clone()).collect();
        moves.push(mv);
        steps.push(step);
    }
    let mut result = steps[0].clone();
    for s in &steps[1..] {
        result = result.serial(s).expect("chained");
    }
    DerivationPath { moves, steps, result }
}

/// True when a move is a pure slot permutation task.
pub fn is_permutation_step(t: &Task) -> bool {
    structural_permutation(t).is_some()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::work_media::{build_asymptotic_extractor_task, build_work_axiom_task, WorkVariable};

    fn at(n: &str) -> Attr {
        Attr::atomic(n)
    }

    fn s() -> SubstrateId {
        SubstrateId::atomic("s")
    }

    #[test]
    fn generator_itself() {
        let g = Task::pairwise(s(), at("a"), at("b")).unwrap();
        match derive_task(&g, std::slice::from_ref(&g), 3) {
            DeriveOutcome::Found(p) => {
                assert_eq!(p.depth(), 0);
                assert!(replay(&p, &g));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn chain() {
        let ab = Task::pairwise(s(), at("a"), at("b")).unwrap();
        let bc = Task::pairwise(s(), at("b"), at("c")).unwrap();
        let ac = Task::pairwise(s(), at("a"), at("c")).unwrap();
        match derive_task(&ac, &[ab.clone(), bc.clone()], 3) {
            DeriveOutcome::Found(p) => {
                assert_eq!(p.depth(), 1);
                assert!(replay(&p, &ac));
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(derive_task(&ac, &[ab], 3), DeriveOutcome::NotFound { .. }));
    }

    #[test]
    fn extractor_from_work_task() {
        let w = WorkVariable::new(SubstrateId::atomic("m"), at("wp"), at("w0"), at("wm")).unwrap();
        let gen = build_work_axiom_task(&w);
        for (n, expect) in [(1, 1), (2, 3)] {
            let target = build_asymptotic_extractor_task(&w, n).unwrap();
            match derive_task(&target, std::slice::from_ref(&gen), 6) {
                DeriveOutcome::Found(p) => {
                    assert_eq!(p.depth(), expect, "n = {n}");
                    assert!(replay(&p, &target));
                }
                other => panic!("{other:?}"),
            }
        }
    }
}
