//! Energy-equivalence classes of pairwise tasks.
//!
//! A partition of pairwise tasks is a valid conservation law when, inside
//! each class, every task and its transpose share one possibility status and
//! every product `T1 ⊗ T2~` (and its transpose) is possible. A compatible
//! energy labeling `E` assigns each attribute a rational so that the class
//! label is `F({a→b}) = E(b) − E(a)`.
//!
//! [`solve_labeling`] recovers `E` from a partition: it builds a spanning
//! forest over the attribute graph, expresses every attribute potential as a
//! linear form in the unknown class values, turns every non-tree edge into a
//! cycle equation, and solves the resulting system exactly.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::algebra::{Attr, SubstrateId, Task};
use crate::relation::{Status, StatusLookup};

pub type Energy = BigRational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConservationError {
    #[error("task {0} has more than one pair")]
    NonPairwiseTask(Task),
    #[error("task {0} appears in more than one class")]
    OverlappingClasses(Task),
    #[error("attribute {0} has no energy label")]
    MissingLabel(Attr),
    #[error("no compatible energy labeling: {0}")]
    Infeasible(Infeasibility),
}

/// Energy values per attribute, with one anchor (E = 0) per connected component.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EnergyLabeling {
    values: BTreeMap<Attr, Energy>,
    anchors: Vec<Attr>,
}

impl EnergyLabeling {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_values(values: impl IntoIterator<Item = (Attr, Energy)>) -> Self {
        EnergyLabeling {
            values: values.into_iter().collect(),
            anchors: Vec::new(),
        }
    }

    pub fn set(&mut self, attr: Attr, e: Energy) {
        self.values.insert(attr, e);
    }

    /// Energy of an attribute. Composite attributes without their own entry
    /// get the sum of their slots.
    pub fn energy(&self, attr: &Attr) -> Option<Energy> {
        if let Some(e) = self.values.get(attr) {
            return Some(e.clone());
        }
        if attr.arity() == 1 {
            return None;
        }
        let mut sum = Energy::zero();
        for i in 0..attr.arity() {
            sum += self.values.get(&attr.slot(i))?;
        }
        Some(sum)
    }

    /// `F(T) = E(b) − E(a)` for a pairwise task.
    pub fn f_value(&self, task: &Task) -> Result<Energy, ConservationError> {
        let (a, b) = task
            .single_pair()
            .ok_or_else(|| ConservationError::NonPairwiseTask(task.clone()))?;
        self.pair_delta(a, b)
    }

    pub fn pair_delta(&self, a: &Attr, b: &Attr) -> Result<Energy, ConservationError> {
        let ea = self
            .energy(a)
            .ok_or_else(|| ConservationError::MissingLabel(a.clone()))?;
        let eb = self
            .energy(b)
            .ok_or_else(|| ConservationError::MissingLabel(b.clone()))?;
        Ok(eb - ea)
    }

    pub fn values(&self) -> &BTreeMap<Attr, Energy> {
        &self.values
    }

    pub fn anchors(&self) -> &[Attr] {
        &self.anchors
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// One cell of a task partition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaskClass {
    pub tasks: BTreeSet<Task>,
    /// Known `F` value of the class, when it came from a labeling.
    pub label: Option<Energy>,
}

impl TaskClass {
    pub fn new(tasks: impl IntoIterator<Item = Task>) -> Self {
        TaskClass {
            tasks: tasks.into_iter().collect(),
            label: None,
        }
    }

    pub fn labeled(tasks: impl IntoIterator<Item = Task>, label: Energy) -> Self {
        TaskClass {
            tasks: tasks.into_iter().collect(),
            label: Some(label),
        }
    }

    /// The zero class: it holds an identity task or carries label 0.
    pub fn is_zero(&self) -> bool {
        self.label.as_ref().is_some_and(Zero::is_zero) || self.tasks.iter().any(Task::is_identity)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaskPartition {
    classes: Vec<TaskClass>,
}

impl TaskPartition {
    pub fn new(classes: Vec<TaskClass>) -> Result<Self, ConservationError> {
        let mut seen = BTreeSet::new();
        for c in &classes {
            for t in &c.tasks {
                if !t.is_pairwise() {
                    return Err(ConservationError::NonPairwiseTask(t.clone()));
                }
                if !seen.insert(t) {
                    return Err(ConservationError::OverlappingClasses(t.clone()));
                }
            }
        }
        Ok(TaskPartition { classes })
    }

    pub fn classes(&self) -> &[TaskClass] {
        &self.classes
    }

    pub fn class_of(&self, task: &Task) -> Option<usize> {
        self.classes.iter().position(|c| c.tasks.contains(task))
    }

    pub fn attributes(&self) -> BTreeSet<Attr> {
        self.classes
            .iter()
            .flat_map(|c| c.tasks.iter())
            .flat_map(|t| t.pairs().flat_map(|(a, b)| [a.clone(), b.clone()]))
            .collect()
    }

    /// Drops class labels, keeping only the equality structure.
    pub fn unlabeled(&self) -> TaskPartition {
        TaskPartition {
            classes: self
                .classes
                .iter()
                .map(|c| TaskClass::new(c.tasks.iter().cloned()))
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ClassViolation {
    /// Condition (i): a possible and an impossible task (or transpose) share a class.
    MixedStatus {
        class: usize,
        possible: Task,
        impossible: Task,
    },
    /// Condition (ii): `T1 ⊗ T2~` or its transpose is impossible.
    ProductNotPossible {
        class: usize,
        first: Task,
        second: Task,
        product: Task,
    },
    /// Only the zero class may hold a task that is possible together with its transpose.
    ReversibleOutsideZeroClass { class: usize, task: Task },
}

impl fmt::Display for ClassViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ClassViolation::MixedStatus {
                class,
                possible,
                impossible,
            } => write!(
                f,
                "class {class}: {possible} is possible but {impossible} is impossible"
            ),
            ClassViolation::ProductNotPossible {
                class,
                first,
                second,
                product,
            } => write!(
                f,
                "class {class}: {product} (from {first} and the transpose of {second}) is impossible"
            ),
            ClassViolation::ReversibleOutsideZeroClass { class, task } => write!(
                f,
                "class {class} is not the zero class but {task} and its transpose are both possible"
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassSummary {
    pub index: usize,
    pub size: usize,
    pub zero: bool,
    pub label: Option<Energy>,
    /// Shared status of members and transposes, when all known ones agree.
    pub status: Status,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationReport {
    pub classes: Vec<ClassSummary>,
    pub violations: Vec<ClassViolation>,
    /// Lookups that returned a definite status.
    pub checked: usize,
    /// Lookups that returned `Unknown`.
    pub gaps: usize,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    /// Fraction of required lookups that were decidable, in [0, 1].
    pub fn coverage(&self) -> f64 {
        let total = self.checked + self.gaps;
        if total == 0 {
            1.0
        } else {
            self.checked as f64 / total as f64
        }
    }
}

/// Checks both class conditions of a conservation law. `Unknown` statuses
/// count as gaps, never as violations.
pub fn check_class_conditions(
    partition: &TaskPartition,
    rel: &impl StatusLookup,
) -> Result<ValidationReport, ConservationError> {
    let mut report = ValidationReport {
        classes: Vec::new(),
        violations: Vec::new(),
        checked: 0,
        gaps: 0,
    };
    let count = |s: Status, report: &mut ValidationReport| {
        if s == Status::Unknown {
            report.gaps += 1;
        } else {
            report.checked += 1;
        }
    };

    for (ci, class) in partition.classes().iter().enumerate() {
        let mut first_possible: Option<Task> = None;
        let mut first_impossible: Option<Task> = None;
        let mut reversible: Option<Task> = None;

        for t in &class.tasks {
            if !t.is_pairwise() {
                return Err(ConservationError::NonPairwiseTask(t.clone()));
            }
            let tt = t.transpose().expect("pairwise tasks always transpose");
            let st = rel.status(t);
            let stt = rel.status(&tt);
            count(st, &mut report);
            count(stt, &mut report);
            for (task, s) in [(t, st), (&tt, stt)] {
                match s {
                    Status::Possible if first_possible.is_none() => {
                        first_possible = Some(task.clone())
                    }
                    Status::Impossible if first_impossible.is_none() => {
                        first_impossible = Some(task.clone())
                    }
                    _ => {}
                }
            }
            if st == Status::Possible && stt == Status::Possible && reversible.is_none() {
                reversible = Some(t.clone());
            }
        }

        let status = match (&first_possible, &first_impossible) {
            (Some(p), Some(i)) => {
                report.violations.push(ClassViolation::MixedStatus {
                    class: ci,
                    possible: p.clone(),
                    impossible: i.clone(),
                });
                Status::Unknown
            }
            (Some(_), None) => Status::Possible,
            (None, Some(_)) => Status::Impossible,
            (None, None) => Status::Unknown,
        };

        if !class.is_zero() {
            if let Some(task) = reversible {
                report
                    .violations
                    .push(ClassViolation::ReversibleOutsideZeroClass { class: ci, task });
            }
        }

        'outer: for t1 in &class.tasks {
            for t2 in &class.tasks {
                let product = t1.parallel(&t2.transpose().expect("pairwise"));
                let product_t = product.transpose().expect("pairwise");
                for p in [&product, &product_t] {
                    let s = rel.status(p);
                    count(s, &mut report);
                    if s == Status::Impossible {
                        report.violations.push(ClassViolation::ProductNotPossible {
                            class: ci,
                            first: t1.clone(),
                            second: t2.clone(),
                            product: p.clone(),
                        });
                        break 'outer;
                    }
                }
            }
        }

        report.classes.push(ClassSummary {
            index: ci,
            size: class.tasks.len(),
            zero: class.is_zero(),
            label: class.label.clone(),
            status,
        });
    }
    Ok(report)
}

/// Groups every pairwise task over `attrs` by its `F` value; classes come out
/// in increasing `F` order and carry their label.
pub fn classify_by_labeling(
    substrate: &SubstrateId,
    attrs: &[Attr],
    labeling: &EnergyLabeling,
) -> Result<TaskPartition, ConservationError> {
    let mut energies = Vec::with_capacity(attrs.len());
    for a in attrs {
        energies.push(
            labeling
                .energy(a)
                .ok_or_else(|| ConservationError::MissingLabel(a.clone()))?,
        );
    }
    let mut groups: BTreeMap<Energy, BTreeSet<Task>> = BTreeMap::new();
    for (a, ea) in attrs.iter().zip(&energies) {
        for (b, eb) in attrs.iter().zip(&energies) {
            let t = Task::pairwise(substrate.clone(), a.clone(), b.clone())
                .expect("attributes share the substrate");
            groups.entry(eb - ea).or_default().insert(t);
        }
    }
    TaskPartition::new(
        groups
            .into_iter()
            .map(|(f, tasks)| TaskClass::labeled(tasks, f))
            .collect(),
    )
}

/// One step of a constraint cycle: the class edge `task`, walked forward
/// (`E(b) − E(a)`) or backward.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CycleStep {
    pub task: Task,
    pub forward: bool,
}

impl fmt::Display for CycleStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (a, b) = self.task.single_pair().expect("pairwise");
        if self.forward {
            write!(f, "{a}->{b}")
        } else {
            write!(f, "{b}<-{a}")
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Infeasibility {
    /// Labeled classes around these cycles sum to a nonzero value.
    NonzeroCycle {
        cycles: Vec<Vec<CycleStep>>,
        labels: Vec<usize>,
        excess: Energy,
    },
    /// The cycles force two classes to share a value (`other = None` means the
    /// class is forced to 0 without holding an identity task).
    CollapsedClasses {
        class: usize,
        other: Option<usize>,
        cycles: Vec<Vec<CycleStep>>,
        labels: Vec<usize>,
    },
}

impl fmt::Display for Infeasibility {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let show = |f: &mut fmt::Formatter<'_>, cycles: &[Vec<CycleStep>]| -> fmt::Result {
            for (i, c) in cycles.iter().enumerate() {
                if i > 0 {
                    f.write_str("; ")?;
                }
                f.write_str("[")?;
                for (j, s) in c.iter().enumerate() {
                    if j > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{s}")?;
                }
                f.write_str("]")?;
            }
            Ok(())
        };
        match self {
            Infeasibility::NonzeroCycle { cycles, excess, .. } => {
                write!(f, "cycle constraints sum to {excess} instead of 0: ")?;
                show(f, cycles)
            }
            Infeasibility::CollapsedClasses {
                class,
                other: Some(o),
                cycles,
                ..
            } => {
                write!(f, "classes {class} and {o} are forced to equal F: ")?;
                show(f, cycles)
            }
            Infeasibility::CollapsedClasses {
                class,
                other: None,
                cycles,
                ..
            } => {
                write!(f, "class {class} is forced to F = 0: ")?;
                show(f, cycles)
            }
        }
    }
}

enum Origin {
    Cycle(usize),
    Label(usize),
}

struct Row {
    coeffs: Vec<BigRational>,
    rhs: BigRational,
    origin: BTreeSet<usize>,
}

/// Solves for an energy labeling reproducing the partition's `F`-equality
/// structure. Class labels, where present, pin class values exactly;
/// unlabeled classes receive distinct generic values.
pub fn solve_labeling(partition: &TaskPartition) -> Result<EnergyLabeling, ConservationError> {
    let k = partition.classes().len();
    let unit = |i: usize| -> Vec<BigRational> {
        let mut v = vec![BigRational::zero(); k];
        v[i] = BigRational::one();
        v
    };

    // Adjacency over attributes; edges carry (class, task).
    let mut adj: BTreeMap<Attr, Vec<(Attr, usize, Task, bool)>> = BTreeMap::new();
    let mut edges: Vec<(Attr, Attr, usize, Task)> = Vec::new();
    for (ci, class) in partition.classes().iter().enumerate() {
        for t in &class.tasks {
            let (a, b) = t.single_pair().expect("partition holds pairwise tasks");
            adj.entry(a.clone())
                .or_default()
                .push((b.clone(), ci, t.clone(), true));
            adj.entry(b.clone())
                .or_default()
                .push((a.clone(), ci, t.clone(), false));
            edges.push((a.clone(), b.clone(), ci, t.clone()));
        }
    }

    // Spanning forest: potential of each node as a form over class values.
    let mut form: BTreeMap<Attr, Vec<BigRational>> = BTreeMap::new();
    let mut parent: BTreeMap<Attr, Option<(Attr, CycleStep)>> = BTreeMap::new();
    let mut depth: BTreeMap<Attr, usize> = BTreeMap::new();
    let mut tree_edges: BTreeSet<Task> = BTreeSet::new();
    let mut anchors = Vec::new();
    for root in adj.keys() {
        if form.contains_key(root) {
            continue;
        }
        anchors.push(root.clone());
        form.insert(root.clone(), vec![BigRational::zero(); k]);
        parent.insert(root.clone(), None);
        depth.insert(root.clone(), 0);
        let mut queue = VecDeque::from([root.clone()]);
        while let Some(u) = queue.pop_front() {
            for (v, ci, t, forward) in &adj[&u] {
                if form.contains_key(v) {
                    continue;
                }
                let mut f = form[&u].clone();
                if *forward {
                    f[*ci] += BigRational::one();
                } else {
                    f[*ci] -= BigRational::one();
                }
                form.insert(v.clone(), f);
                parent.insert(
                    v.clone(),
                    Some((
                        u.clone(),
                        CycleStep {
                            task: t.clone(),
                            forward: *forward,
                        },
                    )),
                );
                depth.insert(v.clone(), depth[&u] + 1);
                tree_edges.insert(t.clone());
                queue.push_back(v.clone());
            }
        }
    }

    // Fundamental cycle for a non-tree edge a→b: tree path a ⇝ b, then b→a
    // back along the edge reversed.
    let tree_path = |a: &Attr, b: &Attr| -> Vec<CycleStep> {
        let mut up_a = Vec::new();
        let mut down_b = Vec::new();
        let (mut x, mut y) = (a.clone(), b.clone());
        while depth[&x] > depth[&y] {
            let (p, step) = parent[&x].clone().expect("non-root");
            up_a.push(CycleStep {
                task: step.task,
                forward: !step.forward,
            });
            x = p;
        }
        while depth[&y] > depth[&x] {
            let (p, step) = parent[&y].clone().expect("non-root");
            down_b.push(step);
            y = p;
        }
        while x != y {
            let (px, sx) = parent[&x].clone().expect("non-root");
            up_a.push(CycleStep {
                task: sx.task,
                forward: !sx.forward,
            });
            x = px;
            let (py, sy) = parent[&y].clone().expect("non-root");
            down_b.push(sy);
            y = py;
        }
        down_b.reverse();
        up_a.extend(down_b);
        up_a
    };

    let mut cycles: Vec<Vec<CycleStep>> = Vec::new();
    let mut origins: Vec<Origin> = Vec::new();
    let mut rows: Vec<Row> = Vec::new();
    for (a, b, ci, t) in &edges {
        if tree_edges.contains(t) {
            continue;
        }
        // φ(b) − φ(a) − e_ci = 0
        let mut coeffs: Vec<BigRational> = form[b]
            .iter()
            .zip(&form[a])
            .map(|(x, y)| x - y)
            .collect();
        coeffs[*ci] -= BigRational::one();
        let mut cycle = tree_path(a, b);
        cycle.push(CycleStep {
            task: t.clone(),
            forward: false,
        });
        let idx = origins.len();
        origins.push(Origin::Cycle(cycles.len()));
        cycles.push(cycle);
        rows.push(Row {
            coeffs,
            rhs: BigRational::zero(),
            origin: BTreeSet::from([idx]),
        });
    }
    for (ci, class) in partition.classes().iter().enumerate() {
        if let Some(l) = &class.label {
            let idx = origins.len();
            origins.push(Origin::Label(ci));
            rows.push(Row {
                coeffs: unit(ci),
                rhs: l.clone(),
                origin: BTreeSet::from([idx]),
            });
        }
    }

    let witness = |origin: &BTreeSet<usize>| -> (Vec<Vec<CycleStep>>, Vec<usize>) {
        let mut cs = Vec::new();
        let mut ls = Vec::new();
        for &o in origin {
            match origins[o] {
                Origin::Cycle(c) => cs.push(cycles[c].clone()),
                Origin::Label(l) => ls.push(l),
            }
        }
        (cs, ls)
    };

    // Gauss-Jordan elimination with provenance.
    let mut pivots: Vec<(usize, Row)> = Vec::new();
    for mut row in rows {
        for (pc, prow) in &pivots {
            if !row.coeffs[*pc].is_zero() {
                let factor = row.coeffs[*pc].clone();
                for j in 0..k {
                    if !prow.coeffs[j].is_zero() {
                        let d = &factor * &prow.coeffs[j];
                        row.coeffs[j] -= d;
                    }
                }
                row.rhs -= &factor * &prow.rhs;
                row.origin.extend(prow.origin.iter().copied());
            }
        }
        match row.coeffs.iter().position(|c| !c.is_zero()) {
            None => {
                if !row.rhs.is_zero() {
                    let (cycles, labels) = witness(&row.origin);
                    return Err(ConservationError::Infeasible(Infeasibility::NonzeroCycle {
                        cycles,
                        labels,
                        excess: row.rhs,
                    }));
                }
            }
            Some(pc) => {
                let inv = row.coeffs[pc].recip();
                for c in row.coeffs.iter_mut() {
                    *c *= &inv;
                }
                row.rhs *= &inv;
                for (_, prow) in pivots.iter_mut() {
                    if !prow.coeffs[pc].is_zero() {
                        let factor = prow.coeffs[pc].clone();
                        for j in 0..k {
                            if !row.coeffs[j].is_zero() {
                                let d = &factor * &row.coeffs[j];
                                prow.coeffs[j] -= d;
                            }
                        }
                        prow.rhs -= &factor * &row.rhs;
                        let o = row.origin.clone();
                        prow.origin.extend(o);
                    }
                }
                pivots.push((pc, row));
            }
        }
    }

    let pivot_cols: BTreeSet<usize> = pivots.iter().map(|(c, _)| *c).collect();
    let free: Vec<usize> = (0..k).filter(|c| !pivot_cols.contains(c)).collect();
    // Solution: F = p + Σ t_i n_i.
    let mut particular = vec![BigRational::zero(); k];
    for (pc, row) in &pivots {
        particular[*pc] = row.rhs.clone();
    }
    let null_basis: Vec<Vec<BigRational>> = free
        .iter()
        .map(|&fc| {
            let mut v = vec![BigRational::zero(); k];
            v[fc] = BigRational::one();
            for (pc, row) in &pivots {
                v[*pc] = -row.coeffs[fc].clone();
            }
            v
        })
        .collect();

    // Separation requirements: class values F_i ≠ 0 off the zero class and
    // F_i ≠ F_j; each is the form e_i or e_i − e_j.
    let mut forms: Vec<(usize, Option<usize>)> = Vec::new();
    for i in 0..k {
        if !partition.classes()[i].is_zero() {
            forms.push((i, None));
        }
    }
    for i in 0..k {
        for j in i + 1..k {
            forms.push((i, Some(j)));
        }
    }
    let eval = |(i, j): (usize, Option<usize>), v: &[BigRational]| -> BigRational {
        match j {
            Some(j) => &v[i] - &v[j],
            None => v[i].clone(),
        }
    };
    for &(i, j) in &forms {
        if eval((i, j), &particular).is_zero() && null_basis.iter().all(|n| eval((i, j), n).is_zero()) {
            let mut origin = BTreeSet::new();
            for (pc, row) in &pivots {
                if *pc == i || Some(*pc) == j {
                    origin.extend(row.origin.iter().copied());
                }
            }
            let (cycles, labels) = witness(&origin);
            return Err(ConservationError::Infeasible(
                Infeasibility::CollapsedClasses {
                    class: i,
                    other: j,
                    cycles,
                    labels,
                },
            ));
        }
    }

    // Generic point: t_i = x^(i+1) for the first integer x that separates all
    // forms. Each form is a nonzero polynomial in x, so this terminates.
    let mut x: i64 = 1;
    let values = loop {
        let xr = BigRational::from_integer(BigInt::from(x));
        let mut f = particular.clone();
        let mut pw = xr.clone();
        for n in &null_basis {
            for (fi, ni) in f.iter_mut().zip(n) {
                if !ni.is_zero() {
                    *fi += &pw * ni;
                }
            }
            pw *= &xr;
        }
        if forms.iter().all(|&form| !eval(form, &f).is_zero()) {
            break f;
        }
        x += 1;
    };

    let mut labeling = EnergyLabeling::new();
    for (attr, phi) in &form {
        let e = phi
            .iter()
            .zip(&values)
            .filter(|(c, _)| !c.is_zero())
            .map(|(c, v)| c * v)
            .sum();
        labeling.set(attr.clone(), e);
    }
    labeling.anchors = anchors;
    Ok(labeling)
}

/// Largest absolute label, handy for reporting.
pub fn max_abs(labeling: &EnergyLabeling) -> Energy {
    labeling
        .values()
        .values()
        .map(|v| v.abs())
        .max()
        .unwrap_or_else(Energy::zero)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::relation::PossibilityRelation;

    fn s() -> SubstrateId {
        SubstrateId::atomic("s")
    }
    fn a(n: &str) -> Attr {
        Attr::atomic(n)
    }
    fn t(x: &str, y: &str) -> Task {
        Task::pairwise(s(), a(x), a(y)).unwrap()
    }
    fn q(n: i64) -> Energy {
        Energy::from_integer(n.into())
    }
    fn lab(vals: &[(&str, i64)]) -> EnergyLabeling {
        EnergyLabeling::from_values(vals.iter().map(|(n, v)| (a(n), q(*v))))
    }

    #[test]
    fn ladder_satisfies_both_conditions() {
        let part = TaskPartition::new(vec![
            TaskClass::new([t("a", "a")]),
            TaskClass::new([t("a", "b")]),
        ])
        .unwrap();
        let mut rel = PossibilityRelation::new();
        rel.insert(t("a", "a"), Status::Possible).unwrap();
        rel.insert(t("a", "b"), Status::Impossible).unwrap();
        rel.insert(t("b", "a"), Status::Impossible).unwrap();
        let ab_ba = t("a", "b").parallel(&t("b", "a"));
        rel.insert(ab_ba.clone(), Status::Possible).unwrap();
        rel.insert(ab_ba.transpose().unwrap(), Status::Possible).unwrap();
        let aa = t("a", "a").parallel(&t("a", "a"));
        rel.insert(aa, Status::Possible).unwrap();
        let r = check_class_conditions(&part, &rel).unwrap();
        assert!(r.is_valid(), "{:?}", r.violations);
        assert_eq!(r.gaps, 0);
        assert_eq!(r.classes[1].status, Status::Impossible);
    }

    #[test]
    fn mixed_class_flagged() {
        let part = TaskPartition::new(vec![TaskClass::new([t("a", "b"), t("a", "c")])]).unwrap();
        let mut rel = PossibilityRelation::new();
        rel.insert(t("a", "b"), Status::Possible).unwrap();
        rel.insert(t("a", "c"), Status::Impossible).unwrap();
        let r = check_class_conditions(&part, &rel).unwrap();
        assert!(matches!(r.violations[0], ClassViolation::MixedStatus { .. }));
        assert!(r.gaps > 0);
    }

    #[test]
    fn reversible_outside_zero_class_flagged() {
        let part = TaskPartition::new(vec![TaskClass::labeled([t("a", "b")], q(1))]).unwrap();
        let mut rel = PossibilityRelation::new();
        rel.insert(t("a", "b"), Status::Possible).unwrap();
        rel.insert(t("b", "a"), Status::Possible).unwrap();
        let r = check_class_conditions(&part, &rel).unwrap();
        assert!(r
            .violations
            .iter()
            .any(|v| matches!(v, ClassViolation::ReversibleOutsideZeroClass { .. })));
    }

    #[test]
    fn non_pairwise_rejected() {
        let two = Task::new(s(), [(a("a"), a("b")), (a("c"), a("d"))]).unwrap();
        assert!(matches!(
            TaskPartition::new(vec![TaskClass::new([two])]),
            Err(ConservationError::NonPairwiseTask(_))
        ));
    }

    #[test]
    fn classify_three_levels() {
        let attrs = [a("a"), a("b"), a("c")];
        let e = lab(&[("a", 0), ("b", 1), ("c", 2)]);
        let p = classify_by_labeling(&s(), &attrs, &e).unwrap();
        // oracle: enumerate the 9 tasks and group by E(b) - E(a)
        let mut groups: BTreeMap<i64, BTreeSet<Task>> = BTreeMap::new();
        let vals = [("a", 0), ("b", 1), ("c", 2)];
        for (x, ex) in vals {
            for (y, ey) in vals {
                groups.entry(ey - ex).or_default().insert(t(x, y));
            }
        }
        assert_eq!(p.classes().len(), 5);
        for (class, (f, tasks)) in p.classes().iter().zip(&groups) {
            assert_eq!(class.label, Some(q(*f)));
            assert_eq!(&class.tasks, tasks);
        }
        assert_eq!(p.class_of(&t("a", "b")), p.class_of(&t("b", "c")));
        assert!(p.classes()[2].is_zero());
    }

    #[test]
    fn classify_constant_and_antisymmetric() {
        let attrs = [a("a"), a("b"), a("c")];
        let p = classify_by_labeling(&s(), &attrs, &lab(&[("a", 4), ("b", 4), ("c", 4)])).unwrap();
        assert_eq!(p.classes().len(), 1);
        assert_eq!(p.classes()[0].tasks.len(), 9);

        let attrs = [a("a"), a("b")];
        let p = classify_by_labeling(&s(), &attrs, &lab(&[("a", 0), ("b", 1)])).unwrap();
        assert_ne!(p.class_of(&t("a", "b")), p.class_of(&t("b", "a")));
    }

    #[test]
    fn classify_missing_label() {
        let err = classify_by_labeling(&s(), &[a("a"), a("z")], &lab(&[("a", 0)])).unwrap_err();
        assert_eq!(err, ConservationError::MissingLabel(a("z")));
    }

    #[test]
    fn solve_round_trip_three_levels() {
        let attrs = [a("a"), a("b"), a("c")];
        let e = lab(&[("a", 0), ("b", 1), ("c", 2)]);
        let p = classify_by_labeling(&s(), &attrs, &e).unwrap();
        let r = solve_labeling(&p).unwrap();
        assert_eq!(r.anchors(), &[a("a")]);
        assert_eq!(r.energy(&a("a")), Some(q(0)));
        assert_eq!(r.energy(&a("b")), Some(q(1)));
        assert_eq!(r.energy(&a("c")), Some(q(2)));
    }

    #[test]
    fn solve_forced_degenerate() {
        let p = TaskPartition::new(vec![TaskClass::new([t("a", "b"), t("b", "a"), t("a", "a")])])
            .unwrap();
        let r = solve_labeling(&p).unwrap();
        assert_eq!(r.energy(&a("a")), r.energy(&a("b")));
        assert_eq!(r.f_value(&t("a", "b")).unwrap(), q(0));
    }

    #[test]
    fn solve_detects_collapse() {
        // E(b)-E(a) = E(c)-E(b) = E(c)-E(a) forces the common value to 0.
        let p = TaskPartition::new(vec![
            TaskClass::new([t("a", "a")]),
            TaskClass::new([t("a", "b"), t("b", "c"), t("a", "c")]),
        ])
        .unwrap();
        match solve_labeling(&p) {
            Err(ConservationError::Infeasible(Infeasibility::CollapsedClasses {
                class, cycles, ..
            })) => {
                assert_eq!(class, 1);
                assert!(!cycles.is_empty());
                assert_eq!(cycles[0].len(), 3);
            }
            other => panic!("expected collapse, got {other:?}"),
        }
    }

    #[test]
    fn solve_detects_nonzero_labeled_cycle() {
        let p = TaskPartition::new(vec![
            TaskClass::labeled([t("a", "b")], q(1)),
            TaskClass::labeled([t("b", "c")], q(1)),
            TaskClass::labeled([t("a", "c")], q(3)),
        ])
        .unwrap();
        match solve_labeling(&p) {
            Err(ConservationError::Infeasible(Infeasibility::NonzeroCycle { excess, .. })) => {
                assert!(!excess.is_zero())
            }
            other => panic!("expected nonzero cycle, got {other:?}"),
        }
    }

    #[test]
    fn unlabeled_partition_gets_distinct_values() {
        let attrs = [a("a"), a("b"), a("c")];
        let e = lab(&[("a", 0), ("b", 1), ("c", 3)]);
        let p = classify_by_labeling(&s(), &attrs, &e).unwrap().unlabeled();
        let r = solve_labeling(&p).unwrap();
        let back = classify_by_labeling(&s(), &attrs, &r).unwrap();
        let sets = |p: &TaskPartition| -> BTreeSet<BTreeSet<Task>> {
            p.classes().iter().map(|c| c.tasks.clone()).collect()
        };
        assert_eq!(sets(&back), sets(&p));
    }

    #[test]
    fn product_of_same_class_conserves() {
        let e = lab(&[("a", 0), ("b", 2), ("c", 5), ("d", 7)]);
        let t1 = t("a", "b");
        let t2 = t("c", "d");
        assert_eq!(e.f_value(&t1).unwrap(), e.f_value(&t2).unwrap());
        let prod = t1.parallel(&t2.transpose().unwrap());
        assert_eq!(e.f_value(&prod).unwrap(), q(0));
    }
}
