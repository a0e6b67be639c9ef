//! Work variables, deterministic work extraction and adiabatic possibility.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::algebra::{n_fold_attribute, AlgebraError, Attr, SubstrateId, Task, Variable};
use crate::backend::{BackendError, ModelBackend, TaskVerdict};
use crate::conservation::{ConservationError, Energy, EnergyLabeling};
use crate::info_media::{is_distinguishable, DistVerdict, InfoError};
use crate::relation::Status;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WorkError {
    #[error("work attributes must be pairwise distinct")]
    NotDisjoint,
    #[error("work map sends two sources to {0}")]
    NonInjectiveWorkMap(Attr),
    #[error("{0} is not a member of the work variable")]
    NotWorkMember(Attr),
    #[error("source {0} has no residual or work outcome")]
    IncompleteSpec(Attr),
    #[error("task must be pairwise")]
    NotPairwise,
    #[error("no energy labeling available")]
    MissingLabeling,
    #[error("work variable is not certified: axiom {0} fails")]
    NotCertified(Axiom),
    #[error(transparent)]
    Backend(#[from] BackendError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Conservation(#[from] ConservationError),
    #[error(transparent)]
    Info(#[from] InfoError),
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct WorkVariable {
    pub substrate: SubstrateId,
    pub plus: Attr,
    pub zero: Attr,
    pub minus: Attr,
}

impl WorkVariable {
    pub fn new(substrate: SubstrateId, plus: Attr, zero: Attr, minus: Attr) -> Result<Self, WorkError> {
        if plus == zero || zero == minus || plus == minus {
            return Err(WorkError::NotDisjoint);
        }
        Ok(WorkVariable {
            substrate,
            plus,
            zero,
            minus,
        })
    }

    /// Members in the order (w+, w0, w−).
    pub fn members(&self) -> [&Attr; 3] {
        [&self.plus, &self.zero, &self.minus]
    }

    pub fn contains(&self, a: &Attr) -> bool {
        self.members().contains(&a)
    }

    pub fn variable(&self) -> Variable {
        Variable::new(self.substrate.clone(), self.members().into_iter().cloned().collect()).expect("distinct members")
    }
}

/// `{(w+,w0)→(w0,w+), (w0,w0)→(w+,w−)}` on `M ⊕ M`.
pub fn build_work_axiom_task(w: &WorkVariable) -> Task {
    let mm = w.substrate.compose(&w.substrate);
    Task::new(
        mm,
        [
            (w.plus.concat(&w.zero), w.zero.concat(&w.plus)),
            (w.zero.concat(&w.zero), w.plus.concat(&w.minus)),
        ],
    )
    .expect("distinct inputs")
}

/// The six one-way transitions `{w_m → w_n}`, `m ≠ n`.
pub fn transition_tasks(w: &WorkVariable) -> Vec<Task> {
    let m = w.members();
    let mut out = Vec::new();
    for a in m {
        for b in m {
            if a != b {
                out.push(Task::pairwise(w.substrate.clone(), a.clone(), b.clone()).expect("single pair"));
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Axiom {
    /// The two-pair work task is possible.
    WorkTask,
    /// Every one-way transition is impossible.
    Transitions,
    /// Equal spacing of the three energies.
    Spacing,
    /// Literal reading: all transitions in one energy class.
    StrictSameClass,
}

impl Axiom {
    pub fn as_str(self) -> &'static str {
        match self {
            Axiom::WorkTask => "work-task",
            Axiom::Transitions => "transitions",
            Axiom::Spacing => "spacing",
            Axiom::StrictSameClass => "strict-same-class",
        }
    }
}

impl std::fmt::Display for Axiom {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpacingCheck {
    pub upper_gap: Energy,
    pub lower_gap: Energy,
    pub holds: bool,
    /// `F` of each pair of the work task, in pair order.
    pub work_task_f: Vec<(Task, Energy)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StrictCheck {
    /// `F` of every one-way transition.
    pub transition_f: Vec<(Task, Energy)>,
    /// Whether all transitions share one `F` (which then must be 0).
    pub same_class: bool,
    pub explanation: String,
}

#[derive(Debug, Clone)]
pub struct WorkVerdict {
    pub work_task: TaskVerdict,
    pub transitions: Vec<TaskVerdict>,
    pub spacing: SpacingCheck,
    pub strict: Option<StrictCheck>,
    pub first_failure: Option<Axiom>,
}

impl WorkVerdict {
    pub fn certified(&self) -> bool {
        self.first_failure.is_none()
    }
}

fn f_of(labeling: &EnergyLabeling, a: &Attr, b: &Attr) -> Result<Energy, WorkError> {
    Ok(labeling.pair_delta(a, b)?)
}

/// Evaluates every axiom and reports the first failing one. In strict mode
/// the literal same-class reading is checked as well; it can never pass
/// together with the transition axiom.
pub fn is_work_variable(
    w: &WorkVariable,
    backend: &ModelBackend,
    labeling: &EnergyLabeling,
    strict: bool,
) -> Result<WorkVerdict, WorkError> {
    let work_task = backend.decide(&build_work_axiom_task(w))?;
    let transitions: Vec<TaskVerdict> = transition_tasks(w)
        .iter()
        .map(|t| backend.decide(t))
        .collect::<Result<_, _>>()?;

    let e = |a: &Attr| labeling.energy(a).ok_or(WorkError::MissingLabeling);
    let (ep, ez, em) = (e(&w.plus)?, e(&w.zero)?, e(&w.minus)?);
    let upper_gap = &ep - &ez;
    let lower_gap = &ez - &em;
    // Declaration order: (w+,w0) → (w0,w+) first, (w0,w0) → (w+,w−) second.
    let work_task_f = [
        (w.plus.concat(&w.zero), w.zero.concat(&w.plus)),
        (w.zero.concat(&w.zero), w.plus.concat(&w.minus)),
    ]
    .iter()
    .map(|(a, b)| Ok::<_, WorkError>((pair_task(&w.substrate.compose(&w.substrate), a, b), f_of(labeling, a, b)?)))
    .collect::<Result<Vec<_>, _>>()?;
    let spacing = SpacingCheck {
        holds: upper_gap == lower_gap,
        upper_gap,
        lower_gap,
        work_task_f,
    };

    let strict = if strict {
        let transition_f = transition_tasks(w)
            .into_iter()
            .map(|t| {
                let (a, b) = t.single_pair().expect("pairwise");
                let f = f_of(labeling, a, b)?;
                Ok::<_, WorkError>((t, f))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let same_class = transition_f.windows(2).all(|p| p[0].1 == p[1].1);
        let explanation = if same_class {
            "all transitions share one class; a transition and its transpose then have F = -F = 0, so the class is the zero class, whose members are possible, contradicting the transition axiom".to_string()
        } else {
            "transitions and their transposes carry opposite nonzero F, so they cannot share one class".to_string()
        };
        Some(StrictCheck {
            transition_f,
            same_class,
            explanation,
        })
    } else {
        None
    };

    let mut undecided = None;
    let mut first_failure = None;
    match work_task.status {
        Status::Impossible => first_failure = Some(Axiom::WorkTask),
        Status::Unknown => undecided = Some(work_task.task.clone()),
        Status::Possible => {}
    }
    if first_failure.is_none() {
        if transitions.iter().any(|v| v.status == Status::Possible) {
            first_failure = Some(Axiom::Transitions);
        } else if let Some(v) = transitions.iter().find(|v| v.status == Status::Unknown) {
            undecided.get_or_insert(v.task.clone());
        }
    }
    if first_failure.is_none() && !spacing.holds {
        first_failure = Some(Axiom::Spacing);
    }
    if first_failure.is_none() && strict.is_some() {
        first_failure = Some(Axiom::StrictSameClass);
    }
    if first_failure.is_none() {
        if let Some(t) = undecided {
            return Err(BackendError::Undecided(t.to_string()).into());
        }
    }
    Ok(WorkVerdict {
        work_task,
        transitions,
        spacing,
        strict,
        first_failure,
    })
}

fn pair_task(s: &SubstrateId, a: &Attr, b: &Attr) -> Task {
    Task::pairwise(s.clone(), a.clone(), b.clone()).expect("single pair")
}

/// Source variable with a residual attribute and a work outcome per member.
#[derive(Debug, Clone, PartialEq)]
pub struct WorkExtractionSpec {
    pub source: Variable,
    pub residual: BTreeMap<Attr, Attr>,
    pub work: BTreeMap<Attr, Attr>,
}

impl WorkExtractionSpec {
    pub fn new(source: Variable, outcomes: impl IntoIterator<Item = (Attr, Attr, Attr)>) -> Self {
        let mut residual = BTreeMap::new();
        let mut work = BTreeMap::new();
        for (x, f, w) in outcomes {
            residual.insert(x.clone(), f);
            work.insert(x, w);
        }
        WorkExtractionSpec { source, residual, work }
    }

    /// Sources without an energy label.
    pub fn unlabeled_sources(&self, labeling: &EnergyLabeling) -> Vec<Attr> {
        self.source
            .members()
            .iter()
            .filter(|x| labeling.energy(x).is_none())
            .cloned()
            .collect()
    }
}

/// `⋃ {(x, w0) → (f_x, w_x)}` on `S ⊕ M`.
pub fn build_extraction_task(spec: &WorkExtractionSpec, w: &WorkVariable) -> Result<Task, WorkError> {
    let mut used: Vec<&Attr> = Vec::new();
    let mut pairs = Vec::new();
    for x in spec.source.members() {
        let f = spec.residual.get(x).ok_or_else(|| WorkError::IncompleteSpec(x.clone()))?;
        let wx = spec.work.get(x).ok_or_else(|| WorkError::IncompleteSpec(x.clone()))?;
        if !w.contains(wx) {
            return Err(WorkError::NotWorkMember(wx.clone()));
        }
        if used.contains(&wx) {
            return Err(WorkError::NonInjectiveWorkMap(wx.clone()));
        }
        used.push(wx);
        pairs.push((x.concat(&w.zero), f.concat(wx)));
    }
    Ok(Task::new(spec.source.substrate().compose(&w.substrate), pairs)?)
}

#[derive(Debug, Clone)]
pub enum TheoremVerdict {
    /// Extraction is impossible; nothing to check.
    HoldsVacuously { extraction: TaskVerdict },
    Holds { extraction: TaskVerdict, distinguishability: DistVerdict },
    Violation { extraction: TaskVerdict, distinguishability: DistVerdict },
}

impl TheoremVerdict {
    pub fn is_violation(&self) -> bool {
        matches!(self, TheoremVerdict::Violation { .. })
    }

    pub fn extraction(&self) -> &TaskVerdict {
        match self {
            TheoremVerdict::HoldsVacuously { extraction }
            | TheoremVerdict::Holds { extraction, .. }
            | TheoremVerdict::Violation { extraction, .. } => extraction,
        }
    }
}

/// If extraction from the source is possible, its members must be distinguishable.
pub fn theorem1_check(
    spec: &WorkExtractionSpec,
    w: &WorkVariable,
    backend: &ModelBackend,
    labeling: &EnergyLabeling,
) -> Result<TheoremVerdict, WorkError> {
    let wv = is_work_variable(w, backend, labeling, false)?;
    if let Some(a) = wv.first_failure {
        return Err(WorkError::NotCertified(a));
    }
    let extraction = backend.require(&build_extraction_task(spec, w)?)?;
    if extraction.status == Status::Impossible {
        return Ok(TheoremVerdict::HoldsVacuously { extraction });
    }
    if spec.source.len() < 2 {
        return Ok(TheoremVerdict::HoldsVacuously { extraction });
    }
    let d = is_distinguishable(&spec.source, backend)?;
    if d.distinguishable {
        Ok(TheoremVerdict::Holds {
            extraction,
            distinguishability: d,
        })
    } else {
        Ok(TheoremVerdict::Violation {
            extraction,
            distinguishability: d,
        })
    }
}

/// `{(w+, w0^2n) → (w+, (w+,w−)^n); (w0, w0^2n) → (w0, (w−,w+)^n)}` on `M(2n+1)`.
pub fn build_asymptotic_extractor_task(w: &WorkVariable, n: usize) -> Result<Task, WorkError> {
    let s = w.substrate.n_fold(2 * n + 1)?;
    let ancilla = n_fold_attribute(&w.zero, 2 * n)?;
    let up = n_fold_attribute(&w.plus.concat(&w.minus), n)?;
    let down = n_fold_attribute(&w.minus.concat(&w.plus), n)?;
    Ok(Task::new(
        s,
        [
            (w.plus.concat(&ancilla), w.plus.concat(&up)),
            (w.zero.concat(&ancilla), w.zero.concat(&down)),
        ],
    )?)
}

#[derive(Debug, Clone)]
pub struct AdiabaticVerdict {
    pub status: Status,
    /// The work outcome `w1` that made the lifted task possible.
    pub via: Option<Attr>,
    pub tried: Vec<TaskVerdict>,
}

/// `{x → y}` is adiabatically possible when `{(x,w0) → (y,w1)}` is possible
/// for some `w1 ∈ W`.
pub fn is_adiabatically_possible(task: &Task, w: &WorkVariable, backend: &ModelBackend) -> Result<AdiabaticVerdict, WorkError> {
    let (x, y) = task.single_pair().ok_or(WorkError::NotPairwise)?;
    let s = task.substrate().compose(&w.substrate);
    let mut tried = Vec::new();
    let mut undecided = None;
    for w1 in w.members() {
        let lifted = Task::pairwise(s.clone(), x.concat(&w.zero), y.concat(w1))?;
        let v = backend.decide(&lifted)?;
        match v.status {
            Status::Possible => {
                tried.push(v);
                return Ok(AdiabaticVerdict {
                    status: Status::Possible,
                    via: Some(w1.clone()),
                    tried,
                });
            }
            Status::Unknown => {
                undecided.get_or_insert(lifted);
            }
            Status::Impossible => {}
        }
        tried.push(v);
    }
    if let Some(t) = undecided {
        return Err(BackendError::Undecided(t.to_string()).into());
    }
    Ok(AdiabaticVerdict {
        status: Status::Impossible,
        via: None,
        tried,
    })
}

/// Pairwise tasks to search for second-law witnesses: declared pairwise facts
/// (abstract) or every pair of distinct single-state atomic attributes
/// outside the work medium (quantum).
pub fn candidate_pairwise_tasks(backend: &ModelBackend, w: &WorkVariable) -> Vec<Task> {
    match backend {
        ModelBackend::Abstract(a) => a
            .model
            .facts
            .iter()
            .filter(|(t, _)| t.is_pairwise() && !t.is_identity())
            .map(|(t, _)| t.clone())
            .collect(),
        ModelBackend::Quantum(q) => {
            let mut out = Vec::new();
            for s in q.catalog().atomic_substrates() {
                let sid = SubstrateId::atomic(s.clone());
                if sid == w.substrate {
                    continue;
                }
                let attrs: Vec<Attr> = q
                    .catalog()
                    .atomic_attributes(s)
                    .into_iter()
                    .filter(|a| q.representative(a).is_ok())
                    .collect();
                for a in &attrs {
                    for b in &attrs {
                        if a != b {
                            out.push(Task::pairwise(sid.clone(), a.clone(), b.clone()).expect("single pair"));
                        }
                    }
                }
            }
            out
        }
    }
}

#[derive(Debug, Clone)]
pub struct SecondLawWitness {
    pub task: Task,
    pub forward: AdiabaticVerdict,
    pub backward: AdiabaticVerdict,
}

/// First candidate that is adiabatically possible while its transpose is not.
/// Undecided candidates are skipped.
pub fn second_law_witness(backend: &ModelBackend, w: &WorkVariable) -> Result<Option<SecondLawWitness>, WorkError> {
    for t in candidate_pairwise_tasks(backend, w) {
        let forward = match is_adiabatically_possible(&t, w, backend) {
            Ok(v) => v,
            Err(WorkError::Backend(BackendError::Undecided(_))) => continue,
            Err(e) => return Err(e),
        };
        if forward.status != Status::Possible {
            continue;
        }
        let back = t.transpose()?;
        let backward = match is_adiabatically_possible(&back, w, backend) {
            Ok(v) => v,
            Err(WorkError::Backend(BackendError::Undecided(_))) => continue,
            Err(e) => return Err(e),
        };
        if backward.status == Status::Impossible {
            return Ok(Some(SecondLawWitness {
                task: t,
                forward,
                backward,
            }));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backend::AbstractBackend;
    use crate::checker::closure::{AbstractModel, ClosureRuleSet};
    use crate::quantum::{QuantumModel, State};
    use num_complex::Complex64 as C64;

    fn at(n: &str) -> Attr {
        Attr::atomic(n)
    }

    fn q(n: i64) -> Energy {
        Energy::from_integer(n.into())
    }

    fn ket(v: &[f64]) -> State {
        State::from_iterator(v.len(), v.iter().map(|&x| C64::new(x, 0.0)))
    }

    fn qutrit(levels: [i64; 3]) -> (ModelBackend, WorkVariable) {
        let mut m = QuantumModel::new();
        m.add_substrate("m".into(), 3).unwrap();
        m.set_hamiltonian(&"m".into(), levels.iter().map(|&l| q(l)).collect()).unwrap();
        m.add_attribute("wm".into(), &"m".into(), vec![ket(&[1.0, 0.0, 0.0])]).unwrap();
        m.add_attribute("w0".into(), &"m".into(), vec![ket(&[0.0, 1.0, 0.0])]).unwrap();
        m.add_attribute("wp".into(), &"m".into(), vec![ket(&[0.0, 0.0, 1.0])]).unwrap();
        let w = WorkVariable::new(SubstrateId::atomic("m"), at("wp"), at("w0"), at("wm")).unwrap();
        (ModelBackend::Quantum(m), w)
    }

    #[test]
    fn work_task_shape() {
        let (_, w) = qutrit([-1, 0, 1]);
        let t = build_work_axiom_task(&w);
        assert_eq!(t.len(), 2);
        assert_eq!(
            t.apply(&Attr::tuple([&at("w0"), &at("w0")])),
            Some(&Attr::tuple([&at("wp"), &at("wm")]))
        );
    }

    #[test]
    fn qutrit_certifies() {
        let (b, w) = qutrit([-1, 0, 1]);
        let lab = b.labeling().unwrap();
        let v = is_work_variable(&w, &b, &lab, false).unwrap();
        assert!(v.certified(), "{:?}", v.first_failure);
        assert!(v.spacing.work_task_f.iter().all(|(_, f)| *f == q(0)));
    }

    #[test]
    fn unequal_spacing_flags_second_pair() {
        let (b, w) = qutrit([0, 1, 3]);
        let lab = b.labeling().unwrap();
        let v = is_work_variable(&w, &b, &lab, false).unwrap();
        assert!(!v.certified());
        assert!(!v.spacing.holds);
        // F = E(w+) + E(w−) − 2E(w0) = 3 + 0 − 2.
        let second = &v.spacing.work_task_f[1];
        assert_eq!(second.0.single_pair().unwrap().0, &Attr::tuple([&at("w0"), &at("w0")]));
        assert_eq!(second.1, q(1));
        assert_eq!(v.spacing.work_task_f[0].1, q(0));
    }

    #[test]
    fn strict_mode_never_certifies() {
        let (b, w) = qutrit([-1, 0, 1]);
        let lab = b.labeling().unwrap();
        let v = is_work_variable(&w, &b, &lab, true).unwrap();
        assert_eq!(v.first_failure, Some(Axiom::StrictSameClass));
        assert!(!v.strict.unwrap().same_class);
    }

    #[test]
    fn no_hamiltonian_fails_transitions() {
        let mut m = QuantumModel::new();
        m.add_substrate("m".into(), 3).unwrap();
        for (i, n) in ["wm", "w0", "wp"].iter().enumerate() {
            let mut v = [0.0; 3];
            v[i] = 1.0;
            m.add_attribute((*n).into(), &"m".into(), vec![ket(&v)]).unwrap();
        }
        let b = ModelBackend::Quantum(m);
        let w = WorkVariable::new(SubstrateId::atomic("m"), at("wp"), at("w0"), at("wm")).unwrap();
        let lab = EnergyLabeling::from_values([(at("wp"), q(1)), (at("w0"), q(0)), (at("wm"), q(-1))]);
        let v = is_work_variable(&w, &b, &lab, false).unwrap();
        assert_eq!(v.first_failure, Some(Axiom::Transitions));
    }

    #[test]
    fn extraction_spec_checks() {
        let (_, w) = qutrit([-1, 0, 1]);
        let s = Variable::new(SubstrateId::atomic("s"), vec![at("x1"), at("x2")]).unwrap();
        let ok = WorkExtractionSpec::new(s.clone(), [(at("x1"), at("f"), at("wp")), (at("x2"), at("f"), at("wm"))]);
        assert_eq!(build_extraction_task(&ok, &w).unwrap().len(), 2);
        let bad = WorkExtractionSpec::new(s, [(at("x1"), at("f"), at("wp")), (at("x2"), at("f"), at("wp"))]);
        assert!(matches!(build_extraction_task(&bad, &w), Err(WorkError::NonInjectiveWorkMap(_))));
        let single = Variable::new(SubstrateId::atomic("s"), vec![at("x1")]).unwrap();
        let one = WorkExtractionSpec::new(single, [(at("x1"), at("f"), at("wp"))]);
        assert_eq!(build_extraction_task(&one, &w).unwrap().len(), 1);
    }

    fn with_source(states: [[f64; 2]; 2]) -> (ModelBackend, WorkVariable, WorkExtractionSpec) {
        let (b, w) = qutrit([-1, 0, 1]);
        let ModelBackend::Quantum(mut m) = b else { unreachable!() };
        m.add_substrate("s".into(), 2).unwrap();
        m.add_attribute("x1".into(), &"s".into(), vec![ket(&states[0])]).unwrap();
        m.add_attribute("x2".into(), &"s".into(), vec![ket(&states[1])]).unwrap();
        let x = Variable::new(SubstrateId::atomic("s"), vec![at("x1"), at("x2")]).unwrap();
        let spec = WorkExtractionSpec::new(x, [(at("x1"), at("x1"), at("wp")), (at("x2"), at("x1"), at("wm"))]);
        (ModelBackend::Quantum(m), w, spec)
    }

    #[test]
    fn theorem_holds_orthogonal() {
        let (b, w, spec) = with_source([[1.0, 0.0], [0.0, 1.0]]);
        let lab = b.labeling().unwrap();
        assert!(matches!(theorem1_check(&spec, &w, &b, &lab).unwrap(), TheoremVerdict::Holds { .. }));
    }

    #[test]
    fn theorem_vacuous_nonorthogonal() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let (b, w, spec) = with_source([[1.0, 0.0], [h, h]]);
        let lab = b.labeling().unwrap();
        assert!(matches!(
            theorem1_check(&spec, &w, &b, &lab).unwrap(),
            TheoremVerdict::HoldsVacuously { .. }
        ));
    }

    #[test]
    fn extractor_task() {
        let (b, w) = qutrit([-1, 0, 1]);
        let t = build_asymptotic_extractor_task(&w, 1).unwrap();
        let tt = |a: &[&str]| Attr::from_names(a.iter().map(|&n| n.into()).collect());
        assert_eq!(t.apply(&tt(&["wp", "w0", "w0"])), Some(&tt(&["wp", "wp", "wm"])));
        assert_eq!(t.apply(&tt(&["w0", "w0", "w0"])), Some(&tt(&["w0", "wm", "wp"])));
        let lab = b.labeling().unwrap();
        for n in 1..4 {
            let t = build_asymptotic_extractor_task(&w, n).unwrap();
            for (a, o) in t.pairs() {
                assert_eq!(lab.pair_delta(a, o).unwrap(), q(0));
            }
        }
        // Trailing outputs are orthogonal, so the quantum task is possible.
        assert_eq!(b.decide(&t).unwrap().status, Status::Possible);
    }

    #[test]
    fn adiabatic_quantum() {
        let (b, w) = qutrit([-1, 0, 1]);
        let ModelBackend::Quantum(mut m) = b else { unreachable!() };
        m.add_substrate("s".into(), 2).unwrap();
        m.set_hamiltonian(&"s".into(), vec![q(0), q(1)]).unwrap();
        m.add_attribute("lo".into(), &"s".into(), vec![ket(&[1.0, 0.0])]).unwrap();
        m.add_attribute("hi".into(), &"s".into(), vec![ket(&[0.0, 1.0])]).unwrap();
        let b = ModelBackend::Quantum(m);
        let down = Task::pairwise(SubstrateId::atomic("s"), at("hi"), at("lo")).unwrap();
        let v = is_adiabatically_possible(&down, &w, &b).unwrap();
        assert_eq!(v.via, Some(at("wp")));
        let id = Task::pairwise(SubstrateId::atomic("s"), at("lo"), at("lo")).unwrap();
        assert_eq!(is_adiabatically_possible(&id, &w, &b).unwrap().via, Some(at("w0")));
        assert!(second_law_witness(&b, &w).unwrap().is_none());
    }

    fn abstract_work() -> (AbstractModel, WorkVariable) {
        let mut m = AbstractModel::new();
        m.catalog.add_substrate("m".into());
        m.catalog.add_substrate("b".into());
        for a in ["wp", "w0", "wm"] {
            m.catalog.add_attribute(&"m".into(), a.into());
        }
        for a in ["hot", "cool"] {
            m.catalog.add_attribute(&"b".into(), a.into());
        }
        m.labeling = Some(EnergyLabeling::from_values([
            (at("wp"), q(1)),
            (at("w0"), q(0)),
            (at("wm"), q(-1)),
            (at("hot"), q(1)),
            (at("cool"), q(0)),
        ]));
        let w = WorkVariable::new(SubstrateId::atomic("m"), at("wp"), at("w0"), at("wm")).unwrap();
        m.declare(build_work_axiom_task(&w), Status::Possible).unwrap();
        for t in transition_tasks(&w) {
            m.declare(t, Status::Impossible).unwrap();
        }
        (m, w)
    }

    #[test]
    fn abstract_transition_possible_fails() {
        let (mut m, w) = abstract_work();
        m.facts = {
            let mut r = crate::relation::PossibilityRelation::new();
            for (t, s) in m.facts.iter() {
                let s = if t == &transition_tasks(&w)[2] { Status::Possible } else { s };
                r.insert(t.clone(), s).unwrap();
            }
            r
        };
        let lab = m.labeling.clone().unwrap();
        let b = ModelBackend::Abstract(AbstractBackend::new(m, ClosureRuleSet::default(), 2).unwrap());
        assert_eq!(is_work_variable(&w, &b, &lab, false).unwrap().first_failure, Some(Axiom::Transitions));
    }

    #[test]
    fn abstract_violation_and_second_law() {
        let (mut m, w) = abstract_work();
        let bm = SubstrateId::atomic("b").compose(&SubstrateId::atomic("m"));
        let x = Variable::new(SubstrateId::atomic("b"), vec![at("hot"), at("cool")]).unwrap();
        let spec = WorkExtractionSpec::new(x.clone(), [(at("hot"), at("cool"), at("wp")), (at("cool"), at("cool"), at("w0"))]);
        m.declare(build_extraction_task(&spec, &w).unwrap(), Status::Possible).unwrap();
        m.declare_distinguishing(x, Status::Impossible).unwrap();
        let down = Task::pairwise(SubstrateId::atomic("b"), at("hot"), at("cool")).unwrap();
        m.declare(down.clone(), Status::Impossible).unwrap();
        for w1 in w.members() {
            m.declare(
                Task::pairwise(bm.clone(), at("cool").concat(&w.zero), at("hot").concat(w1)).unwrap(),
                Status::Impossible,
            )
            .unwrap();
        }
        let lab = m.labeling.clone().unwrap();
        let b = ModelBackend::Abstract(AbstractBackend::new(m, ClosureRuleSet::default(), 2).unwrap());
        assert!(theorem1_check(&spec, &w, &b, &lab).unwrap().is_violation());
        let wit = second_law_witness(&b, &w).unwrap().unwrap();
        assert_eq!(wit.task, down);
        assert_eq!(wit.forward.via, Some(at("wp")));
    }
}
