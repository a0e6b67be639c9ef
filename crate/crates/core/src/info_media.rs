//! Cloning, permutation and distinguishing tasks, and the information-medium
//! predicates built on them.

use thiserror::Error;

use crate::algebra::{n_fold_attribute, AlgebraError, Attr, SubstrateId, Task, Variable};
use crate::backend::{BackendError, ModelBackend, TaskVerdict};
use crate::quantum;
use crate::relation::Status;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum InfoError {
    #[error("receptacle {0} is not a member of the variable")]
    ReceptacleNotInVariable(Attr),
    #[error("permutation {0:?} is not a bijection on the variable's labels")]
    NotABijection(Vec<usize>),
    #[error("variable needs at least two members")]
    TooSmall,
    #[error("attributes {0} and {1} are not disjoint")]
    NotDisjoint(Attr, Attr),
    #[error(transparent)]
    Backend(#[from] BackendError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

impl From<quantum::QuantumError> for InfoError {
    fn from(e: quantum::QuantumError) -> Self {
        InfoError::Backend(e.into())
    }
}

/// `{(x, x0) → (x, x)}` for every `x ∈ X`, on `S ⊕ S`.
pub fn build_cloning_task(x: &Variable, x0: &Attr) -> Result<Task, InfoError> {
    if !x.members().contains(x0) {
        return Err(InfoError::ReceptacleNotInVariable(x0.clone()));
    }
    let s = x.substrate().compose(x.substrate());
    let pairs = x.members().iter().map(|m| (m.concat(x0), m.concat(m)));
    Ok(Task::new(s, pairs)?)
}

/// `{x_i → x_perm[i]}`.
pub fn build_permutation_task(x: &Variable, perm: &[usize]) -> Result<Task, InfoError> {
    let n = x.len();
    let mut seen = vec![false; n];
    if perm.len() != n {
        return Err(InfoError::NotABijection(perm.to_vec()));
    }
    for &p in perm {
        if p >= n || seen[p] {
            return Err(InfoError::NotABijection(perm.to_vec()));
        }
        seen[p] = true;
    }
    let m = x.members();
    Ok(Task::new(
        x.substrate().clone(),
        (0..n).map(|i| (m[i].clone(), m[perm[i]].clone())),
    )?)
}

/// All permutations of `0..n` in lexicographic order.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut p: Vec<usize> = (0..n).collect();
    loop {
        out.push(p.clone());
        let Some(i) = (1..n).rev().find(|&i| p[i - 1] < p[i]) else {
            break;
        };
        let j = (i..n).rev().find(|&j| p[j] > p[i - 1]).expect("exists");
        p.swap(i - 1, j);
        p[i..].reverse();
    }
    out
}

/// Permutations actually checked: all of them up to six members, otherwise a
/// transposition and a full cycle, which generate the symmetric group.
pub fn permutations_to_check(n: usize) -> Vec<Vec<usize>> {
    if n <= 6 {
        return permutations(n);
    }
    let mut swap: Vec<usize> = (0..n).collect();
    swap.swap(0, 1);
    let cycle: Vec<usize> = (0..n).map(|i| (i + 1) % n).collect();
    vec![swap, cycle]
}

#[derive(Debug, Clone)]
pub struct InformationVariableCertificate {
    pub variable: Variable,
    pub receptacle: Attr,
    pub cloning: TaskVerdict,
    pub permutations: Vec<TaskVerdict>,
}

#[derive(Debug, Clone)]
pub enum InfoVerdict {
    Certified(Box<InformationVariableCertificate>),
    /// The first task found impossible.
    Refused(Box<TaskVerdict>),
}

impl InfoVerdict {
    pub fn is_certified(&self) -> bool {
        matches!(self, InfoVerdict::Certified(_))
    }
}

/// Certifies `X` when some cloning task and every permutation task are Possible.
pub fn is_information_variable(x: &Variable, backend: &ModelBackend) -> Result<InfoVerdict, InfoError> {
    if x.len() < 2 {
        return Err(InfoError::TooSmall);
    }
    let mut first_refusal: Option<TaskVerdict> = None;
    let mut undecided = None;
    let mut cloning = None;
    for x0 in x.members() {
        let task = build_cloning_task(x, x0)?;
        let v = backend.decide(&task)?;
        match v.status {
            Status::Possible => {
                cloning = Some((x0.clone(), v));
                break;
            }
            Status::Impossible => {
                first_refusal.get_or_insert(v);
            }
            Status::Unknown => {
                undecided.get_or_insert(task);
            }
        }
    }
    let Some((receptacle, cloning)) = cloning else {
        if let Some(t) = undecided {
            return Err(BackendError::Undecided(t.to_string()).into());
        }
        return Ok(InfoVerdict::Refused(Box::new(first_refusal.expect("nonempty variable"))));
    };
    let mut perms = Vec::new();
    for p in permutations_to_check(x.len()) {
        let v = backend.require(&build_permutation_task(x, &p)?)?;
        if v.status == Status::Impossible {
            return Ok(InfoVerdict::Refused(Box::new(v)));
        }
        perms.push(v);
    }
    Ok(InfoVerdict::Certified(Box::new(InformationVariableCertificate {
        variable: x.clone(),
        receptacle,
        cloning,
        permutations: perms,
    })))
}

#[derive(Debug, Clone, PartialEq)]
pub enum DistWitness {
    /// Quantum: every cross overlap is below tolerance.
    Orthogonal { max_overlap: f64 },
    /// Quantum: the offending pair.
    Overlap { first: Attr, second: Attr, overlap: f64 },
    /// Abstract: a Possible task onto a certified information variable.
    Relabeling { task: Task, target: Variable },
    /// Abstract: a declared verdict on this variable or a related one.
    Declared { variable: Variable, status: Status },
}

#[derive(Debug, Clone, PartialEq)]
pub struct DistVerdict {
    pub distinguishable: bool,
    pub witness: DistWitness,
}

fn member_set(v: &Variable) -> std::collections::BTreeSet<&Attr> {
    v.members().iter().collect()
}

/// Whether `Y` can be mapped one-to-one onto an information variable.
pub fn is_distinguishable(y: &Variable, backend: &ModelBackend) -> Result<DistVerdict, InfoError> {
    if y.len() < 2 {
        return Err(InfoError::TooSmall);
    }
    match backend {
        ModelBackend::Quantum(q) => {
            let d = q.decide_variable_distinguishable(y)?;
            let witness = match d.witness {
                Some((first, second)) => DistWitness::Overlap {
                    first,
                    second,
                    overlap: d.max_overlap,
                },
                None => DistWitness::Orthogonal {
                    max_overlap: d.max_overlap,
                },
            };
            Ok(DistVerdict {
                distinguishable: d.distinguishable,
                witness,
            })
        }
        ModelBackend::Abstract(a) => {
            let ys = member_set(y);
            let mut declared_no = None;
            for (v, &st) in &a.model.distinguishing {
                if v.substrate() != y.substrate() {
                    continue;
                }
                let vs = member_set(v);
                if st == Status::Possible && ys.is_subset(&vs) {
                    return Ok(DistVerdict {
                        distinguishable: true,
                        witness: DistWitness::Declared {
                            variable: v.clone(),
                            status: st,
                        },
                    });
                }
                if st == Status::Impossible && vs.is_subset(&ys) && declared_no.is_none() {
                    declared_no = Some(v.clone());
                }
            }
            if let Some(found) = constructive_distinguisher(y, backend)? {
                if let Some(v) = declared_no {
                    return Err(BackendError::Inconsistent(format!(
                        "{v} is declared indistinguishable but {} distinguishes {y}",
                        match &found {
                            DistWitness::Relabeling { task, .. } => task.to_string(),
                            _ => String::new(),
                        }
                    ))
                    .into());
                }
                return Ok(DistVerdict {
                    distinguishable: true,
                    witness: found,
                });
            }
            if let Some(v) = declared_no {
                return Ok(DistVerdict {
                    distinguishable: false,
                    witness: DistWitness::Declared {
                        variable: v,
                        status: Status::Impossible,
                    },
                });
            }
            Err(BackendError::Undecided(format!("distinguishability of {y}")).into())
        }
    }
}

/// Searches Possible tasks from `Y` onto a certified information variable:
/// `Y` itself, restrictions of closed facts, and bijections onto declared
/// variables of the same size.
fn constructive_distinguisher(y: &Variable, backend: &ModelBackend) -> Result<Option<DistWitness>, InfoError> {
    let ModelBackend::Abstract(a) = backend else {
        return Ok(None);
    };
    let certified = |q: &Variable| matches!(is_information_variable(q, backend), Ok(InfoVerdict::Certified(_)));
    let identity = Task::identity(y.substrate().clone(), y.members().iter().cloned())?;
    if certified(y) {
        return Ok(Some(DistWitness::Relabeling {
            task: identity,
            target: y.clone(),
        }));
    }
    for fact in a.closed.possible_on(y.substrate()) {
        let Some(r) = fact.restrict(y.members()) else {
            continue;
        };
        let outs: Vec<Attr> = y.members().iter().map(|m| r.apply(m).expect("restricted").clone()).collect();
        let Ok(q) = Variable::new(y.substrate().clone(), outs) else {
            continue;
        };
        if certified(&q) {
            return Ok(Some(DistWitness::Relabeling { task: r, target: q }));
        }
    }
    for q in a.model.variables.values() {
        if q.substrate() != y.substrate() || q.len() != y.len() || !certified(q) {
            continue;
        }
        for p in permutations(q.len()) {
            let task = Task::new(
                y.substrate().clone(),
                y.members().iter().cloned().zip(p.iter().map(|&i| q.members()[i].clone())),
            )?;
            if backend.decide(&task)?.status == Status::Possible {
                return Ok(Some(DistWitness::Relabeling {
                    task,
                    target: q.clone(),
                }));
            }
        }
    }
    Ok(None)
}

#[derive(Debug, Clone)]
pub enum InteropVerdict {
    Certified(Box<InformationVariableCertificate>),
    /// One of the factors is not an information variable.
    FactorRefused { factor: usize, refusal: Box<TaskVerdict> },
    ProductRefused(Box<TaskVerdict>),
}

/// Checks that `X1 × X2` is an information variable of `S1 ⊕ S2`.
pub fn check_interoperability(x1: &Variable, x2: &Variable, backend: &ModelBackend) -> Result<InteropVerdict, InfoError> {
    for (i, x) in [x1, x2].into_iter().enumerate() {
        if let InfoVerdict::Refused(r) = is_information_variable(x, backend)? {
            return Ok(InteropVerdict::FactorRefused { factor: i, refusal: r });
        }
    }
    match is_information_variable(&x1.product(x2), backend)? {
        InfoVerdict::Certified(c) => Ok(InteropVerdict::Certified(c)),
        InfoVerdict::Refused(r) => Ok(InteropVerdict::ProductRefused(r)),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AsymptoticVerdict {
    pub level: usize,
    pub status: Status,
    /// Quantum only: largest member overlap `c`, `c^n`, and the least level with `c^n < epsilon`.
    pub overlap: Option<f64>,
    pub n_copy_overlap: Option<f64>,
    pub minimal_level: Option<u32>,
}

/// Distinguishability of `x(n)` from `x'(n)` on `S(n)`.
pub fn check_asymptotic_distinguishability(
    substrate: &SubstrateId,
    x: &Attr,
    x_prime: &Attr,
    n: usize,
    epsilon: f64,
    backend: &ModelBackend,
) -> Result<AsymptoticVerdict, InfoError> {
    if x == x_prime {
        return Err(InfoError::NotDisjoint(x.clone(), x_prime.clone()));
    }
    match backend {
        ModelBackend::Quantum(q) => {
            let c = q.max_overlap(x, x_prime)?;
            let value = c.powi(n as i32);
            Ok(AsymptoticVerdict {
                level: n,
                status: if value < epsilon {
                    Status::Possible
                } else {
                    Status::Impossible
                },
                overlap: Some(c),
                n_copy_overlap: Some(value),
                minimal_level: quantum::min_copies(c, epsilon),
            })
        }
        ModelBackend::Abstract(_) => {
            let sn = substrate.n_fold(n)?;
            let y = Variable::new(sn, vec![n_fold_attribute(x, n)?, n_fold_attribute(x_prime, n)?])?;
            let status = match is_distinguishable(&y, backend) {
                Ok(d) if d.distinguishable => Status::Possible,
                Ok(_) => Status::Impossible,
                Err(InfoError::Backend(BackendError::Undecided(_))) => Status::Unknown,
                Err(e) => return Err(e),
            };
            Ok(AsymptoticVerdict {
                level: n,
                status,
                overlap: None,
                n_copy_overlap: None,
                minimal_level: None,
            })
        }
    }
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

    fn ket(v: &[f64]) -> State {
        State::from_iterator(v.len(), v.iter().map(|&x| C64::new(x, 0.0)))
    }

    fn qubit() -> ModelBackend {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let mut m = QuantumModel::new();
        m.add_substrate("q".into(), 2).unwrap();
        m.add_attribute("0".into(), &"q".into(), vec![ket(&[1.0, 0.0])]).unwrap();
        m.add_attribute("1".into(), &"q".into(), vec![ket(&[0.0, 1.0])]).unwrap();
        m.add_attribute("p".into(), &"q".into(), vec![ket(&[h, h])]).unwrap();
        ModelBackend::Quantum(m)
    }

    fn var(names: &[&str]) -> Variable {
        Variable::new(SubstrateId::atomic("q"), names.iter().map(|n| at(n)).collect()).unwrap()
    }

    #[test]
    fn cloning_is_controlled_not() {
        let t = build_cloning_task(&var(&["0", "1"]), &at("0")).unwrap();
        let qq = SubstrateId::atomic("q").compose(&SubstrateId::atomic("q"));
        let tt = |a: &str, b: &str| Attr::tuple([&at(a), &at(b)]);
        let cnot = Task::new(qq, [(tt("0", "0"), tt("0", "0")), (tt("1", "0"), tt("1", "1"))]).unwrap();
        assert_eq!(t, cnot);
        assert!(build_cloning_task(&var(&["0", "1"]), &at("p")).is_err());
        assert_eq!(build_cloning_task(&var(&["0"]), &at("0")).unwrap().len(), 1);
    }

    #[test]
    fn permutation_tasks() {
        let x = var(&["0", "1", "p"]);
        let t = build_permutation_task(&x, &[1, 2, 0]).unwrap();
        assert_eq!(t.apply(&at("p")), Some(&at("0")));
        assert!(build_permutation_task(&x, &[0, 0, 1]).is_err());
        assert!(build_permutation_task(&x, &[0, 1, 2]).unwrap().is_identity());
        assert_eq!(permutations(4).len(), 24);
        assert_eq!(permutations_to_check(7).len(), 2);
    }

    #[test]
    fn qubit_information_variables() {
        let b = qubit();
        assert!(is_information_variable(&var(&["0", "1"]), &b).unwrap().is_certified());
        match is_information_variable(&var(&["0", "p"]), &b).unwrap() {
            InfoVerdict::Refused(v) => assert_eq!(v.task.substrate().arity(), 2),
            _ => panic!("cloning must fail"),
        }
        assert!(is_distinguishable(&var(&["0", "1"]), &b).unwrap().distinguishable);
        assert!(!is_distinguishable(&var(&["0", "p"]), &b).unwrap().distinguishable);
    }

    #[test]
    fn two_qubit_interop() {
        let b = qubit();
        match check_interoperability(&var(&["0", "1"]), &var(&["0", "1"]), &b).unwrap() {
            InteropVerdict::Certified(c) => assert_eq!(c.variable.len(), 4),
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            check_interoperability(&var(&["0", "1"]), &var(&["0", "p"]), &b).unwrap(),
            InteropVerdict::FactorRefused { factor: 1, .. }
        ));
    }

    #[test]
    fn asymptotic_levels() {
        let b = qubit();
        let q = SubstrateId::atomic("q");
        let v = check_asymptotic_distinguishability(&q, &at("0"), &at("p"), 40, 1e-6, &b).unwrap();
        assert_eq!(v.minimal_level, Some(40));
        assert_eq!(v.status, Status::Possible);
        let v = check_asymptotic_distinguishability(&q, &at("0"), &at("p"), 39, 1e-6, &b).unwrap();
        assert_eq!(v.status, Status::Impossible);
        let v = check_asymptotic_distinguishability(&q, &at("0"), &at("1"), 1, 1e-6, &b).unwrap();
        assert_eq!(v.minimal_level, Some(1));
    }

    fn abstract_bits() -> AbstractModel {
        let mut m = AbstractModel::new();
        m.catalog.add_substrate("s".into());
        for a in ["0", "1", "y0", "y1"] {
            m.catalog.add_attribute(&"s".into(), a.into());
        }
        m
    }

    fn s_var(names: &[&str]) -> Variable {
        Variable::new(SubstrateId::atomic("s"), names.iter().map(|n| at(n)).collect()).unwrap()
    }

    #[test]
    fn abstract_cloning_declared_impossible() {
        let mut m = abstract_bits();
        let x = s_var(&["0", "1"]);
        for x0 in x.members() {
            m.declare(build_cloning_task(&x, x0).unwrap(), Status::Impossible).unwrap();
        }
        let b = ModelBackend::Abstract(AbstractBackend::new(m, ClosureRuleSet::default(), 2).unwrap());
        assert!(!is_information_variable(&x, &b).unwrap().is_certified());
    }

    #[test]
    fn abstract_relabeling_distinguishes() {
        let mut m = abstract_bits();
        let x = s_var(&["0", "1"]);
        m.declare(build_cloning_task(&x, &at("0")).unwrap(), Status::Possible).unwrap();
        m.declare(build_permutation_task(&x, &[1, 0]).unwrap(), Status::Possible).unwrap();
        m.declare(
            Task::new(SubstrateId::atomic("s"), [(at("y0"), at("0")), (at("y1"), at("1"))]).unwrap(),
            Status::Possible,
        )
        .unwrap();
        m.variables.insert("X".into(), x.clone());
        let b = ModelBackend::Abstract(AbstractBackend::new(m, ClosureRuleSet::default(), 2).unwrap());
        assert!(is_information_variable(&x, &b).unwrap().is_certified());
        let d = is_distinguishable(&s_var(&["y0", "y1"]), &b).unwrap();
        assert!(d.distinguishable);
        assert!(matches!(d.witness, DistWitness::Relabeling { .. }));
        assert!(is_distinguishable(&x, &b).unwrap().distinguishable);
    }
}
