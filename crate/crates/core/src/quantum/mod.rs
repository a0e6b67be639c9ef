//! Finite-dimensional pure-state backend.
//!
//! Atomic substrates are Hilbert spaces of a fixed dimension with an optional
//! diagonal Hamiltonian. An attribute is a finite set of unit vectors;
//! composite attributes are tensor products of their slots. A task whose
//! attributes each hold one state is decided by two checks:
//!
//! * energy: every pair conserves the sharp energy sum, when both sides have one;
//! * Gram factorization: `G_in = G_out ∘ D` for a unit-diagonal PSD `D`, the
//!   Gram matrix of the residual states the constructor is left in.

pub mod gram;
pub mod oracle;

use std::collections::BTreeMap;

use nalgebra::DVector;
use num_complex::Complex64 as C64;
use num_traits::{ToPrimitive, Zero};
use thiserror::Error;

use crate::algebra::{Attr, Catalog, Name, SubstrateId, Task, Variable};
use crate::conservation::{Energy, EnergyLabeling};
use crate::relation::Status;

pub use gram::{Factorization, Gram, Obstruction, State};

/// Orthogonality and possibility threshold.
pub const ZERO_TOL: f64 = 1e-8;
/// Certificate recheck tolerance.
pub const CERT_TOL: f64 = 1e-10;
/// Eigenvalue floor for positive semidefiniteness.
pub const PSD_FLOOR: f64 = -1e-10;
/// Unit-norm tolerance for declared states.
pub const NORM_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuantumError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("unknown substrate {0}")]
    UnknownSubstrate(Name),
    #[error("unknown attribute {0}")]
    UnknownAttribute(Name),
    #[error("substrate {0} already declared")]
    DuplicateSubstrate(Name),
    #[error("attribute {0} already declared")]
    DuplicateAttribute(Name),
    #[error("substrate dimension must be at least 1")]
    ZeroDimension,
    #[error("hamiltonian of {substrate} lists {found} eigenvalues for dimension {dimension}")]
    HamiltonianSize {
        substrate: Name,
        dimension: usize,
        found: usize,
    },
    #[error("state {index} of attribute {attr} has norm {norm}, not 1")]
    NotUnitNorm { attr: Name, index: usize, norm: f64 },
    #[error("attribute {0} has no states")]
    EmptyAttribute(Name),
    #[error("attributes {0} and {1} share a state and are not disjoint")]
    NotDisjoint(Name, Name),
    #[error("attribute {0} holds several states; pairwise task decisions need one representative")]
    UnsupportedAttribute(Attr),
    #[error("attribute {attr} does not belong to substrate {substrate}")]
    WrongSubstrate { attr: Attr, substrate: SubstrateId },
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuantumSubstrate {
    pub dimension: usize,
    /// Diagonal Hamiltonian; `None` means no energy structure.
    pub hamiltonian: Option<Vec<Energy>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuantumAttribute {
    pub substrate: Name,
    pub states: Vec<State>,
}

/// Makes the first amplitude with modulus above `ZERO_TOL` real and positive.
pub fn normalize_phase(v: &State) -> State {
    match v.iter().find(|z| z.norm() > ZERO_TOL) {
        Some(z) => {
            let phase = z.conj() / z.norm();
            v.map(|x| x * phase)
        }
        None => v.clone(),
    }
}

pub fn kron(a: &State, b: &State) -> State {
    let mut out = DVector::zeros(a.len() * b.len());
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i * b.len() + j] = x * y;
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct NotSharp {
    pub attr: Name,
}

/// Why a task came out impossible, or the certificate that it is possible.
#[derive(Debug, Clone)]
pub struct QuantumDecision {
    pub status: Status,
    pub energy_violation: Option<EnergyViolation>,
    pub factorization: Option<Factorization>,
    pub g_in: Gram,
    pub g_out: Gram,
}

impl QuantumDecision {
    pub fn certificate(&self) -> Option<&Gram> {
        self.factorization.as_ref().and_then(|f| f.certificate.as_ref())
    }

    /// Pairwise infeasibility margin (see [`gram::pairwise_margin`]).
    pub fn margin(&self) -> f64 {
        gram::pairwise_margin(&self.g_in, &self.g_out)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnergyViolation {
    pub input: Attr,
    pub output: Attr,
    pub input_energy: Energy,
    pub output_energy: Energy,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Distinguishability {
    pub distinguishable: bool,
    /// Largest overlap between members of two different attributes.
    pub max_overlap: f64,
    /// The pair realising `max_overlap` when it is not below tolerance.
    pub witness: Option<(Attr, Attr)>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct QuantumModel {
    catalog: Catalog,
    substrates: BTreeMap<Name, QuantumSubstrate>,
    attributes: BTreeMap<Name, QuantumAttribute>,
    /// When false, energies are never compared.
    pub enforce_energy: bool,
}

impl QuantumModel {
    pub fn new() -> Self {
        QuantumModel {
            enforce_energy: true,
            ..Default::default()
        }
    }

    pub fn catalog(&self) -> &Catalog {
        &self.catalog
    }

    pub fn add_substrate(&mut self, name: Name, dimension: usize) -> Result<(), QuantumError> {
        if dimension == 0 {
            return Err(QuantumError::ZeroDimension);
        }
        if !self.catalog.add_substrate(name.clone()) {
            return Err(QuantumError::DuplicateSubstrate(name));
        }
        self.substrates.insert(
            name,
            QuantumSubstrate {
                dimension,
                hamiltonian: None,
            },
        );
        Ok(())
    }

    pub fn set_hamiltonian(&mut self, name: &Name, eigenvalues: Vec<Energy>) -> Result<(), QuantumError> {
        let s = self
            .substrates
            .get_mut(name)
            .ok_or_else(|| QuantumError::UnknownSubstrate(name.clone()))?;
        if eigenvalues.len() != s.dimension {
            return Err(QuantumError::HamiltonianSize {
                substrate: name.clone(),
                dimension: s.dimension,
                found: eigenvalues.len(),
            });
        }
        s.hamiltonian = Some(eigenvalues);
        Ok(())
    }

    pub fn substrate(&self, name: &Name) -> Option<&QuantumSubstrate> {
        self.substrates.get(name)
    }

    pub fn attribute(&self, name: &Name) -> Option<&QuantumAttribute> {
        self.attributes.get(name)
    }

    /// Declares an attribute; checks dimensions, unit norms and disjointness
    /// from every attribute already on the same substrate.
    pub fn add_attribute(&mut self, name: Name, substrate: &Name, states: Vec<State>) -> Result<(), QuantumError> {
        let dim = self
            .substrates
            .get(substrate)
            .ok_or_else(|| QuantumError::UnknownSubstrate(substrate.clone()))?
            .dimension;
        if self.attributes.contains_key(&name) {
            return Err(QuantumError::DuplicateAttribute(name));
        }
        if states.is_empty() {
            return Err(QuantumError::EmptyAttribute(name));
        }
        for (index, s) in states.iter().enumerate() {
            if s.len() != dim {
                return Err(QuantumError::DimensionMismatch {
                    expected: dim,
                    found: s.len(),
                });
            }
            let norm = s.norm();
            if (norm - 1.0).abs() > NORM_TOL {
                return Err(QuantumError::NotUnitNorm { attr: name, index, norm });
            }
        }
        let normalized: Vec<State> = states.iter().map(normalize_phase).collect();
        for (other, attr) in &self.attributes {
            if &attr.substrate != substrate {
                continue;
            }
            let shared = attr
                .states
                .iter()
                .map(normalize_phase)
                .any(|s| normalized.contains(&s));
            if shared {
                return Err(QuantumError::NotDisjoint(name, other.clone()));
            }
        }
        self.catalog.add_attribute(substrate, name.clone());
        self.attributes.insert(
            name,
            QuantumAttribute {
                substrate: substrate.clone(),
                states,
            },
        );
        Ok(())
    }

    fn atomic(&self, name: &Name) -> Result<&QuantumAttribute, QuantumError> {
        self.attributes
            .get(name)
            .ok_or_else(|| QuantumError::UnknownAttribute(name.clone()))
    }

    /// The single state of a (composite) attribute whose slots each hold one state.
    pub fn representative(&self, attr: &Attr) -> Result<State, QuantumError> {
        let mut out: Option<State> = None;
        for n in attr.names() {
            let a = self.atomic(n)?;
            if a.states.len() != 1 {
                return Err(QuantumError::UnsupportedAttribute(attr.clone()));
            }
            out = Some(match out {
                None => a.states[0].clone(),
                Some(prev) => kron(&prev, &a.states[0]),
            });
        }
        Ok(out.expect("attributes are nonempty"))
    }

    /// Every product state of the attribute.
    pub fn states(&self, attr: &Attr) -> Result<Vec<State>, QuantumError> {
        let mut out: Vec<State> = vec![DVector::from_element(1, C64::new(1.0, 0.0))];
        for n in attr.names() {
            let a = self.atomic(n)?;
            out = out
                .iter()
                .flat_map(|p| a.states.iter().map(move |s| kron(p, s)))
                .collect();
        }
        Ok(out)
    }

    /// Checks that every slot of `attr` belongs to the matching slot of `substrate`.
    pub fn check_on(&self, substrate: &SubstrateId, attr: &Attr) -> Result<(), QuantumError> {
        if self.catalog.contains(substrate, attr) {
            Ok(())
        } else {
            Err(QuantumError::WrongSubstrate {
                attr: attr.clone(),
                substrate: substrate.clone(),
            })
        }
    }

    /// Shared eigenvalue of an atomic attribute, when every member state is an
    /// eigenvector of the substrate Hamiltonian with the same eigenvalue.
    pub fn atomic_sharp_energy(&self, name: &Name) -> Option<Energy> {
        let a = self.attributes.get(name)?;
        let h = self.substrates.get(&a.substrate)?.hamiltonian.as_ref()?;
        let mut shared: Option<&Energy> = None;
        for s in &a.states {
            for (i, amp) in s.iter().enumerate() {
                if amp.norm() <= ZERO_TOL {
                    continue;
                }
                match shared {
                    None => shared = Some(&h[i]),
                    Some(e) if *e == h[i] => {}
                    Some(_) => return None,
                }
            }
        }
        shared.cloned()
    }

    /// Sum of slot energies; `None` unless every slot is sharp.
    pub fn sharp_energy(&self, attr: &Attr) -> Option<Energy> {
        let mut sum = Energy::zero();
        for n in attr.names() {
            sum += self.atomic_sharp_energy(n)?;
        }
        Some(sum)
    }

    /// Energy labels for every sharp atomic attribute; the rest are listed.
    pub fn induce_energy_labeling(&self) -> (EnergyLabeling, Vec<NotSharp>) {
        let mut labeling = EnergyLabeling::new();
        let mut missing = Vec::new();
        for name in self.attributes.keys() {
            match self.atomic_sharp_energy(name) {
                Some(e) => labeling.set(Attr::atomic(name.clone()), e),
                None => missing.push(NotSharp { attr: name.clone() }),
            }
        }
        (labeling, missing)
    }

    /// Decides a task whose attributes each hold a single state.
    pub fn decide_task(&self, task: &Task) -> Result<QuantumDecision, QuantumError> {
        let mut ins = Vec::with_capacity(task.len());
        let mut outs = Vec::with_capacity(task.len());
        for (a, b) in task.pairs() {
            self.check_on(task.substrate(), a)?;
            self.check_on(task.substrate(), b)?;
            ins.push(self.representative(a)?);
            outs.push(self.representative(b)?);
        }
        let g_in = gram::gram(&ins)?;
        let g_out = gram::gram(&outs)?;

        if self.enforce_energy {
            for (a, b) in task.pairs() {
                if let (Some(ea), Some(eb)) = (self.sharp_energy(a), self.sharp_energy(b)) {
                    if ea != eb {
                        return Ok(QuantumDecision {
                            status: Status::Impossible,
                            energy_violation: Some(EnergyViolation {
                                input: a.clone(),
                                output: b.clone(),
                                input_energy: ea,
                                output_energy: eb,
                            }),
                            factorization: None,
                            g_in,
                            g_out,
                        });
                    }
                }
            }
        }

        let f = gram::factorize(&g_in, &g_out);
        let status = if f.feasible() {
            Status::Possible
        } else {
            Status::Impossible
        };
        Ok(QuantumDecision {
            status,
            energy_violation: None,
            factorization: Some(f),
            g_in,
            g_out,
        })
    }

    /// Largest overlap magnitude between any member of `x` and any member of `y`.
    pub fn max_overlap(&self, x: &Attr, y: &Attr) -> Result<f64, QuantumError> {
        let xs = self.states(x)?;
        let ys = self.states(y)?;
        let mut m: f64 = 0.0;
        for u in &xs {
            for v in &ys {
                if u.len() != v.len() {
                    return Err(QuantumError::DimensionMismatch {
                        expected: u.len(),
                        found: v.len(),
                    });
                }
                m = m.max(u.dotc(v).norm());
            }
        }
        Ok(m)
    }

    /// Distinguishable iff the spans of the member attributes are pairwise
    /// orthogonal, i.e. every cross overlap is below `ZERO_TOL`.
    pub fn decide_variable_distinguishable(&self, y: &Variable) -> Result<Distinguishability, QuantumError> {
        let mut best = 0.0;
        let mut witness = None;
        let m = y.members();
        for i in 0..m.len() {
            for j in i + 1..m.len() {
                let o = self.max_overlap(&m[i], &m[j])?;
                if o > best || witness.is_none() && o >= ZERO_TOL {
                    best = o;
                    witness = Some((m[i].clone(), m[j].clone()));
                }
            }
        }
        let distinguishable = best < ZERO_TOL;
        Ok(Distinguishability {
            distinguishable,
            max_overlap: best,
            witness: if distinguishable { None } else { witness },
        })
    }

    /// `c^n` for the representative overlap `c`.
    pub fn n_copy_overlap(&self, x: &Attr, y: &Attr, n: u32) -> Result<f64, QuantumError> {
        let c = self.representative(x)?.dotc(&self.representative(y)?).norm();
        Ok(c.powi(n as i32))
    }
}

/// Smallest `n ≥ 1` with `c^n < epsilon`, by direct iteration. `None` when
/// `c ≥ 1` (the powers never drop).
pub fn min_copies(c: f64, epsilon: f64) -> Option<u32> {
    if c >= 1.0 {
        return None;
    }
    let mut p = c;
    let mut n = 1u32;
    while p >= epsilon {
        p *= c;
        n += 1;
    }
    Some(n)
}

/// Converts a rational eigenvalue for floating-point reporting.
pub fn energy_f64(e: &Energy) -> f64 {
    e.to_f64().unwrap_or(f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ket(v: &[f64]) -> State {
        State::from_iterator(v.len(), v.iter().map(|&x| C64::new(x, 0.0)))
    }

    fn q(n: i64) -> Energy {
        Energy::from_integer(n.into())
    }

    fn qubit() -> QuantumModel {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let mut m = QuantumModel::new();
        m.add_substrate("q".into(), 2).unwrap();
        m.add_attribute("0".into(), &"q".into(), vec![ket(&[1.0, 0.0])]).unwrap();
        m.add_attribute("1".into(), &"q".into(), vec![ket(&[0.0, 1.0])]).unwrap();
        m.add_attribute("p".into(), &"q".into(), vec![ket(&[h, h])]).unwrap();
        m
    }

    fn q1() -> SubstrateId {
        SubstrateId::atomic("q")
    }

    fn at(n: &str) -> Attr {
        Attr::atomic(n)
    }

    #[test]
    fn single_pair_is_possible() {
        let m = qubit();
        let t = Task::pairwise(q1(), at("0"), at("1")).unwrap();
        let d = m.decide_task(&t).unwrap();
        assert_eq!(d.status, Status::Possible);
        assert_eq!(d.certificate().unwrap().nrows(), 1);
    }

    #[test]
    fn swap_is_possible_with_identity_certificate() {
        let m = qubit();
        let t = Task::new(q1(), [(at("0"), at("1")), (at("1"), at("0"))]).unwrap();
        let d = m.decide_task(&t).unwrap();
        assert_eq!(d.status, Status::Possible);
        let c = d.certificate().unwrap();
        assert!((c - Gram::identity(2, 2)).norm() < 1e-12);
        assert!(gram::verify_certificate(&d.g_in, &d.g_out, c));
    }

    #[test]
    fn cloning_nonorthogonal_is_impossible() {
        let m = qubit();
        let qq = q1().n_fold(2).unwrap();
        let t = Task::new(
            qq,
            [
                (Attr::tuple([&at("0"), &at("0")]), Attr::tuple([&at("0"), &at("0")])),
                (Attr::tuple([&at("p"), &at("0")]), Attr::tuple([&at("p"), &at("p")])),
            ],
        )
        .unwrap();
        let d = m.decide_task(&t).unwrap();
        assert_eq!(d.status, Status::Impossible);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((d.g_in[(0, 1)].norm() - h).abs() < 1e-12);
        assert!((d.g_out[(0, 1)].norm() - 0.5).abs() < 1e-12);
        assert!(matches!(
            d.factorization.unwrap().obstruction,
            Some(Obstruction::OverlapGrows { .. })
        ));
    }

    #[test]
    fn multi_state_attribute_unsupported_for_tasks() {
        let mut m = QuantumModel::new();
        m.add_substrate("t".into(), 3).unwrap();
        m.add_attribute("a".into(), &"t".into(), vec![ket(&[1.0, 0.0, 0.0])]).unwrap();
        m.add_attribute("b".into(), &"t".into(), vec![ket(&[0.0, 1.0, 0.0]), ket(&[0.0, 0.0, 1.0])])
            .unwrap();
        let t = Task::pairwise(SubstrateId::atomic("t"), at("a"), at("b")).unwrap();
        assert!(matches!(m.decide_task(&t), Err(QuantumError::UnsupportedAttribute(_))));
        let y = Variable::new(SubstrateId::atomic("t"), vec![at("a"), at("b")]).unwrap();
        let v = m.decide_variable_distinguishable(&y).unwrap();
        assert!(v.distinguishable);
    }

    #[test]
    fn distinguishability_overlaps() {
        let m = qubit();
        let y = Variable::new(q1(), vec![at("0"), at("p")]).unwrap();
        let v = m.decide_variable_distinguishable(&y).unwrap();
        assert!(!v.distinguishable);
        assert!((v.max_overlap - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-9);

        let mut m = QuantumModel::new();
        m.add_substrate("t".into(), 3).unwrap();
        m.add_attribute("a".into(), &"t".into(), vec![ket(&[1.0, 0.0, 0.0]), ket(&[0.0, 1.0, 0.0])])
            .unwrap();
        m.add_attribute("b".into(), &"t".into(), vec![ket(&[0.0, 1.0, 0.0])]).unwrap_err();
        m.add_attribute("b".into(), &"t".into(), vec![ket(&[0.0, 0.6, 0.8])]).unwrap();
        let y = Variable::new(SubstrateId::atomic("t"), vec![at("a"), at("b")]).unwrap();
        let v = m.decide_variable_distinguishable(&y).unwrap();
        assert!(!v.distinguishable);
        assert!((v.max_overlap - 0.6).abs() < 1e-12);
    }

    #[test]
    fn disjointness_up_to_phase() {
        let mut m = qubit();
        let minus_zero = State::from_vec(vec![C64::new(-1.0, 0.0), C64::new(0.0, 0.0)]);
        assert!(matches!(
            m.add_attribute("z".into(), &"q".into(), vec![minus_zero]),
            Err(QuantumError::NotDisjoint(_, _))
        ));
        assert!(matches!(
            m.add_attribute("y".into(), &"q".into(), vec![ket(&[0.5, 0.5])]),
            Err(QuantumError::NotUnitNorm { .. })
        ));
    }

    #[test]
    fn induced_labels() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let mut m = QuantumModel::new();
        m.add_substrate("m".into(), 3).unwrap();
        m.set_hamiltonian(&"m".into(), vec![q(-1), q(0), q(1)]).unwrap();
        m.add_attribute("wm".into(), &"m".into(), vec![ket(&[1.0, 0.0, 0.0])]).unwrap();
        m.add_attribute("w0".into(), &"m".into(), vec![ket(&[0.0, 1.0, 0.0])]).unwrap();
        m.add_attribute("wp".into(), &"m".into(), vec![ket(&[0.0, 0.0, 1.0])]).unwrap();
        m.add_attribute("s".into(), &"m".into(), vec![ket(&[h, h, 0.0])]).unwrap();
        let (lab, missing) = m.induce_energy_labeling();
        assert_eq!(lab.energy(&at("wm")), Some(q(-1)));
        assert_eq!(lab.energy(&Attr::tuple([&at("wp"), &at("w0")])), Some(q(1)));
        assert_eq!(missing, vec![NotSharp { attr: "s".into() }]);
    }

    #[test]
    fn copies() {
        let m = qubit();
        let c = m.n_copy_overlap(&at("0"), &at("p"), 2).unwrap();
        assert!((c - 0.5).abs() < 1e-12);
        assert_eq!(m.n_copy_overlap(&at("0"), &at("1"), 7).unwrap(), 0.0);
        assert_eq!(min_copies(0.0, 1e-6), Some(1));
        assert_eq!(min_copies(1.0, 1e-6), None);
    }
}
