//! Substrates, attributes, variables and tasks, plus the task algebra
//! (transpose, serial and parallel composition, n-fold products).
//!
//! Composite substrates and composite attributes are stored flattened: a
//! substrate is an ordered tuple of atomic substrate names and an attribute is
//! the matching tuple of atomic attribute names. Nesting therefore never
//! survives construction, so `((T1 ⊗ T2) ⊗ T3)` and `(T1 ⊗ (T2 ⊗ T3))` are the
//! same value.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlgebraError {
    #[error("two pairs share the input attribute {0}")]
    DuplicateInput(Attr),
    #[error("two pairs share the output attribute {0}; the transpose would not be a task")]
    DuplicateOutput(Attr),
    #[error("serial composition mismatch: {0}")]
    CompositionMismatch(String),
    #[error("attribute {attr} has arity {found}, substrate {substrate} expects {expected}")]
    ArityMismatch {
        attr: Attr,
        substrate: SubstrateId,
        expected: usize,
        found: usize,
    },
    #[error("n-fold product needs at least one copy")]
    ZeroCopies,
    #[error("a task needs at least one pair")]
    EmptyTask,
    #[error("a variable needs at least one member")]
    EmptyVariable,
    #[error("variable member {0} listed twice")]
    DuplicateMember(Attr),
    #[error("slot permutation {0:?} is not a bijection on 0..{1}")]
    BadPermutation(Vec<usize>, usize),
}

/// An interned identifier. Cheap to clone and safe to share across threads.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Name(Arc<str>);

impl Name {
    pub fn new(s: &str) -> Self {
        Name(Arc::from(s))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl From<&str> for Name {
    fn from(s: &str) -> Self {
        Name::new(s)
    }
}

impl fmt::Display for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", &*self.0)
    }
}

/// Flattened tuple of atomic substrate names; `S ⊕ S ⊕ S` is `[S, S, S]`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct SubstrateId(Vec<Name>);

impl SubstrateId {
    pub fn atomic(name: impl Into<Name>) -> Self {
        SubstrateId(vec![name.into()])
    }

    pub fn from_parts(parts: Vec<Name>) -> Self {
        assert!(!parts.is_empty(), "substrate must have at least one part");
        SubstrateId(parts)
    }

    pub fn compose(&self, other: &SubstrateId) -> SubstrateId {
        let mut parts = self.0.clone();
        parts.extend(other.0.iter().cloned());
        SubstrateId(parts)
    }

    pub fn n_fold(&self, n: usize) -> Result<SubstrateId, AlgebraError> {
        if n == 0 {
            return Err(AlgebraError::ZeroCopies);
        }
        Ok(SubstrateId(self.0.iter().cycle().take(self.0.len() * n).cloned().collect()))
    }

    pub fn arity(&self) -> usize {
        self.0.len()
    }

    pub fn parts(&self) -> &[Name] {
        &self.0
    }

    pub fn is_atomic(&self) -> bool {
        self.0.len() == 1
    }

    pub fn permute(&self, perm: &[usize]) -> SubstrateId {
        SubstrateId(perm.iter().map(|&i| self.0[i].clone()).collect())
    }
}

impl fmt::Display for SubstrateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, p) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str("+")?;
            }
            write!(f, "{p}")?;
        }
        Ok(())
    }
}

/// A (possibly composite) attribute: one atomic attribute name per substrate slot.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Attr(Vec<Name>);

impl Attr {
    pub fn atomic(name: impl Into<Name>) -> Self {
        Attr(vec![name.into()])
    }

    /// Composite attribute of the parts, flattened.
    pub fn tuple<'a>(parts: impl IntoIterator<Item = &'a Attr>) -> Self {
        let v: Vec<Name> = parts.into_iter().flat_map(|a| a.0.iter().cloned()).collect();
        assert!(!v.is_empty(), "attribute tuple must be nonempty");
        Attr(v)
    }

    pub fn from_names(names: Vec<Name>) -> Self {
        assert!(!names.is_empty(), "attribute must have at least one slot");
        Attr(names)
    }

    pub fn arity(&self) -> usize {
        self.0.len()
    }

    pub fn names(&self) -> &[Name] {
        &self.0
    }

    pub fn concat(&self, other: &Attr) -> Attr {
        let mut v = self.0.clone();
        v.extend(other.0.iter().cloned());
        Attr(v)
    }

    pub fn slot(&self, i: usize) -> Attr {
        Attr(vec![self.0[i].clone()])
    }

    pub fn project(&self, slots: &[usize]) -> Attr {
        Attr(slots.iter().map(|&i| self.0[i].clone()).collect())
    }

    pub fn permute(&self, perm: &[usize]) -> Attr {
        self.project(perm)
    }
}

impl fmt::Display for Attr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.len() == 1 {
            return write!(f, "{}", self.0[0]);
        }
        f.write_str("(")?;
        for (i, p) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{p}")?;
        }
        f.write_str(")")
    }
}

/// `x(n) = (x, …, x)` on the n-fold substrate.
pub fn n_fold_attribute(x: &Attr, n: usize) -> Result<Attr, AlgebraError> {
    if n == 0 {
        return Err(AlgebraError::ZeroCopies);
    }
    Ok(Attr(x.0.iter().cycle().take(x.0.len() * n).cloned().collect()))
}

/// An atomic substrate together with its finite attribute set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Substrate {
    pub id: Name,
    pub attributes: BTreeSet<Name>,
}

/// Registry of atomic substrates. Composite substrates need no registration:
/// their attribute set is the product of the components'.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Catalog {
    substrates: BTreeMap<Name, BTreeSet<Name>>,
}

impl Catalog {
    pub fn new() -> Self {
        Self::default()
    }

    /// Registers an atomic substrate. Returns false if it already exists.
    pub fn add_substrate(&mut self, id: Name) -> bool {
        if self.substrates.contains_key(&id) {
            return false;
        }
        self.substrates.insert(id, BTreeSet::new());
        true
    }

    /// Adds an attribute to an atomic substrate; false on unknown substrate or
    /// duplicate attribute id.
    pub fn add_attribute(&mut self, substrate: &Name, attr: Name) -> bool {
        match self.substrates.get_mut(substrate) {
            Some(set) => set.insert(attr),
            None => false,
        }
    }

    pub fn has_substrate(&self, id: &Name) -> bool {
        self.substrates.contains_key(id)
    }

    pub fn substrate(&self, id: &Name) -> Option<Substrate> {
        self.substrates.get(id).map(|a| Substrate {
            id: id.clone(),
            attributes: a.clone(),
        })
    }

    pub fn atomic_substrates(&self) -> impl Iterator<Item = &Name> {
        self.substrates.keys()
    }

    /// Atomic attributes of one atomic substrate, in id order.
    pub fn atomic_attributes(&self, id: &Name) -> Vec<Attr> {
        self.substrates
            .get(id)
            .map(|s| s.iter().cloned().map(Attr::atomic).collect())
            .unwrap_or_default()
    }

    pub fn contains(&self, substrate: &SubstrateId, attr: &Attr) -> bool {
        substrate.arity() == attr.arity()
            && substrate
                .parts()
                .iter()
                .zip(attr.names())
                .all(|(s, a)| self.substrates.get(s).is_some_and(|set| set.contains(a)))
    }

    /// All attributes of a (composite) substrate, lexicographic order.
    pub fn attributes_of(&self, substrate: &SubstrateId) -> Vec<Attr> {
        let mut out: Vec<Vec<Name>> = vec![Vec::new()];
        for part in substrate.parts() {
            let Some(set) = self.substrates.get(part) else {
                return Vec::new();
            };
            out = out
                .into_iter()
                .flat_map(|prefix| {
                    set.iter().map(move |a| {
                        let mut v = prefix.clone();
                        v.push(a.clone());
                        v
                    })
                })
                .collect();
        }
        out.into_iter().map(Attr).collect()
    }

    /// Finds which atomic substrate declares the given atomic attribute.
    pub fn owner_of(&self, attr: &Name) -> Option<&Name> {
        self.substrates
            .iter()
            .find(|(_, set)| set.contains(attr))
            .map(|(s, _)| s)
    }
}

/// An ordered set of distinct attributes on one substrate.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Variable {
    substrate: SubstrateId,
    members: Vec<Attr>,
}

impl Variable {
    pub fn new(substrate: SubstrateId, members: Vec<Attr>) -> Result<Self, AlgebraError> {
        if members.is_empty() {
            return Err(AlgebraError::EmptyVariable);
        }
        let mut seen = BTreeSet::new();
        for m in &members {
            check_arity(&substrate, m)?;
            if !seen.insert(m) {
                return Err(AlgebraError::DuplicateMember(m.clone()));
            }
        }
        Ok(Variable { substrate, members })
    }

    pub fn substrate(&self) -> &SubstrateId {
        &self.substrate
    }

    pub fn members(&self) -> &[Attr] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// `X1 × X2` on `S1 ⊕ S2`, members in row-major order.
    pub fn product(&self, other: &Variable) -> Variable {
        let members = self
            .members
            .iter()
            .flat_map(|a| other.members.iter().map(move |b| a.concat(b)))
            .collect();
        Variable {
            substrate: self.substrate.compose(&other.substrate),
            members,
        }
    }
}

impl fmt::Display for Variable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, m) in self.members.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{m}")?;
        }
        write!(f, "}} on {}", self.substrate)
    }
}

fn check_arity(substrate: &SubstrateId, attr: &Attr) -> Result<(), AlgebraError> {
    if attr.arity() != substrate.arity() {
        return Err(AlgebraError::ArityMismatch {
            attr: attr.clone(),
            substrate: substrate.clone(),
            expected: substrate.arity(),
            found: attr.arity(),
        });
    }
    Ok(())
}

/// A deterministic task: a finite map from input attributes to output
/// attributes on one (possibly composite) substrate.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Task {
    substrate: SubstrateId,
    pairs: BTreeMap<Attr, Attr>,
}

impl Task {
    pub fn new(
        substrate: SubstrateId,
        pairs: impl IntoIterator<Item = (Attr, Attr)>,
    ) -> Result<Self, AlgebraError> {
        let mut map = BTreeMap::new();
        for (a, b) in pairs {
            check_arity(&substrate, &a)?;
            check_arity(&substrate, &b)?;
            if map.contains_key(&a) {
                return Err(AlgebraError::DuplicateInput(a));
            }
            map.insert(a, b);
        }
        if map.is_empty() {
            return Err(AlgebraError::EmptyTask);
        }
        Ok(Task {
            substrate,
            pairs: map,
        })
    }

    pub fn pairwise(substrate: SubstrateId, input: Attr, output: Attr) -> Result<Self, AlgebraError> {
        Task::new(substrate, [(input, output)])
    }

    /// Identity task on the given attributes.
    pub fn identity(
        substrate: SubstrateId,
        attrs: impl IntoIterator<Item = Attr>,
    ) -> Result<Self, AlgebraError> {
        Task::new(substrate, attrs.into_iter().map(|a| (a.clone(), a)))
    }

    /// The task that reorders substrate slots, `x ↦ x∘perm`, on every listed
    /// input attribute. Output substrate is the permuted substrate.
    pub fn slot_permutation(
        substrate: SubstrateId,
        perm: &[usize],
        attrs: impl IntoIterator<Item = Attr>,
    ) -> Result<Self, AlgebraError> {
        check_perm(perm, substrate.arity())?;
        let pairs: Vec<(Attr, Attr)> = attrs
            .into_iter()
            .map(|a| {
                let p = a.permute(perm);
                (a, p)
            })
            .collect();
        // Slot permutations are only tasks in this engine when they keep the
        // substrate fixed, i.e. permute equal parts; callers use them on
        // n-fold substrates.
        let permuted = substrate.permute(perm);
        if permuted != substrate {
            return Err(AlgebraError::CompositionMismatch(format!(
                "slot permutation {perm:?} changes substrate {substrate} into {permuted}"
            )));
        }
        Task::new(substrate, pairs)
    }

    pub fn substrate(&self) -> &SubstrateId {
        &self.substrate
    }

    pub fn pairs(&self) -> impl ExactSizeIterator<Item = (&Attr, &Attr)> {
        self.pairs.iter()
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn is_pairwise(&self) -> bool {
        self.pairs.len() == 1
    }

    /// The single pair of a pairwise task.
    pub fn single_pair(&self) -> Option<(&Attr, &Attr)> {
        if self.is_pairwise() {
            self.pairs.iter().next()
        } else {
            None
        }
    }

    pub fn inputs(&self) -> impl Iterator<Item = &Attr> {
        self.pairs.keys()
    }

    pub fn outputs(&self) -> impl Iterator<Item = &Attr> {
        self.pairs.values()
    }

    pub fn apply(&self, input: &Attr) -> Option<&Attr> {
        self.pairs.get(input)
    }

    pub fn is_identity(&self) -> bool {
        self.pairs.iter().all(|(a, b)| a == b)
    }

    /// True when every pair of `self` also occurs in `other`.
    pub fn is_subtask_of(&self, other: &Task) -> bool {
        self.substrate == other.substrate
            && self.pairs.iter().all(|(a, b)| other.pairs.get(a) == Some(b))
    }

    /// Restriction of the task to the given inputs; `None` if some input is absent.
    pub fn restrict<'a>(&self, inputs: impl IntoIterator<Item = &'a Attr>) -> Option<Task> {
        let mut pairs = BTreeMap::new();
        for a in inputs {
            pairs.insert(a.clone(), self.pairs.get(a)?.clone());
        }
        if pairs.is_empty() {
            return None;
        }
        Some(Task {
            substrate: self.substrate.clone(),
            pairs,
        })
    }

    pub fn transpose(&self) -> Result<Task, AlgebraError> {
        let mut map = BTreeMap::new();
        for (a, b) in &self.pairs {
            if map.insert(b.clone(), a.clone()).is_some() {
                return Err(AlgebraError::DuplicateOutput(b.clone()));
            }
        }
        Ok(Task {
            substrate: self.substrate.clone(),
            pairs: map,
        })
    }

    /// `self` then `next`: pairs `a ↦ next(self(a))`. Every output of `self`
    /// must be an input of `next`.
    pub fn serial(&self, next: &Task) -> Result<Task, AlgebraError> {
        if self.substrate != next.substrate {
            return Err(AlgebraError::CompositionMismatch(format!(
                "substrates differ: {} vs {}",
                self.substrate, next.substrate
            )));
        }
        let mut pairs = BTreeMap::new();
        for (a, b) in &self.pairs {
            let c = next.pairs.get(b).ok_or_else(|| {
                AlgebraError::CompositionMismatch(format!(
                    "output {b} of the first task is not an input of the second"
                ))
            })?;
            pairs.insert(a.clone(), c.clone());
        }
        Ok(Task {
            substrate: self.substrate.clone(),
            pairs,
        })
    }

    /// `self ⊗ other` on the composite substrate.
    pub fn parallel(&self, other: &Task) -> Task {
        let mut pairs = BTreeMap::new();
        for (a1, b1) in &self.pairs {
            for (a2, b2) in &other.pairs {
                pairs.insert(a1.concat(a2), b1.concat(b2));
            }
        }
        Task {
            substrate: self.substrate.compose(&other.substrate),
            pairs,
        }
    }

    /// Relabels every attribute slot through `perm` on both sides.
    pub fn permute_slots(&self, perm: &[usize]) -> Result<Task, AlgebraError> {
        check_perm(perm, self.substrate.arity())?;
        Ok(Task {
            substrate: self.substrate.permute(perm),
            pairs: self
                .pairs
                .iter()
                .map(|(a, b)| (a.permute(perm), b.permute(perm)))
                .collect(),
        })
    }

    /// Applies `f` to every atomic attribute name. Used for relabeling
    /// symmetry checks.
    pub fn rename(&self, f: impl Fn(&Name) -> Name) -> Task {
        let map_attr = |a: &Attr| Attr(a.0.iter().map(&f).collect());
        Task {
            substrate: self.substrate.clone(),
            pairs: self
                .pairs
                .iter()
                .map(|(a, b)| (map_attr(a), map_attr(b)))
                .collect(),
        }
    }
}

fn check_perm(perm: &[usize], n: usize) -> Result<(), AlgebraError> {
    let mut seen = vec![false; n];
    if perm.len() != n {
        return Err(AlgebraError::BadPermutation(perm.to_vec(), n));
    }
    for &i in perm {
        if i >= n || seen[i] {
            return Err(AlgebraError::BadPermutation(perm.to_vec(), n));
        }
        seen[i] = true;
    }
    Ok(())
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (a, b)) in self.pairs.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{a}->{b}")?;
        }
        write!(f, "}} on {}", self.substrate)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s() -> SubstrateId {
        SubstrateId::atomic("s")
    }

    fn a(n: &str) -> Attr {
        Attr::atomic(n)
    }

    fn task(pairs: &[(&str, &str)]) -> Task {
        Task::new(s(), pairs.iter().map(|(x, y)| (a(x), a(y)))).unwrap()
    }

    #[test]
    fn transpose_single_pair() {
        assert_eq!(task(&[("a", "b")]).transpose().unwrap(), task(&[("b", "a")]));
    }

    #[test]
    fn transpose_is_involution() {
        let t = task(&[("a", "b"), ("c", "d")]);
        assert_eq!(t.transpose().unwrap().transpose().unwrap(), t);
    }

    #[test]
    fn transpose_rejects_shared_output() {
        let t = task(&[("a", "b"), ("c", "b")]);
        assert_eq!(t.transpose(), Err(AlgebraError::DuplicateOutput(a("b"))));
    }

    #[test]
    fn serial_chains() {
        let t = task(&[("a", "b")]).serial(&task(&[("b", "c")])).unwrap();
        assert_eq!(t, task(&[("a", "c")]));
    }

    #[test]
    fn serial_with_transpose_is_identity() {
        let t = task(&[("a", "b"), ("c", "d")]);
        let back = task(&[("b", "a"), ("d", "c")]);
        assert_eq!(t.serial(&back).unwrap(), task(&[("a", "a"), ("c", "c")]));
    }

    #[test]
    fn serial_mismatch() {
        let err = task(&[("a", "b")]).serial(&task(&[("c", "d")])).unwrap_err();
        assert!(matches!(err, AlgebraError::CompositionMismatch(_)));
    }

    #[test]
    fn parallel_products() {
        let t1 = task(&[("a", "b")]);
        let t2 = Task::new(SubstrateId::atomic("u"), [(a("c"), a("d"))]).unwrap();
        let p = t1.parallel(&t2);
        assert_eq!(p.len(), 1);
        assert_eq!(
            p.apply(&Attr::tuple([&a("a"), &a("c")])),
            Some(&Attr::tuple([&a("b"), &a("d")]))
        );
        assert_eq!(
            p.transpose().unwrap(),
            t1.transpose().unwrap().parallel(&t2.transpose().unwrap())
        );

        let t3 = task(&[("a", "b"), ("x", "y")]);
        let q = t3.parallel(&t2);
        assert_eq!(q.len(), 2);
        assert_eq!(
            q.apply(&Attr::tuple([&a("x"), &a("c")])),
            Some(&Attr::tuple([&a("y"), &a("d")]))
        );
    }

    #[test]
    fn parallel_is_flat_associative() {
        let t1 = task(&[("a", "b")]);
        let t2 = task(&[("c", "d"), ("e", "f")]);
        let t3 = task(&[("g", "h")]);
        assert_eq!(
            t1.parallel(&t2).parallel(&t3),
            t1.parallel(&t2.parallel(&t3))
        );
    }

    #[test]
    fn n_fold() {
        assert_eq!(n_fold_attribute(&a("x"), 1).unwrap(), a("x"));
        let x3 = n_fold_attribute(&a("x"), 3).unwrap();
        assert_eq!(x3, Attr::tuple([&a("x"), &a("x"), &a("x")]));
        assert_eq!(x3.arity(), s().n_fold(3).unwrap().arity());
        assert_eq!(n_fold_attribute(&a("x"), 0), Err(AlgebraError::ZeroCopies));
    }

    #[test]
    fn duplicate_inputs_rejected() {
        let err = Task::new(s(), [(a("a"), a("b")), (a("a"), a("c"))]).unwrap_err();
        assert_eq!(err, AlgebraError::DuplicateInput(a("a")));
    }

    #[test]
    fn catalog_composite_attributes() {
        let mut c = Catalog::new();
        c.add_substrate("q".into());
        assert!(c.add_attribute(&"q".into(), "0".into()));
        assert!(c.add_attribute(&"q".into(), "1".into()));
        assert!(!c.add_attribute(&"q".into(), "1".into()));
        let qq = SubstrateId::atomic("q").n_fold(2).unwrap();
        let attrs = c.attributes_of(&qq);
        assert_eq!(attrs.len(), 4);
        assert!(attrs.iter().all(|x| c.contains(&qq, x)));
    }

    #[test]
    fn slot_permutation_swaps() {
        let ss = s().n_fold(2).unwrap();
        let ab = Attr::tuple([&a("a"), &a("b")]);
        let t = Task::slot_permutation(ss, &[1, 0], [ab.clone()]).unwrap();
        assert_eq!(t.apply(&ab), Some(&Attr::tuple([&a("b"), &a("a")])));
    }
}
