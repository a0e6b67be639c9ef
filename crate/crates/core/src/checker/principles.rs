//! Conservation, asymptotic distinguishability and interoperability checks
//! against any backend.

use crate::algebra::{SubstrateId, Variable};
use crate::backend::{BackendError, ModelBackend};
use crate::conservation::{check_class_conditions, classify_by_labeling, EnergyLabeling};
use crate::info_media::{check_asymptotic_distinguishability, is_information_variable, InfoError, InfoVerdict, InteropVerdict};
use crate::relation::Status;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Pass,
    Fail,
    Gap,
}

impl Outcome {
    pub fn as_str(self) -> &'static str {
        match self {
            Outcome::Pass => "pass",
            Outcome::Fail => "fail",
            Outcome::Gap => "gap",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PrincipleResult {
    pub outcome: Outcome,
    pub details: Vec<String>,
    pub checked: usize,
    pub gaps: usize,
}

impl PrincipleResult {
    fn new() -> Self {
        PrincipleResult {
            outcome: Outcome::Pass,
            details: Vec::new(),
            checked: 0,
            gaps: 0,
        }
    }

    fn finish(mut self) -> Self {
        self.outcome = if self.details.iter().any(|d| d.starts_with("violation")) {
            Outcome::Fail
        } else if self.checked == 0 || self.gaps > 0 && self.outcome == Outcome::Gap {
            Outcome::Gap
        } else {
            Outcome::Pass
        };
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PrincipleReport {
    pub conservation: PrincipleResult,
    pub asymptotic: PrincipleResult,
    pub interoperability: PrincipleResult,
    pub n_truncation: usize,
}

impl PrincipleReport {
    pub fn passes(&self) -> bool {
        [&self.conservation, &self.asymptotic, &self.interoperability]
            .iter()
            .all(|p| p.outcome != Outcome::Fail)
    }
}

fn undecided(e: &InfoError) -> bool {
    matches!(e, InfoError::Backend(BackendError::Undecided(_)))
}

/// Evaluates the three principles on every atomic substrate. `variables`
/// are the declared variables used for the interoperability check.
pub fn check_principles(
    backend: &ModelBackend,
    labeling: Option<&EnergyLabeling>,
    variables: &[Variable],
    n_truncation: usize,
) -> Result<PrincipleReport, InfoError> {
    let catalog = backend.catalog();
    let substrates: Vec<SubstrateId> = catalog.atomic_substrates().map(|s| SubstrateId::atomic(s.clone())).collect();

    let mut conservation = PrincipleResult::new();
    match labeling {
        None => conservation.details.push("no energy labeling".into()),
        Some(lab) => {
            for s in &substrates {
                let attrs = catalog.atomic_attributes(&s.parts()[0]);
                if attrs.iter().any(|a| lab.energy(a).is_none()) {
                    conservation.gaps += 1;
                    conservation.details.push(format!("{s}: some attributes carry no energy"));
                    continue;
                }
                let partition = classify_by_labeling(s, &attrs, lab).expect("labels checked");
                let lookup = |t: &crate::algebra::Task| backend.decide(t).map(|v| v.status).unwrap_or(Status::Unknown);
                let report = check_class_conditions(&partition, &lookup).expect("pairwise partition");
                conservation.checked += report.checked;
                conservation.gaps += report.gaps;
                for v in report.violations {
                    conservation.details.push(format!("violation: {s}: {v}"));
                }
            }
        }
    }
    if conservation.checked == 0 {
        conservation.outcome = Outcome::Gap;
    }

    let mut asymptotic = PrincipleResult::new();
    for s in &substrates {
        let attrs = catalog.atomic_attributes(&s.parts()[0]);
        for (i, x) in attrs.iter().enumerate() {
            for y in &attrs[i + 1..] {
                let mut statuses = Vec::new();
                for n in 1..=n_truncation.max(1) {
                    match check_asymptotic_distinguishability(s, x, y, n, 1e-6, backend) {
                        Ok(v) => statuses.push(v.status),
                        Err(e) if undecided(&e) => statuses.push(Status::Unknown),
                        Err(InfoError::Backend(BackendError::Quantum(_))) => statuses.push(Status::Unknown),
                        Err(e) => return Err(e),
                    }
                    if statuses.last() == Some(&Status::Possible) {
                        break;
                    }
                }
                if statuses.contains(&Status::Possible) {
                    asymptotic.checked += 1;
                } else if backend.is_quantum() {
                    // Quantum overlaps below 1 always vanish eventually.
                    asymptotic.checked += 1;
                    asymptotic.details.push(format!("{x}, {y}: not distinguishable up to level {n_truncation}"));
                } else if statuses.iter().all(|s| *s == Status::Impossible) {
                    asymptotic.checked += 1;
                    asymptotic
                        .details
                        .push(format!("violation: {x}, {y} not distinguishable at any level up to {n_truncation}"));
                } else {
                    asymptotic.gaps += 1;
                    asymptotic.details.push(format!("{x}, {y}: undecided"));
                }
            }
        }
    }
    if asymptotic.gaps > 0 {
        asymptotic.outcome = Outcome::Gap;
    }

    let mut interoperability = PrincipleResult::new();
    let mut media = Vec::new();
    for v in variables {
        match is_information_variable(v, backend) {
            Ok(InfoVerdict::Certified(_)) => media.push(v),
            Ok(InfoVerdict::Refused(_)) | Err(InfoError::TooSmall) => {}
            Err(e) if undecided(&e) => {}
            Err(e) => return Err(e),
        }
    }
    for (i, a) in media.iter().enumerate() {
        for b in &media[i..] {
            match crate::info_media::check_interoperability(a, b, backend) {
                Ok(InteropVerdict::Certified(_)) => interoperability.checked += 1,
                Ok(InteropVerdict::ProductRefused(r)) => {
                    interoperability.checked += 1;
                    interoperability
                        .details
                        .push(format!("violation: {a} x {b} refused at {}", r.task));
                }
                Ok(InteropVerdict::FactorRefused { .. }) => {}
                Err(e) if undecided(&e) => {
                    interoperability.gaps += 1;
                    interoperability.details.push(format!("{a} x {b}: undecided"));
                }
                Err(e) => return Err(e),
            }
        }
    }
    if interoperability.gaps > 0 {
        interoperability.outcome = Outcome::Gap;
    }

    Ok(PrincipleReport {
        conservation: conservation.finish(),
        asymptotic: asymptotic.finish(),
        interoperability: interoperability.finish(),
        n_truncation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{Attr, Task};
    use crate::backend::AbstractBackend;
    use crate::checker::closure::{AbstractModel, ClosureRuleSet};
    use crate::conservation::Energy;

    fn at(n: &str) -> Attr {
        Attr::atomic(n)
    }

    fn from_labeling(flip: bool) -> ModelBackend {
        let mut m = AbstractModel::new();
        m.catalog.add_substrate("s".into());
        let e = [("a", 0), ("b", 1), ("c", 1)];
        for (n, _) in e {
            m.catalog.add_attribute(&"s".into(), n.into());
        }
        let lab = EnergyLabeling::from_values(e.iter().map(|(n, v)| (at(n), Energy::from_integer((*v).into()))));
        for (x, ex) in e {
            for (y, ey) in e {
                if x == y {
                    continue;
                }
                let t = Task::pairwise(SubstrateId::atomic("s"), at(x), at(y)).unwrap();
                let mut st = if ex == ey { Status::Possible } else { Status::Impossible };
                if flip && x == "a" {
                    st = Status::Possible;
                }
                m.declare(t, st).unwrap();
            }
        }
        m.labeling = Some(lab);
        ModelBackend::Abstract(AbstractBackend::new(m, ClosureRuleSet::default(), 2).unwrap())
    }

    #[test]
    fn labeling_model_passes_conservation() {
        let b = from_labeling(false);
        let r = check_principles(&b, b.labeling().as_ref(), &[], 2).unwrap();
        assert_eq!(r.conservation.outcome, Outcome::Pass, "{:?}", r.conservation.details);
        assert_eq!(r.asymptotic.outcome, Outcome::Gap);
    }

    #[test]
    fn one_way_nonzero_task_violates() {
        let b = from_labeling(true);
        let r = check_principles(&b, b.labeling().as_ref(), &[], 2).unwrap();
        assert_eq!(r.conservation.outcome, Outcome::Fail);
        assert!(!r.passes());
    }
}
