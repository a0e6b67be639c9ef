//! A model to ask possibility questions of: declared facts with closure, or a
//! finite-dimensional pure-state quantum model.

use thiserror::Error;

use crate::algebra::{AlgebraError, Catalog, Task};
use crate::checker::closure::{close, AbstractModel, ClosedRelation, ClosureError, ClosureRuleSet, Justification};
use crate::conservation::EnergyLabeling;
use crate::quantum::{EnergyViolation, Gram, Obstruction, QuantumError, QuantumModel};
use crate::relation::Status;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BackendError {
    #[error("backend cannot decide {0}")]
    Undecided(String),
    #[error(transparent)]
    Quantum(#[from] QuantumError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Closure(#[from] ClosureError),
    #[error("inconsistent model: {0}")]
    Inconsistent(String),
}

#[derive(Debug, Clone)]
pub enum Evidence {
    Quantum {
        margin: f64,
        certificate: Option<Gram>,
        obstruction: Option<Obstruction>,
        energy: Option<EnergyViolation>,
    },
    Abstract(Justification),
}

#[derive(Debug, Clone)]
pub struct TaskVerdict {
    pub task: Task,
    pub status: Status,
    pub evidence: Evidence,
}

/// Abstract model together with its closed relation.
#[derive(Debug, Clone)]
pub struct AbstractBackend {
    pub model: AbstractModel,
    pub closed: ClosedRelation,
}

impl AbstractBackend {
    pub fn new(model: AbstractModel, rules: ClosureRuleSet, depth: usize) -> Result<Self, ClosureError> {
        let closed = close(&model, rules, depth)?;
        Ok(AbstractBackend { model, closed })
    }
}

#[derive(Debug, Clone)]
pub enum ModelBackend {
    Abstract(AbstractBackend),
    Quantum(QuantumModel),
}

impl ModelBackend {
    pub fn catalog(&self) -> &Catalog {
        match self {
            ModelBackend::Abstract(a) => &a.model.catalog,
            ModelBackend::Quantum(q) => q.catalog(),
        }
    }

    pub fn is_quantum(&self) -> bool {
        matches!(self, ModelBackend::Quantum(_))
    }

    /// Declared labeling (abstract) or the one induced by the Hamiltonians.
    pub fn labeling(&self) -> Option<EnergyLabeling> {
        match self {
            ModelBackend::Abstract(a) => a.model.labeling.clone(),
            ModelBackend::Quantum(q) => Some(q.induce_energy_labeling().0),
        }
    }

    /// Status of a task; abstract models may answer `Unknown`.
    pub fn decide(&self, task: &Task) -> Result<TaskVerdict, BackendError> {
        match self {
            ModelBackend::Abstract(a) => {
                let (status, why) = a.closed.explain(task);
                Ok(TaskVerdict {
                    task: task.clone(),
                    status,
                    evidence: Evidence::Abstract(why),
                })
            }
            ModelBackend::Quantum(q) => {
                let d = q.decide_task(task)?;
                let margin = d.margin();
                let (certificate, obstruction) = match d.factorization {
                    Some(f) => (f.certificate, f.obstruction),
                    None => (None, None),
                };
                Ok(TaskVerdict {
                    task: task.clone(),
                    status: d.status,
                    evidence: Evidence::Quantum {
                        margin,
                        certificate,
                        obstruction,
                        energy: d.energy_violation,
                    },
                })
            }
        }
    }

    /// Like [`decide`](Self::decide) but `Unknown` is an error.
    pub fn require(&self, task: &Task) -> Result<TaskVerdict, BackendError> {
        let v = self.decide(task)?;
        if v.status == Status::Unknown {
            return Err(BackendError::Undecided(task.to_string()));
        }
        Ok(v)
    }
}
