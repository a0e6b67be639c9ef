//! Three-valued possibility facts over tasks.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::algebra::Task;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Status {
    Possible,
    Impossible,
    Unknown,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Possible => "possible",
            Status::Impossible => "impossible",
            Status::Unknown => "unknown",
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("task {task} is declared both possible and impossible")]
pub struct Conflict {
    pub task: Task,
}

/// Anything that can answer "is this task possible?".
pub trait StatusLookup {
    fn status(&self, task: &Task) -> Status;
}

/// Explicit possible/impossible facts. Absent tasks are `Unknown`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PossibilityRelation {
    facts: BTreeMap<Task, Status>,
}

impl PossibilityRelation {
    pub fn new() -> Self {
        Self::default()
    }

    /// Records a fact. Recording `Unknown` is a no-op; a clash with an
    /// existing opposite fact is an error and leaves the relation unchanged.
    /// Returns true if the fact is new.
    pub fn insert(&mut self, task: Task, status: Status) -> Result<bool, Conflict> {
        if status == Status::Unknown {
            return Ok(false);
        }
        match self.facts.get(&task) {
            Some(&s) if s == status => Ok(false),
            Some(_) => Err(Conflict { task }),
            None => {
                self.facts.insert(task, status);
                Ok(true)
            }
        }
    }

    pub fn get(&self, task: &Task) -> Status {
        self.facts.get(task).copied().unwrap_or(Status::Unknown)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Task, Status)> {
        self.facts.iter().map(|(t, s)| (t, *s))
    }

    pub fn possible(&self) -> impl Iterator<Item = &Task> {
        self.iter()
            .filter(|(_, s)| *s == Status::Possible)
            .map(|(t, _)| t)
    }

    pub fn impossible(&self) -> impl Iterator<Item = &Task> {
        self.iter()
            .filter(|(_, s)| *s == Status::Impossible)
            .map(|(t, _)| t)
    }

    pub fn len(&self) -> usize {
        self.facts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.facts.is_empty()
    }
}

impl StatusLookup for PossibilityRelation {
    fn status(&self, task: &Task) -> Status {
        self.get(task)
    }
}

impl<F: Fn(&Task) -> Status> StatusLookup for F {
    fn status(&self, task: &Task) -> Status {
        self(task)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{Attr, SubstrateId};

    #[test]
    fn conflicting_facts_rejected() {
        let t = Task::pairwise(SubstrateId::atomic("s"), Attr::atomic("a"), Attr::atomic("b")).unwrap();
        let mut rel = PossibilityRelation::new();
        assert_eq!(rel.insert(t.clone(), Status::Possible), Ok(true));
        assert_eq!(rel.insert(t.clone(), Status::Possible), Ok(false));
        assert!(rel.insert(t.clone(), Status::Impossible).is_err());
        assert_eq!(rel.get(&t), Status::Possible);
    }
}
