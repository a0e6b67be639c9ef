use std::fmt;

use crate::conservation::Energy;
use crate::relation::Status;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

/// Identifiers compare by name only, so documents compare structurally.
#[derive(Debug, Clone)]
pub struct Ident {
    pub name: String,
    pub pos: Pos,
}

impl PartialEq for Ident {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name
    }
}

impl Eq for Ident {}

/// Real-valued amplitude expression.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    /// Literal as written, e.g. `0.5` or `2`.
    Num(String),
    Neg(Box<Expr>),
    Sqrt(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinOp {
    pub fn precedence(self) -> u8 {
        match self {
            BinOp::Add | BinOp::Sub => 1,
            BinOp::Mul | BinOp::Div => 2,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
        }
    }
}

impl Expr {
    pub fn eval(&self) -> f64 {
        match self {
            Expr::Num(s) => s.parse().expect("lexed number"),
            Expr::Neg(e) => -e.eval(),
            Expr::Sqrt(e) => e.eval().sqrt(),
            Expr::Bin(op, a, b) => {
                let (a, b) = (a.eval(), b.eval());
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => a / b,
                }
            }
        }
    }
}

/// `a` or `(a, b, ...)`.
#[derive(Debug, Clone)]
pub struct AttrRef {
    pub parts: Vec<Ident>,
    pub pos: Pos,
}

impl PartialEq for AttrRef {
    fn eq(&self, other: &Self) -> bool {
        self.parts == other.parts
    }
}

impl Eq for AttrRef {}

impl AttrRef {
    pub fn is_tuple(&self) -> bool {
        self.parts.len() > 1
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Stmt {
    Substrate { id: Ident, dim: Option<usize> },
    Compose { id: Ident, left: Ident, right: Ident },
    Hamiltonian { substrate: Ident, eigenvalues: Vec<Energy> },
    AttributeStates { id: Ident, substrate: Ident, states: Vec<Vec<(Expr, Expr)>> },
    AttributeEnergy { id: Ident, substrate: Ident, energy: Option<Energy> },
    Variable { id: Ident, members: Vec<AttrRef> },
    FactTask { status: Status, pairs: Vec<(AttrRef, AttrRef)>, substrate: Ident },
    FactDistinguish { status: Status, members: Vec<AttrRef>, substrate: Ident },
    Query(Query),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Query {
    InfoVariable(Ident),
    Distinguishable(Ident),
    Interoperable(Ident, Ident),
    WorkVariable(Ident),
    Extract { work: Ident, outcomes: Vec<Outcome> },
    Theorem1 { work: Ident, outcomes: Vec<Outcome> },
    ClassifyEnergy(Ident),
    Adiabatic { work: Ident, from: AttrRef, to: AttrRef },
    Derive { work: Ident, copies: usize, depth: Option<usize> },
    SearchCounterexample { attributes: usize, arity: usize, n_truncation: usize, disable: Vec<Ident> },
    Asymptotic { x: AttrRef, y: AttrRef, copies: usize, epsilon: String },
    Task { pairs: Vec<(AttrRef, AttrRef)>, substrate: Ident },
    Cloning { variable: Ident, receptacle: AttrRef },
    SecondLaw(Ident),
}

/// One `x -> (f, w)` line of an extraction query.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub source: AttrRef,
    pub residual: AttrRef,
    pub work: AttrRef,
}

impl Query {
    pub fn name(&self) -> &'static str {
        match self {
            Query::InfoVariable(_) => "info-variable",
            Query::Distinguishable(_) => "distinguishable",
            Query::Interoperable(..) => "interoperable",
            Query::WorkVariable(_) => "work-variable",
            Query::Extract { .. } => "extract",
            Query::Theorem1 { .. } => "theorem1",
            Query::ClassifyEnergy(_) => "classify-energy",
            Query::Adiabatic { .. } => "adiabatic",
            Query::Derive { .. } => "derive",
            Query::SearchCounterexample { .. } => "search-counterexample",
            Query::Asymptotic { .. } => "asymptotic",
            Query::Task { .. } => "task",
            Query::Cloning { .. } => "cloning",
            Query::SecondLaw(_) => "second-law",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Statement {
    pub pos: Pos,
    pub stmt: Stmt,
}

impl PartialEq for Statement {
    fn eq(&self, other: &Self) -> bool {
        self.stmt == other.stmt
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BackendKind {
    Abstract,
    Quantum,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelDocument {
    pub statements: Vec<Statement>,
    pub backend: Option<BackendKind>,
}

impl ModelDocument {
    pub fn queries(&self) -> impl Iterator<Item = (Pos, &Query)> {
        self.statements.iter().filter_map(|s| match &s.stmt {
            Stmt::Query(q) => Some((s.pos, q)),
            _ => None,
        })
    }
}
