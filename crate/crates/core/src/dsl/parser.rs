//! Line-oriented declaration language. Newlines end statements except inside
//! brackets; `#` starts a comment.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::Zero;
use thiserror::Error;

use super::ast::*;
use crate::conservation::Energy;
use crate::relation::Status;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DslError {
    #[error("{pos}: expected {}, found {found}", expected.join(" or "))]
    Parse { pos: Pos, expected: Vec<String>, found: String },
    #[error("{pos}: undeclared {kind} `{name}`")]
    UndeclaredIdentifier { pos: Pos, name: String, kind: &'static str },
    #[error("{pos}: `{name}` is already declared at {previous}")]
    DuplicateDeclaration { pos: Pos, name: String, previous: Pos },
    #[error("{pos}: `{name}` declares a {found} model element but the document is {expected}")]
    MixedBackends { pos: Pos, name: String, expected: &'static str, found: &'static str },
    #[error("{pos}: {message} (at `{name}`)")]
    Invalid { pos: Pos, name: String, message: String },
}

impl DslError {
    pub fn pos(&self) -> Pos {
        match self {
            DslError::Parse { pos, .. }
            | DslError::UndeclaredIdentifier { pos, .. }
            | DslError::DuplicateDeclaration { pos, .. }
            | DslError::MixedBackends { pos, .. }
            | DslError::Invalid { pos, .. } => *pos,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Num(String),
    Sym(&'static str),
    Newline,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Num(s) => write!(f, "number `{s}`"),
            Tok::Sym(s) => write!(f, "`{s}`"),
            Tok::Newline => f.write_str("end of line"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

const SYMBOLS: [&str; 15] = ["(+)", "->", "{", "}", "(", ")", "[", "]", ",", ";", "=", "+", "-", "*", "/"];

fn lex(src: &str) -> Result<Vec<(Tok, Pos)>, DslError> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    for (ln, line) in src.lines().enumerate() {
        let chars: Vec<char> = line.chars().collect();
        let mut i = 0;
        let pos = |i: usize| Pos { line: ln + 1, col: i + 1 };
        while i < chars.len() {
            let c = chars[i];
            if c == '#' {
                break;
            }
            if c.is_whitespace() {
                i += 1;
                continue;
            }
            let start = i;
            if c.is_ascii_alphabetic() || c == '_' {
                while i < chars.len() {
                    let d = chars[i];
                    let hyphen = d == '-'
                        && chars.get(i + 1).is_some_and(|n| n.is_ascii_alphanumeric())
                        && chars[i - 1].is_ascii_alphanumeric();
                    if d.is_ascii_alphanumeric() || d == '_' || d == '\'' || hyphen {
                        i += 1;
                    } else {
                        break;
                    }
                }
                out.push((Tok::Ident(chars[start..i].iter().collect()), pos(start)));
                continue;
            }
            if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) {
                while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                    i += 1;
                }
                if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                    let mut j = i + 1;
                    if j < chars.len() && (chars[j] == '-' || chars[j] == '+') {
                        j += 1;
                    }
                    if j < chars.len() && chars[j].is_ascii_digit() {
                        i = j;
                        while i < chars.len() && chars[i].is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                let text: String = chars[start..i].iter().collect();
                if text.matches('.').count() > 1 {
                    return Err(DslError::Parse {
                        pos: pos(start),
                        expected: vec!["number".into()],
                        found: format!("`{text}`"),
                    });
                }
                out.push((Tok::Num(text), pos(start)));
                continue;
            }
            let rest: String = chars[i..].iter().take(3).collect();
            let Some(sym) = SYMBOLS.iter().find(|s| rest.starts_with(**s)) else {
                return Err(DslError::Parse {
                    pos: pos(i),
                    expected: vec!["token".into()],
                    found: format!("`{c}`"),
                });
            };
            match *sym {
                "{" | "(" | "[" => depth += 1,
                "}" | ")" | "]" => depth -= 1,
                _ => {}
            }
            out.push((Tok::Sym(sym), pos(i)));
            i += sym.chars().count();
        }
        if depth <= 0 {
            out.push((Tok::Newline, pos(chars.len())));
        }
    }
    let end = Pos {
        line: src.lines().count() + 1,
        col: 1,
    };
    out.push((Tok::Eof, end));
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Substrate,
    Attribute,
    Variable,
}

impl Kind {
    fn as_str(self) -> &'static str {
        match self {
            Kind::Substrate => "substrate",
            Kind::Attribute => "attribute",
            Kind::Variable => "variable",
        }
    }
}

struct Parser {
    toks: Vec<(Tok, Pos)>,
    i: usize,
    names: BTreeMap<String, (Kind, Pos)>,
    backend: Option<BackendKind>,
}

type R<T> = Result<T, DslError>;

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.i].0
    }

    fn pos(&self) -> Pos {
        self.toks[self.i].1
    }

    fn err<T>(&self, expected: &[&str]) -> R<T> {
        Err(DslError::Parse {
            pos: self.pos(),
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: self.peek().to_string(),
        })
    }

    fn bump(&mut self) -> (Tok, Pos) {
        let t = self.toks[self.i].clone();
        if t.0 != Tok::Eof {
            self.i += 1;
        }
        t
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(x) if *x == s)
    }

    fn sym(&mut self, s: &'static str) -> R<()> {
        if self.is_sym(s) {
            self.bump();
            Ok(())
        } else {
            self.err(&[&format!("`{s}`")])
        }
    }

    fn is_kw(&self, k: &str) -> bool {
        matches!(self.peek(), Tok::Ident(x) if x == k)
    }

    fn kw(&mut self, k: &str) -> R<()> {
        if self.is_kw(k) {
            self.bump();
            Ok(())
        } else {
            self.err(&[&format!("`{k}`")])
        }
    }

    fn ident(&mut self) -> R<Ident> {
        match self.peek().clone() {
            Tok::Ident(name) => {
                let pos = self.bump().1;
                Ok(Ident { name, pos })
            }
            _ => self.err(&["identifier"]),
        }
    }

    fn count(&mut self) -> R<usize> {
        match self.peek().clone() {
            Tok::Num(s) => match s.parse::<usize>() {
                Ok(n) => {
                    self.bump();
                    Ok(n)
                }
                Err(_) => self.err(&["integer"]),
            },
            _ => self.err(&["integer"]),
        }
    }

    fn end(&mut self) -> R<()> {
        match self.peek() {
            Tok::Newline => {
                self.bump();
                Ok(())
            }
            Tok::Eof => Ok(()),
            _ => self.err(&["end of line"]),
        }
    }

    fn declare(&mut self, id: &Ident, kind: Kind) -> R<()> {
        if let Some((_, previous)) = self.names.get(&id.name) {
            return Err(DslError::DuplicateDeclaration {
                pos: id.pos,
                name: id.name.clone(),
                previous: *previous,
            });
        }
        self.names.insert(id.name.clone(), (kind, id.pos));
        Ok(())
    }

    fn resolve(&self, id: &Ident, kind: Kind) -> R<()> {
        match self.names.get(&id.name) {
            Some((k, _)) if *k == kind => Ok(()),
            _ => Err(DslError::UndeclaredIdentifier {
                pos: id.pos,
                name: id.name.clone(),
                kind: kind.as_str(),
            }),
        }
    }

    fn set_backend(&mut self, id: &Ident, kind: BackendKind) -> R<()> {
        let label = |k: BackendKind| match k {
            BackendKind::Abstract => "abstract",
            BackendKind::Quantum => "quantum",
        };
        match self.backend {
            Some(b) if b != kind => Err(DslError::MixedBackends {
                pos: id.pos,
                name: id.name.clone(),
                expected: label(b),
                found: label(kind),
            }),
            _ => {
                self.backend = Some(kind);
                Ok(())
            }
        }
    }

    fn attr_ref(&mut self) -> R<AttrRef> {
        let pos = self.pos();
        let parts = if self.is_sym("(") {
            self.bump();
            let mut parts = vec![self.ident()?];
            while self.is_sym(",") {
                self.bump();
                parts.push(self.ident()?);
            }
            self.sym(")")?;
            parts
        } else if matches!(self.peek(), Tok::Ident(_)) {
            vec![self.ident()?]
        } else {
            return self.err(&["attribute", "`(`"]);
        };
        for p in &parts {
            self.resolve(p, Kind::Attribute)?;
        }
        Ok(AttrRef { parts, pos })
    }

    fn list<T>(&mut self, open: &'static str, close: &'static str, mut item: impl FnMut(&mut Self) -> R<T>) -> R<Vec<T>> {
        self.sym(open)?;
        let mut out = vec![item(self)?];
        while self.is_sym(",") {
            self.bump();
            out.push(item(self)?);
        }
        self.sym(close)?;
        Ok(out)
    }

    fn task_pairs(&mut self) -> R<Vec<(AttrRef, AttrRef)>> {
        self.list("{", "}", |p| {
            let a = p.attr_ref()?;
            p.sym("->")?;
            let b = p.attr_ref()?;
            Ok((a, b))
        })
    }

    fn rational(&mut self) -> R<Energy> {
        let neg = if self.is_sym("-") {
            self.bump();
            true
        } else {
            false
        };
        let mut value = match self.peek().clone() {
            Tok::Num(s) => {
                self.bump();
                parse_decimal(&s).ok_or(()).or_else(|_| self.err(&["rational"]))?
            }
            _ => return self.err(&["rational"]),
        };
        if self.is_sym("/") {
            self.bump();
            let den = match self.peek().clone() {
                Tok::Num(s) => parse_decimal(&s),
                _ => None,
            };
            match den {
                Some(d) if !d.is_zero() => {
                    self.bump();
                    value /= d;
                }
                _ => return self.err(&["nonzero denominator"]),
            }
        }
        Ok(if neg { -value } else { value })
    }

    fn expr(&mut self) -> R<Expr> {
        let mut lhs = self.term()?;
        loop {
            let op = if self.is_sym("+") {
                BinOp::Add
            } else if self.is_sym("-") {
                BinOp::Sub
            } else {
                return Ok(lhs);
            };
            self.bump();
            let rhs = self.term()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> R<Expr> {
        let mut lhs = self.factor()?;
        loop {
            let op = if self.is_sym("*") {
                BinOp::Mul
            } else if self.is_sym("/") {
                BinOp::Div
            } else {
                return Ok(lhs);
            };
            self.bump();
            let rhs = self.factor()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn factor(&mut self) -> R<Expr> {
        if self.is_sym("-") {
            self.bump();
            return Ok(Expr::Neg(Box::new(self.factor()?)));
        }
        if self.is_sym("(") {
            self.bump();
            let e = self.expr()?;
            self.sym(")")?;
            return Ok(e);
        }
        if self.is_kw("sqrt") {
            self.bump();
            self.sym("(")?;
            let e = self.expr()?;
            self.sym(")")?;
            return Ok(Expr::Sqrt(Box::new(e)));
        }
        match self.peek().clone() {
            Tok::Num(s) => {
                self.bump();
                Ok(Expr::Num(s))
            }
            _ => self.err(&["number", "`-`", "`(`", "`sqrt`"]),
        }
    }

    fn amplitude(&mut self) -> R<(Expr, Expr)> {
        self.sym("(")?;
        let re = self.expr()?;
        self.sym(",")?;
        let im = self.expr()?;
        self.sym(")")?;
        Ok((re, im))
    }

    fn status(&mut self) -> R<Status> {
        if self.is_kw("possible") {
            self.bump();
            Ok(Status::Possible)
        } else if self.is_kw("impossible") {
            self.bump();
            Ok(Status::Impossible)
        } else {
            self.err(&["`possible`", "`impossible`"])
        }
    }

    fn substrate_ref(&mut self) -> R<Ident> {
        let s = self.ident()?;
        self.resolve(&s, Kind::Substrate)?;
        Ok(s)
    }

    fn variable_ref(&mut self) -> R<Ident> {
        let v = self.ident()?;
        self.resolve(&v, Kind::Variable)?;
        Ok(v)
    }

    fn outcomes(&mut self) -> R<Vec<Outcome>> {
        self.list("{", "}", |p| {
            let source = p.attr_ref()?;
            p.sym("->")?;
            p.sym("(")?;
            let residual = p.attr_ref()?;
            p.sym(",")?;
            let work = p.attr_ref()?;
            p.sym(")")?;
            Ok(Outcome { source, residual, work })
        })
    }

    fn query(&mut self) -> R<Query> {
        let name = self.ident()?;
        Ok(match name.name.as_str() {
            "info-variable" => Query::InfoVariable(self.variable_ref()?),
            "distinguishable" => Query::Distinguishable(self.variable_ref()?),
            "interoperable" => Query::Interoperable(self.variable_ref()?, self.variable_ref()?),
            "work-variable" => Query::WorkVariable(self.variable_ref()?),
            "extract" => Query::Extract {
                work: self.variable_ref()?,
                outcomes: self.outcomes()?,
            },
            "theorem1" => Query::Theorem1 {
                work: self.variable_ref()?,
                outcomes: self.outcomes()?,
            },
            "classify-energy" => Query::ClassifyEnergy(self.substrate_ref()?),
            "adiabatic" => {
                let work = self.variable_ref()?;
                let from = self.attr_ref()?;
                self.sym("->")?;
                let to = self.attr_ref()?;
                Query::Adiabatic { work, from, to }
            }
            "derive" => {
                let work = self.variable_ref()?;
                let copies = self.count()?;
                let depth = if matches!(self.peek(), Tok::Num(_)) { Some(self.count()?) } else { None };
                Query::Derive { work, copies, depth }
            }
            "search-counterexample" => {
                let attributes = self.count()?;
                let arity = self.count()?;
                let n_truncation = self.count()?;
                let mut disable = Vec::new();
                if self.is_kw("disable") {
                    self.bump();
                    disable.push(self.ident()?);
                    while matches!(self.peek(), Tok::Ident(_)) {
                        disable.push(self.ident()?);
                    }
                }
                Query::SearchCounterexample {
                    attributes,
                    arity,
                    n_truncation,
                    disable,
                }
            }
            "asymptotic" => {
                let x = self.attr_ref()?;
                let y = self.attr_ref()?;
                let copies = self.count()?;
                let epsilon = match self.peek().clone() {
                    Tok::Num(s) => {
                        self.bump();
                        s
                    }
                    _ => return self.err(&["tolerance"]),
                };
                Query::Asymptotic { x, y, copies, epsilon }
            }
            "task" => {
                let pairs = self.task_pairs()?;
                self.kw("on")?;
                Query::Task {
                    pairs,
                    substrate: self.substrate_ref()?,
                }
            }
            "cloning" => Query::Cloning {
                variable: self.variable_ref()?,
                receptacle: self.attr_ref()?,
            },
            "second-law" => Query::SecondLaw(self.variable_ref()?),
            _ => {
                return Err(DslError::Parse {
                    pos: name.pos,
                    expected: QUERY_NAMES.iter().map(|s| format!("`{s}`")).collect(),
                    found: format!("`{}`", name.name),
                })
            }
        })
    }

    fn statement(&mut self) -> R<Stmt> {
        let kw = match self.peek() {
            Tok::Ident(k) => k.clone(),
            _ => return self.err(&STATEMENT_KEYWORDS),
        };
        let stmt = match kw.as_str() {
            "substrate" => {
                self.bump();
                let id = self.ident()?;
                let dim = if self.is_kw("dim") {
                    self.bump();
                    let d = self.count()?;
                    if d == 0 {
                        return Err(DslError::Invalid {
                            pos: id.pos,
                            name: id.name,
                            message: "dimension must be positive".into(),
                        });
                    }
                    self.set_backend(&id, BackendKind::Quantum)?;
                    Some(d)
                } else if self.is_kw("abstract") {
                    self.bump();
                    self.set_backend(&id, BackendKind::Abstract)?;
                    None
                } else {
                    return self.err(&["`dim`", "`abstract`"]);
                };
                self.declare(&id, Kind::Substrate)?;
                Stmt::Substrate { id, dim }
            }
            "compose" => {
                self.bump();
                let id = self.ident()?;
                self.sym("=")?;
                let left = self.substrate_ref()?;
                self.sym("(+)")?;
                let right = self.substrate_ref()?;
                self.declare(&id, Kind::Substrate)?;
                Stmt::Compose { id, left, right }
            }
            "hamiltonian" => {
                self.bump();
                let substrate = self.substrate_ref()?;
                self.set_backend(&substrate, BackendKind::Quantum)?;
                self.kw("eigenvalues")?;
                let mut eigenvalues = vec![self.rational()?];
                while !matches!(self.peek(), Tok::Newline | Tok::Eof) {
                    eigenvalues.push(self.rational()?);
                }
                Stmt::Hamiltonian { substrate, eigenvalues }
            }
            "attribute" => {
                self.bump();
                let id = self.ident()?;
                self.kw("on")?;
                let substrate = self.substrate_ref()?;
                let stmt = if self.is_kw("states") {
                    self.bump();
                    self.set_backend(&id, BackendKind::Quantum)?;
                    self.sym("[")?;
                    let mut states = Vec::new();
                    loop {
                        let mut state = vec![self.amplitude()?];
                        while self.is_sym("(") {
                            state.push(self.amplitude()?);
                        }
                        states.push(state);
                        if self.is_sym(";") {
                            self.bump();
                        } else {
                            break;
                        }
                    }
                    self.sym("]")?;
                    Stmt::AttributeStates { id: id.clone(), substrate, states }
                } else {
                    self.set_backend(&id, BackendKind::Abstract)?;
                    let energy = if self.is_kw("energy") {
                        self.bump();
                        Some(self.rational()?)
                    } else if matches!(self.peek(), Tok::Newline | Tok::Eof) {
                        None
                    } else {
                        return self.err(&["`states`", "`energy`", "end of line"]);
                    };
                    Stmt::AttributeEnergy { id: id.clone(), substrate, energy }
                };
                self.declare(&id, Kind::Attribute)?;
                stmt
            }
            "variable" => {
                self.bump();
                let id = self.ident()?;
                self.sym("=")?;
                let members = self.list("{", "}", |p| p.attr_ref())?;
                self.declare(&id, Kind::Variable)?;
                Stmt::Variable { id, members }
            }
            "fact" => {
                let at = self.bump().1;
                let status = self.status()?;
                let marker = Ident {
                    name: "fact".into(),
                    pos: at,
                };
                self.set_backend(&marker, BackendKind::Abstract)?;
                if self.is_kw("task") {
                    self.bump();
                    let pairs = self.task_pairs()?;
                    self.kw("on")?;
                    let substrate = self.substrate_ref()?;
                    Stmt::FactTask { status, pairs, substrate }
                } else if self.is_kw("distinguish") {
                    self.bump();
                    let members = self.list("{", "}", |p| p.attr_ref())?;
                    self.kw("on")?;
                    let substrate = self.substrate_ref()?;
                    Stmt::FactDistinguish {
                        status,
                        members,
                        substrate,
                    }
                } else {
                    return self.err(&["`task`", "`distinguish`"]);
                }
            }
            "query" => {
                self.bump();
                Stmt::Query(self.query()?)
            }
            _ => return self.err(&STATEMENT_KEYWORDS),
        };
        self.end()?;
        Ok(stmt)
    }
}

pub const QUERY_NAMES: [&str; 14] = [
    "info-variable",
    "distinguishable",
    "interoperable",
    "work-variable",
    "extract",
    "theorem1",
    "classify-energy",
    "adiabatic",
    "derive",
    "search-counterexample",
    "asymptotic",
    "task",
    "cloning",
    "second-law",
];

const STATEMENT_KEYWORDS: [&str; 7] = [
    "`substrate`",
    "`compose`",
    "`hamiltonian`",
    "`attribute`",
    "`variable`",
    "`fact`",
    "`query`",
];

/// Exact value of a decimal literal such as `12`, `0.25` or `1e-3`.
pub fn parse_decimal(s: &str) -> Option<Energy> {
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (int, frac) = match mantissa.split_once('.') {
        Some((a, b)) => (a, b),
        None => (mantissa, ""),
    };
    let digits: BigInt = format!("{int}{frac}").parse().ok()?;
    let scale = exp - frac.len() as i32;
    let ten = BigInt::from(10);
    let mut value = Energy::from_integer(digits);
    let factor = Energy::from_integer(num_traits::pow(ten, scale.unsigned_abs() as usize));
    if scale >= 0 {
        value *= factor;
    } else {
        value /= factor;
    }
    Some(value)
}

/// Parses and checks a document: every identifier declared before use, no
/// duplicates, one backend kind.
pub fn parse(src: &str) -> Result<ModelDocument, DslError> {
    let mut p = Parser {
        toks: lex(src)?,
        i: 0,
        names: BTreeMap::new(),
        backend: None,
    };
    let mut statements = Vec::new();
    loop {
        while *p.peek() == Tok::Newline {
            p.bump();
        }
        if *p.peek() == Tok::Eof {
            break;
        }
        let pos = p.pos();
        let stmt = p.statement()?;
        statements.push(Statement { pos, stmt });
    }
    Ok(ModelDocument {
        statements,
        backend: p.backend,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const QUBIT: &str = "\
substrate q dim 2
attribute zero on q states [ (1,0) (0,0) ]
attribute one on q states [ (0,0) (1,0) ]
variable b = { zero, one }
query distinguishable b
";

    #[test]
    fn minimal_qubit_document() {
        let d = parse(QUBIT).unwrap();
        assert_eq!(d.queries().count(), 1);
        assert_eq!(d.backend, Some(BackendKind::Quantum));
    }

    #[test]
    fn undeclared_attribute_position() {
        let e = parse("substrate q dim 2\nvariable b = { zero, one }\n").unwrap_err();
        assert_eq!(
            e,
            DslError::UndeclaredIdentifier {
                pos: Pos { line: 2, col: 16 },
                name: "zero".into(),
                kind: "attribute"
            }
        );
        assert!(e.to_string().contains("2:16"));
    }

    #[test]
    fn mixed_backends_rejected_at_second() {
        let e = parse("substrate q dim 2\nsubstrate s abstract\n").unwrap_err();
        assert!(matches!(e, DslError::MixedBackends { pos: Pos { line: 2, col: 11 }, .. }), "{e}");
    }

    #[test]
    fn duplicate_and_parse_errors() {
        let e = parse("substrate s abstract\nsubstrate s abstract\n").unwrap_err();
        assert!(matches!(e, DslError::DuplicateDeclaration { .. }));
        let e = parse("substrate s abstract\nattribute a on s energy\n").unwrap_err();
        match e {
            DslError::Parse { pos, expected, .. } => {
                assert_eq!(pos.line, 2);
                assert_eq!(expected, vec!["rational".to_string()]);
            }
            other => panic!("{other}"),
        }
        assert!(parse("query nonsense").is_err());
    }

    #[test]
    fn decimals_are_exact() {
        assert_eq!(parse_decimal("0.25").unwrap(), Energy::new(1.into(), 4.into()));
        assert_eq!(parse_decimal("2e-1").unwrap(), Energy::new(1.into(), 5.into()));
        assert_eq!(parse_decimal("3").unwrap(), Energy::from_integer(3.into()));
    }

    #[test]
    fn multiline_states_and_expressions() {
        let src = "substrate q dim 2\nattribute plus on q states [\n  (1/sqrt(2), 0) (-(1)/sqrt(2), 0)\n]\n";
        let d = parse(src).unwrap();
        let Stmt::AttributeStates { states, .. } = &d.statements[1].stmt else {
            panic!()
        };
        assert!((states[0][1].0.eval() + 0.5f64.sqrt()).abs() < 1e-15);
    }
}
