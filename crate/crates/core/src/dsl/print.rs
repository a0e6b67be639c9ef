//! Pretty-printer producing text that parses back to an equal document.

use std::fmt::Write;

use super::ast::*;
use crate::conservation::Energy;
use crate::relation::Status;

fn rational(e: &Energy) -> String {
    if e.is_integer() {
        e.numer().to_string()
    } else {
        format!("{}/{}", e.numer(), e.denom())
    }
}

fn expr(e: &Expr) -> String {
    match e {
        Expr::Num(s) => s.clone(),
        Expr::Neg(x) => match **x {
            Expr::Bin(..) => format!("-({})", expr(x)),
            _ => format!("-{}", expr(x)),
        },
        Expr::Sqrt(x) => format!("sqrt({})", expr(x)),
        Expr::Bin(op, a, b) => {
            let wrap = |x: &Expr, strict: bool| match x {
                Expr::Bin(inner, ..) if inner.precedence() < op.precedence() || strict && inner.precedence() == op.precedence() => {
                    format!("({})", expr(x))
                }
                _ => expr(x),
            };
            format!("{} {} {}", wrap(a, false), op.symbol(), wrap(b, true))
        }
    }
}

fn attr(a: &AttrRef) -> String {
    if a.parts.len() == 1 {
        a.parts[0].name.clone()
    } else {
        format!("({})", a.parts.iter().map(|p| p.name.as_str()).collect::<Vec<_>>().join(", "))
    }
}

fn pairs(ps: &[(AttrRef, AttrRef)]) -> String {
    let items: Vec<String> = ps.iter().map(|(a, b)| format!("{} -> {}", attr(a), attr(b))).collect();
    format!("{{ {} }}", items.join(", "))
}

fn outcomes(os: &[Outcome]) -> String {
    let items: Vec<String> = os
        .iter()
        .map(|o| format!("{} -> ({}, {})", attr(&o.source), attr(&o.residual), attr(&o.work)))
        .collect();
    format!("{{ {} }}", items.join(", "))
}

fn status(s: Status) -> &'static str {
    match s {
        Status::Possible => "possible",
        _ => "impossible",
    }
}

fn query(q: &Query) -> String {
    let name = q.name();
    match q {
        Query::InfoVariable(v) | Query::Distinguishable(v) | Query::WorkVariable(v) | Query::SecondLaw(v) => {
            format!("{name} {}", v.name)
        }
        Query::ClassifyEnergy(s) => format!("{name} {}", s.name),
        Query::Interoperable(a, b) => format!("{name} {} {}", a.name, b.name),
        Query::Extract { work, outcomes: os } | Query::Theorem1 { work, outcomes: os } => {
            format!("{name} {} {}", work.name, outcomes(os))
        }
        Query::Adiabatic { work, from, to } => format!("{name} {} {} -> {}", work.name, attr(from), attr(to)),
        Query::Derive { work, copies, depth } => match depth {
            Some(d) => format!("{name} {} {copies} {d}", work.name),
            None => format!("{name} {} {copies}", work.name),
        },
        Query::SearchCounterexample {
            attributes,
            arity,
            n_truncation,
            disable,
        } => {
            let mut s = format!("{name} {attributes} {arity} {n_truncation}");
            if !disable.is_empty() {
                s.push_str(" disable");
                for d in disable {
                    s.push(' ');
                    s.push_str(&d.name);
                }
            }
            s
        }
        Query::Asymptotic { x, y, copies, epsilon } => format!("{name} {} {} {copies} {epsilon}", attr(x), attr(y)),
        Query::Task { pairs: ps, substrate } => format!("{name} {} on {}", pairs(ps), substrate.name),
        Query::Cloning { variable, receptacle } => format!("{name} {} {}", variable.name, attr(receptacle)),
    }
}

pub fn print_document(doc: &ModelDocument) -> String {
    let mut out = String::new();
    for s in &doc.statements {
        let line = match &s.stmt {
            Stmt::Substrate { id, dim: Some(d) } => format!("substrate {} dim {d}", id.name),
            Stmt::Substrate { id, dim: None } => format!("substrate {} abstract", id.name),
            Stmt::Compose { id, left, right } => format!("compose {} = {} (+) {}", id.name, left.name, right.name),
            Stmt::Hamiltonian { substrate, eigenvalues } => format!(
                "hamiltonian {} eigenvalues {}",
                substrate.name,
                eigenvalues.iter().map(rational).collect::<Vec<_>>().join(" ")
            ),
            Stmt::AttributeStates { id, substrate, states } => {
                let body: Vec<String> = states
                    .iter()
                    .map(|st| {
                        st.iter()
                            .map(|(re, im)| format!("({}, {})", expr(re), expr(im)))
                            .collect::<Vec<_>>()
                            .join(" ")
                    })
                    .collect();
                format!("attribute {} on {} states [ {} ]", id.name, substrate.name, body.join(" ; "))
            }
            Stmt::AttributeEnergy { id, substrate, energy } => match energy {
                Some(e) => format!("attribute {} on {} energy {}", id.name, substrate.name, rational(e)),
                None => format!("attribute {} on {}", id.name, substrate.name),
            },
            Stmt::Variable { id, members } => format!(
                "variable {} = {{ {} }}",
                id.name,
                members.iter().map(attr).collect::<Vec<_>>().join(", ")
            ),
            Stmt::FactTask {
                status: st,
                pairs: ps,
                substrate,
            } => format!("fact {} task {} on {}", status(*st), pairs(ps), substrate.name),
            Stmt::FactDistinguish {
                status: st,
                members,
                substrate,
            } => format!(
                "fact {} distinguish {{ {} }} on {}",
                status(*st),
                members.iter().map(attr).collect::<Vec<_>>().join(", "),
                substrate.name
            ),
            Stmt::Query(q) => format!("query {}", query(q)),
        };
        writeln!(out, "{line}").expect("string write");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parser::parse;

    #[test]
    fn expression_parentheses_survive() {
        let src = "substrate q dim 2\nattribute a on q states [ (1 - (2 - 3), -(1 + 1) / (2 * 3)) (sqrt(1/2), 0) ]\n";
        let d = parse(src).unwrap();
        let printed = print_document(&d);
        assert_eq!(parse(&printed).unwrap(), d, "{printed}");
    }
}
