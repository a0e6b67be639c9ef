//! Builds the declared model and answers the queries in order.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use super::ast::*;
use super::parser::{parse, DslError};
use super::print::print_document;
use super::report as enc;
use crate::algebra::{Attr, Name, SubstrateId, Task, Variable};
use crate::backend::{AbstractBackend, BackendError, ModelBackend};
use crate::checker::closure::{AbstractModel, ClosureError, ClosureRuleSet};
use crate::checker::principles::{check_principles, PrincipleResult};
use crate::checker::search::{search_counterexample_theorem1, Principle, SearchBounds, SearchOutcome, Toggles};
use crate::conservation::{check_class_conditions, classify_by_labeling, EnergyLabeling};
use crate::derive::{derive_task, replay, DeriveOutcome, Move};
use crate::info_media::{
    build_cloning_task, check_asymptotic_distinguishability, check_interoperability, is_distinguishable,
    is_information_variable, DistVerdict, DistWitness, InfoError, InfoVerdict, InteropVerdict,
};
use crate::quantum::oracle::{oracle_max_fidelity, OracleParams};
use crate::quantum::{QuantumModel, State};
use crate::relation::Status;
use crate::work_media::{
    build_asymptotic_extractor_task, build_extraction_task, build_work_axiom_task, is_adiabatically_possible,
    is_work_variable, second_law_witness, theorem1_check, Axiom, TheoremVerdict, WorkError, WorkExtractionSpec,
    WorkVariable,
};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Truncation level used for the principle summary.
pub const SUMMARY_TRUNCATION: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RunOptions {
    pub seed: u64,
    pub strict_work_axiom: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub json: Value,
    pub exit_code: i32,
}

impl Report {
    /// Canonical JSON: sorted keys, two-space indentation, trailing newline.
    pub fn to_json_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.json).expect("serializable");
        s.push('\n');
        s
    }

    pub fn to_text(&self) -> String {
        let j = &self.json;
        let mut out = format!("ct-engine {} input {}\n", VERSION, j["input_sha256"].as_str().unwrap_or(""));
        out.push_str(&format!("model: {}\n", j["model"]["status"].as_str().unwrap_or("?")));
        if let Some(p) = j["principles"].as_object() {
            for (k, v) in p {
                if let Some(o) = v["outcome"].as_str() {
                    out.push_str(&format!("principle {k}: {o}\n"));
                }
            }
        }
        for r in j["results"].as_array().into_iter().flatten() {
            let head = format!(
                "[{}] line {}: {}",
                r["index"],
                r["line"],
                r["query"].as_str().unwrap_or("")
            );
            match (r["verdict"].as_str(), r["error"].as_object()) {
                (Some(v), _) => out.push_str(&format!("{head} => {v}\n")),
                (None, Some(e)) => out.push_str(&format!(
                    "{head} => error ({}): {}\n",
                    e["kind"].as_str().unwrap_or(""),
                    e["message"].as_str().unwrap_or("")
                )),
                _ => out.push_str(&format!("{head}\n")),
            }
        }
        out.push_str(&format!("exit {}\n", self.exit_code));
        out
    }
}

#[derive(Debug, Clone)]
struct QueryError {
    kind: &'static str,
    message: String,
}

impl QueryError {
    fn new(kind: &'static str, message: impl Into<String>) -> Self {
        QueryError {
            kind,
            message: message.into(),
        }
    }
}

impl From<BackendError> for QueryError {
    fn from(e: BackendError) -> Self {
        let kind = match &e {
            BackendError::Undecided(_) => "undecided",
            BackendError::Inconsistent(_) => "inconsistent",
            BackendError::Quantum(_) => "quantum",
            BackendError::Algebra(_) => "algebra",
            BackendError::Closure(_) => "closure",
        };
        QueryError::new(kind, e.to_string())
    }
}

impl From<InfoError> for QueryError {
    fn from(e: InfoError) -> Self {
        match e {
            InfoError::Backend(b) => b.into(),
            other => QueryError::new("invalid", other.to_string()),
        }
    }
}

impl From<WorkError> for QueryError {
    fn from(e: WorkError) -> Self {
        match e {
            WorkError::Backend(b) => b.into(),
            WorkError::Info(i) => i.into(),
            other => QueryError::new("invalid", other.to_string()),
        }
    }
}

impl From<crate::algebra::AlgebraError> for QueryError {
    fn from(e: crate::algebra::AlgebraError) -> Self {
        QueryError::new("algebra", e.to_string())
    }
}

impl From<crate::quantum::QuantumError> for QueryError {
    fn from(e: crate::quantum::QuantumError) -> Self {
        QueryError::new("quantum", e.to_string())
    }
}

type Q<T> = Result<T, QueryError>;

struct Env {
    backend: ModelBackend,
    labeling: Option<EnergyLabeling>,
    substrates: BTreeMap<String, SubstrateId>,
    variables: BTreeMap<String, Variable>,
}

enum Built {
    Ready(Box<Env>),
    Inconsistent(Value),
    Failed(Value),
}

fn failure(pos: Pos, message: impl std::fmt::Display) -> Value {
    json!({"status": "error", "line": pos.line, "column": pos.col, "message": message.to_string()})
}

fn resolve_attr(catalog: &crate::algebra::Catalog, a: &AttrRef) -> Q<(SubstrateId, Attr)> {
    let mut owners = Vec::new();
    let mut names = Vec::new();
    for p in &a.parts {
        let n = Name::new(&p.name);
        let owner = catalog
            .owner_of(&n)
            .ok_or_else(|| QueryError::new("undeclared", format!("{}: `{}` is not an attribute", p.pos, p.name)))?;
        owners.push(owner.clone());
        names.push(n);
    }
    Ok((SubstrateId::from_parts(owners), Attr::from_names(names)))
}

fn resolve_on(catalog: &crate::algebra::Catalog, s: &SubstrateId, a: &AttrRef) -> Q<Attr> {
    let (owner, attr) = resolve_attr(catalog, a)?;
    if &owner != s {
        return Err(QueryError::new(
            "invalid",
            format!("{}: attribute {attr} lives on {owner}, not {s}", a.pos),
        ));
    }
    Ok(attr)
}

fn variable_of(catalog: &crate::algebra::Catalog, members: &[AttrRef], pos: Pos) -> Q<Variable> {
    let mut sub = None;
    let mut attrs = Vec::new();
    for m in members {
        let (s, a) = resolve_attr(catalog, m)?;
        match &sub {
            None => sub = Some(s),
            Some(prev) if *prev != s => {
                return Err(QueryError::new(
                    "invalid",
                    format!("{}: member {a} lives on {s}, not {prev}", m.pos),
                ))
            }
            _ => {}
        }
        attrs.push(a);
    }
    Variable::new(sub.expect("nonempty"), attrs).map_err(|e| QueryError::new("invalid", format!("{pos}: {e}")))
}

fn task_on(catalog: &crate::algebra::Catalog, s: &SubstrateId, pairs: &[(AttrRef, AttrRef)]) -> Q<Task> {
    let mut ps = Vec::new();
    for (a, b) in pairs {
        ps.push((resolve_on(catalog, s, a)?, resolve_on(catalog, s, b)?));
    }
    Ok(Task::new(s.clone(), ps)?)
}

fn build(doc: &ModelDocument) -> Built {
    let mut substrates: BTreeMap<String, SubstrateId> = BTreeMap::new();
    let mut var_decls: Vec<(Pos, &Ident, &[AttrRef])> = Vec::new();
    let quantum = doc.backend == Some(BackendKind::Quantum);
    let mut q = QuantumModel::new();
    let mut a = AbstractModel::new();
    let mut labeling = EnergyLabeling::new();
    let mut has_energy = false;
    let mut max_arity = 1;

    for st in &doc.statements {
        let pos = st.pos;
        let step: Result<(), String> = (|| {
            match &st.stmt {
                Stmt::Substrate { id, dim } => {
                    let n = Name::new(&id.name);
                    match dim {
                        Some(d) => q.add_substrate(n.clone(), *d).map_err(|e| e.to_string())?,
                        None => {
                            a.catalog.add_substrate(n.clone());
                        }
                    }
                    substrates.insert(id.name.clone(), SubstrateId::atomic(n));
                }
                Stmt::Compose { id, left, right } => {
                    let s = substrates[&left.name].compose(&substrates[&right.name]);
                    substrates.insert(id.name.clone(), s);
                }
                Stmt::Hamiltonian { substrate, eigenvalues } => {
                    let s = &substrates[&substrate.name];
                    if !s.is_atomic() {
                        return Err(format!("hamiltonian needs an atomic substrate, got {s}"));
                    }
                    q.set_hamiltonian(&s.parts()[0], eigenvalues.clone()).map_err(|e| e.to_string())?;
                }
                Stmt::AttributeStates { id, substrate, states } => {
                    let s = &substrates[&substrate.name];
                    if !s.is_atomic() {
                        return Err(format!("attributes are declared on atomic substrates, got {s}"));
                    }
                    let vecs: Vec<State> = states
                        .iter()
                        .map(|amps| State::from_iterator(amps.len(), amps.iter().map(|(re, im)| Complex64::new(re.eval(), im.eval()))))
                        .collect();
                    q.add_attribute(Name::new(&id.name), &s.parts()[0], vecs).map_err(|e| e.to_string())?;
                }
                Stmt::AttributeEnergy { id, substrate, energy } => {
                    let s = &substrates[&substrate.name];
                    if !s.is_atomic() {
                        return Err(format!("attributes are declared on atomic substrates, got {s}"));
                    }
                    a.catalog.add_attribute(&s.parts()[0], Name::new(&id.name));
                    if let Some(e) = energy {
                        labeling.set(Attr::atomic(id.name.as_str()), e.clone());
                        has_energy = true;
                    }
                }
                Stmt::Variable { id, members } => var_decls.push((pos, id, members)),
                Stmt::FactTask {
                    status,
                    pairs,
                    substrate,
                } => {
                    let s = &substrates[&substrate.name];
                    let t = task_on(&a.catalog, s, pairs).map_err(|e| e.message)?;
                    max_arity = max_arity.max(s.arity());
                    a.declare(t, *status).map_err(|e| format!("inconsistent: {e}"))?;
                }
                Stmt::FactDistinguish {
                    status,
                    members,
                    substrate,
                } => {
                    let s = &substrates[&substrate.name];
                    let v = variable_of(&a.catalog, members, pos).map_err(|e| e.message)?;
                    if v.substrate() != s {
                        return Err(format!("variable {v} is not on {s}"));
                    }
                    a.declare_distinguishing(v, *status).map_err(|e| format!("inconsistent: {e}"))?;
                }
                Stmt::Query(_) => {}
            }
            Ok(())
        })();
        if let Err(msg) = step {
            if let Some(rest) = msg.strip_prefix("inconsistent: ") {
                return Built::Inconsistent(json!({
                    "status": "inconsistent", "line": pos.line, "column": pos.col, "message": rest, "trace": []
                }));
            }
            return Built::Failed(failure(pos, msg));
        }
    }

    let catalog = if quantum { q.catalog().clone() } else { a.catalog.clone() };
    let mut variables = BTreeMap::new();
    for (pos, id, members) in var_decls {
        match variable_of(&catalog, members, pos) {
            Ok(v) => {
                variables.insert(id.name.clone(), v);
            }
            Err(e) => return Built::Failed(failure(pos, e.message)),
        }
    }

    let (backend, labeling) = if quantum {
        let b = ModelBackend::Quantum(q);
        let l = b.labeling();
        (b, l)
    } else {
        a.labeling = has_energy.then_some(labeling);
        a.variables = variables.iter().map(|(k, v)| (Name::new(k), v.clone())).collect();
        let l = a.labeling.clone();
        match AbstractBackend::new(a, ClosureRuleSet::default(), max_arity) {
            Ok(b) => (ModelBackend::Abstract(b), l),
            Err(ClosureError::InconsistentModel {
                possible,
                impossible,
                trace,
            }) => {
                return Built::Inconsistent(json!({
                    "status": "inconsistent",
                    "message": format!("{possible} is possible but {impossible} is declared impossible"),
                    "possible": enc::task(&possible),
                    "impossible": enc::task(&impossible),
                    "trace": enc::trace(&trace),
                }))
            }
            Err(e @ ClosureError::ConflictingDistinguishing(_)) => {
                return Built::Inconsistent(json!({"status": "inconsistent", "message": e.to_string(), "trace": []}))
            }
            Err(e) => return Built::Failed(json!({"status": "error", "message": e.to_string()})),
        }
    };
    Built::Ready(Box::new(Env {
        backend,
        labeling,
        substrates,
        variables,
    }))
}

fn work_variable(env: &Env, id: &Ident) -> Q<WorkVariable> {
    let v = &env.variables[&id.name];
    if v.len() != 3 {
        return Err(QueryError::new(
            "invalid",
            format!("{}: work variable `{}` needs three members (w+, w0, w-)", id.pos, id.name),
        ));
    }
    let m = v.members();
    Ok(WorkVariable::new(v.substrate().clone(), m[0].clone(), m[1].clone(), m[2].clone())?)
}

fn extraction_spec(env: &Env, outcomes: &[Outcome], w: &WorkVariable) -> Q<WorkExtractionSpec> {
    let cat = env.backend.catalog();
    let sources: Vec<AttrRef> = outcomes.iter().map(|o| o.source.clone()).collect();
    let source = variable_of(cat, &sources, sources[0].pos)?;
    let mut triples = Vec::new();
    for o in outcomes {
        let x = resolve_on(cat, source.substrate(), &o.source)?;
        let f = resolve_on(cat, source.substrate(), &o.residual)?;
        let wx = resolve_on(cat, &w.substrate, &o.work)?;
        triples.push((x, f, wx));
    }
    Ok(WorkExtractionSpec::new(source, triples))
}

fn dist_value(d: &DistVerdict) -> Value {
    let witness = match &d.witness {
        DistWitness::Orthogonal { max_overlap } => json!({"kind": "orthogonal", "max_overlap": enc::num(*max_overlap)}),
        DistWitness::Overlap { first, second, overlap } => json!({
            "kind": "overlap", "first": enc::attr(first), "second": enc::attr(second), "overlap": enc::num(*overlap)
        }),
        DistWitness::Relabeling { task, target } => json!({
            "kind": "relabeling", "task": enc::task(task), "target": enc::variable(target)
        }),
        DistWitness::Declared { variable, status } => json!({
            "kind": "declared", "variable": enc::variable(variable), "status": enc::status(*status)
        }),
    };
    json!({
        "verdict": if d.distinguishable { "distinguishable" } else { "not-distinguishable" },
        "witness": witness,
    })
}

fn oracle_seed(seed: u64, index: usize) -> u64 {
    seed ^ (index as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

fn oracle_value(env: &Env, task: &Task, params: OracleParams) -> Option<Value> {
    let ModelBackend::Quantum(q) = &env.backend else {
        return None;
    };
    Some(match oracle_max_fidelity(q, task, params) {
        Ok(r) => json!({
            "value": enc::num(r.value),
            "fidelities": r.fidelities.iter().map(|f| enc::num(*f)).collect::<Vec<_>>(),
            "restart": r.restart,
            "ancilla_dim": params.ancilla_dim, "restarts": params.restarts, "iters": params.iters, "seed": params.seed,
        }),
        Err(e) => json!({"error": e.to_string()}),
    })
}

fn task_result(env: &Env, task: &Task, index: usize, opts: &RunOptions) -> Q<Value> {
    let v = env.backend.decide(task)?;
    let mut out = json!({"verdict": enc::status(v.status), "task": enc::task(task), "evidence": enc::evidence(&v.evidence)});
    if let crate::backend::ModelBackend::Abstract(a) = &env.backend {
        if v.status == Status::Possible {
            out["trace"] = enc::trace(&a.closed.trace(task));
        }
    }
    let params = OracleParams {
        ancilla_dim: 4,
        restarts: 4,
        iters: 200,
        seed: oracle_seed(opts.seed, index),
    };
    if let Some(o) = oracle_value(env, task, params) {
        out["oracle"] = o;
    }
    Ok(out)
}

fn move_text(m: &Move) -> String {
    match m {
        Move::Apply { slots, .. } => format!("apply work task on slots {slots:?}"),
        Move::Permute { perm } => format!("permute slots {perm:?}"),
    }
}

fn principle_value(r: &PrincipleResult) -> Value {
    json!({"outcome": r.outcome.as_str(), "checked": r.checked, "gaps": r.gaps, "details": r.details})
}

fn exec(env: &Env, query: &Query, index: usize, opts: &RunOptions) -> Q<Value> {
    let b = &env.backend;
    let cat = b.catalog();
    let empty = EnergyLabeling::new();
    let labeling = env.labeling.as_ref().unwrap_or(&empty);
    Ok(match query {
        Query::InfoVariable(id) => match is_information_variable(&env.variables[&id.name], b)? {
            InfoVerdict::Certified(c) => json!({
                "verdict": "certified",
                "variable": enc::variable(&c.variable),
                "receptacle": enc::attr(&c.receptacle),
                "cloning": enc::verdict(&c.cloning),
                "permutations_checked": c.permutations.len(),
            }),
            InfoVerdict::Refused(r) => json!({"verdict": "refused", "refusal": enc::verdict(&r)}),
        },
        Query::Distinguishable(id) => dist_value(&is_distinguishable(&env.variables[&id.name], b)?),
        Query::Interoperable(x, y) => {
            match check_interoperability(&env.variables[&x.name], &env.variables[&y.name], b)? {
                InteropVerdict::Certified(c) => json!({
                    "verdict": "certified", "product": enc::variable(&c.variable), "cloning": enc::verdict(&c.cloning)
                }),
                InteropVerdict::FactorRefused { factor, refusal } => json!({
                    "verdict": "factor-refused", "factor": factor, "refusal": enc::verdict(&refusal)
                }),
                InteropVerdict::ProductRefused(r) => json!({"verdict": "product-refused", "refusal": enc::verdict(&r)}),
            }
        }
        Query::WorkVariable(id) => {
            let w = work_variable(env, id)?;
            let v = is_work_variable(&w, b, labeling, opts.strict_work_axiom)?;
            let mut failures = Vec::new();
            if v.work_task.status == Status::Impossible {
                failures.push(Axiom::WorkTask.as_str());
            }
            if v.transitions.iter().any(|t| t.status == Status::Possible) {
                failures.push(Axiom::Transitions.as_str());
            }
            if !v.spacing.holds {
                failures.push(Axiom::Spacing.as_str());
            }
            if v.strict.is_some() {
                failures.push(Axiom::StrictSameClass.as_str());
            }
            let f: Vec<Value> = v
                .spacing
                .work_task_f
                .iter()
                .enumerate()
                .map(|(i, (t, f))| json!({"pair": i + 1, "task": enc::task(t), "f": enc::energy(f), "nonzero": !num_traits::Zero::is_zero(f)}))
                .collect();
            let mut out = json!({
                "verdict": if v.certified() { "certified" } else { "not-certified" },
                "first_failure": v.first_failure.map(|a| a.as_str()),
                "failures": failures,
                "work_task": enc::verdict(&v.work_task),
                "transitions": v.transitions.iter().map(enc::verdict).collect::<Vec<_>>(),
                "spacing": {
                    "upper_gap": enc::energy(&v.spacing.upper_gap),
                    "lower_gap": enc::energy(&v.spacing.lower_gap),
                    "holds": v.spacing.holds,
                    "work_task_f": f,
                },
            });
            if let Some(s) = &v.strict {
                out["strict"] = json!({
                    "same_class": s.same_class,
                    "explanation": s.explanation,
                    "transition_f": s.transition_f.iter().map(|(t, f)| json!({"task": enc::task(t), "f": enc::energy(f)})).collect::<Vec<_>>(),
                });
            }
            out
        }
        Query::Extract { work, outcomes } => {
            let w = work_variable(env, work)?;
            let spec = extraction_spec(env, outcomes, &w)?;
            let task = build_extraction_task(&spec, &w)?;
            let mut out = task_result(env, &task, index, opts)?;
            out["unlabeled_sources"] = spec.unlabeled_sources(labeling).iter().map(enc::attr).collect();
            out
        }
        Query::Theorem1 { work, outcomes } => {
            let w = work_variable(env, work)?;
            let spec = extraction_spec(env, outcomes, &w)?;
            let unlabeled: Vec<Value> = spec.unlabeled_sources(labeling).iter().map(enc::attr).collect();
            let (verdict, extraction, dist) = match theorem1_check(&spec, &w, b, labeling)? {
                TheoremVerdict::HoldsVacuously { extraction } => ("holds-vacuously", extraction, Value::Null),
                TheoremVerdict::Holds {
                    extraction,
                    distinguishability,
                } => ("holds", extraction, dist_value(&distinguishability)),
                TheoremVerdict::Violation {
                    extraction,
                    distinguishability,
                } => ("violation", extraction, dist_value(&distinguishability)),
            };
            json!({
                "verdict": verdict,
                "extraction": enc::verdict(&extraction),
                "distinguishability": dist,
                "unlabeled_sources": unlabeled,
            })
        }
        Query::ClassifyEnergy(id) => {
            let s = &env.substrates[&id.name];
            if !s.is_atomic() {
                return Err(QueryError::new("invalid", format!("{}: {s} is not atomic", id.pos)));
            }
            let attrs = cat.atomic_attributes(&s.parts()[0]);
            let (labeled, unlabeled): (Vec<Attr>, Vec<Attr>) = attrs.into_iter().partition(|a| labeling.energy(a).is_some());
            let partition = classify_by_labeling(s, &labeled, labeling)
                .map_err(|e| QueryError::new("conservation", e.to_string()))?;
            let lookup = |t: &Task| b.decide(t).map(|v| v.status).unwrap_or(Status::Unknown);
            let report = check_class_conditions(&partition, &lookup).map_err(|e| QueryError::new("conservation", e.to_string()))?;
            let classes: Vec<Value> = report
                .classes
                .iter()
                .zip(partition.classes())
                .map(|(c, members)| {
                    json!({
                        "index": c.index,
                        "f": c.label.as_ref().map(enc::energy),
                        "zero": c.zero,
                        "size": c.size,
                        "status": enc::status(c.status),
                        "tasks": members.tasks.iter().filter(|t| !t.is_identity()).map(enc::task).collect::<Vec<_>>(),
                    })
                })
                .collect();
            json!({
                "verdict": if report.is_valid() { "consistent" } else { "violation" },
                "classes": classes,
                "violations": report.violations.iter().map(|v| v.to_string()).collect::<Vec<_>>(),
                "checked": report.checked,
                "gaps": report.gaps,
                "coverage": enc::num(report.coverage()),
                "unlabeled": unlabeled.iter().map(enc::attr).collect::<Vec<_>>(),
            })
        }
        Query::Adiabatic { work, from, to } => {
            let w = work_variable(env, work)?;
            let (s, x) = resolve_attr(cat, from)?;
            let y = resolve_on(cat, &s, to)?;
            let v = is_adiabatically_possible(&Task::pairwise(s, x, y)?, &w, b)?;
            json!({
                "verdict": enc::status(v.status),
                "via": v.via.as_ref().map(enc::attr),
                "tried": v.tried.iter().map(enc::verdict).collect::<Vec<_>>(),
            })
        }
        Query::Derive { work, copies, depth } => {
            let w = work_variable(env, work)?;
            if *copies == 0 {
                return Err(QueryError::new("invalid", "number of copies must be positive"));
            }
            let target = build_asymptotic_extractor_task(&w, *copies)?;
            let generator = build_work_axiom_task(&w);
            let gen_status = b.decide(&generator).map(|v| v.status).unwrap_or(Status::Unknown);
            let depth = depth.unwrap_or(2 * copies);
            match derive_task(&target, std::slice::from_ref(&generator), depth) {
                DeriveOutcome::Found(p) => json!({
                    "verdict": "found",
                    "target": enc::task(&target),
                    "generator": enc::task(&generator),
                    "generator_status": enc::status(gen_status),
                    "depth": p.depth(),
                    "moves": p.moves.iter().map(move_text).collect::<Vec<_>>(),
                    "steps": p.steps.iter().map(enc::task).collect::<Vec<_>>(),
                    "replayed": replay(&p, &target),
                }),
                DeriveOutcome::NotFound {
                    depth,
                    frontier,
                    explored,
                } => json!({
                    "verdict": "not-found",
                    "target": enc::task(&target),
                    "depth": depth, "frontier": frontier, "explored": explored,
                }),
            }
        }
        Query::SearchCounterexample {
            attributes,
            arity,
            n_truncation,
            disable,
        } => {
            let mut toggles = Toggles::default();
            for d in disable {
                let p: Principle = d
                    .name
                    .parse()
                    .map_err(|e: String| QueryError::new("invalid", format!("{}: {e}", d.pos)))?;
                toggles = toggles.without(p);
            }
            let bounds = SearchBounds {
                attributes: *attributes,
                arity: *arity,
                n_truncation: *n_truncation,
            };
            let r = search_counterexample_theorem1(bounds, toggles).map_err(|e| QueryError::new("search", e.to_string()))?;
            let mut out = json!({
                "verdict": match r.outcome { SearchOutcome::Exhausted => "exhausted", SearchOutcome::Counterexample(_) => "counterexample" },
                "disabled": toggles.disabled().iter().map(|p| p.as_str()).collect::<Vec<_>>(),
                "estimated": r.estimated as u64,
                "examined": r.examined,
                "inconsistent": r.inconsistent,
                "principle_failures": r.principle_failures,
                "with_work": r.with_work,
                "counterexamples": r.counterexamples,
                "extractor_depth": r.extractor_depth,
            });
            if let SearchOutcome::Counterexample(c) = &r.outcome {
                let (model, w, spec) = c.to_model();
                let name = |i: usize| crate::checker::search::attribute_name(i).to_string();
                out["counterexample"] = json!({
                    "energies": c.energies,
                    "possible_transitions": c.possible_transitions.iter().map(|&(x, y)| format!("{} -> {}", name(x), name(y))).collect::<Vec<_>>(),
                    "work_tasks": model.facts.iter().filter(|(t, _)| t.len() == 2).map(|(t, _)| enc::task(t)).collect::<Vec<_>>(),
                    "distinguishing": c.distinguishing.iter().map(|&(x, y)| format!("{{{}, {}}}", name(x), name(y))).collect::<Vec<_>>(),
                    "work_variable": [enc::attr(&w.plus), enc::attr(&w.zero), enc::attr(&w.minus)],
                    "extraction": enc::task(&build_extraction_task(&spec, &w)?),
                    "source": enc::variable(&spec.source),
                });
            }
            out
        }
        Query::Asymptotic { x, y, copies, epsilon } => {
            let (s, xa) = resolve_attr(cat, x)?;
            let ya = resolve_on(cat, &s, y)?;
            let eps: f64 = epsilon
                .parse()
                .map_err(|_| QueryError::new("invalid", format!("bad tolerance `{epsilon}`")))?;
            let v = check_asymptotic_distinguishability(&s, &xa, &ya, *copies, eps, b)?;
            json!({
                "verdict": enc::status(v.status),
                "level": v.level,
                "overlap": v.overlap.map(enc::num),
                "n_copy_overlap": v.n_copy_overlap.map(enc::num),
                "minimal_level": v.minimal_level,
            })
        }
        Query::Task { pairs, substrate } => {
            let task = task_on(cat, &env.substrates[&substrate.name], pairs)?;
            task_result(env, &task, index, opts)?
        }
        Query::Cloning { variable, receptacle } => {
            let v = &env.variables[&variable.name];
            let r = resolve_on(cat, v.substrate(), receptacle)?;
            let task = build_cloning_task(v, &r)?;
            task_result(env, &task, index, opts)?
        }
        Query::SecondLaw(id) => {
            let w = work_variable(env, id)?;
            match second_law_witness(b, &w)? {
                Some(s) => json!({
                    "verdict": "witness",
                    "task": enc::task(&s.task),
                    "forward_via": s.forward.via.as_ref().map(enc::attr),
                    "backward": s.backward.tried.iter().map(enc::verdict).collect::<Vec<_>>(),
                }),
                None => json!({"verdict": "none"}),
            }
        }
    })
}

fn query_text(q: &Query) -> String {
    let doc = ModelDocument {
        statements: vec![Statement {
            pos: Pos::default(),
            stmt: Stmt::Query(q.clone()),
        }],
        backend: None,
    };
    print_document(&doc).trim_end().trim_start_matches("query ").to_string()
}

pub fn sha256_hex(src: &str) -> String {
    hex::encode(Sha256::digest(src.as_bytes()))
}

/// Runs every query of a parsed document against its model.
pub fn run(doc: &ModelDocument, src: &str, opts: &RunOptions) -> Report {
    let built = build(doc);
    let mut top = Map::new();
    top.insert("version".into(), json!(VERSION));
    top.insert("input_sha256".into(), json!(sha256_hex(src)));
    top.insert("seed".into(), json!(opts.seed));
    top.insert("strict_work_axiom".into(), json!(opts.strict_work_axiom));
    top.insert(
        "backend".into(),
        json!(match doc.backend {
            Some(BackendKind::Quantum) => "quantum",
            Some(BackendKind::Abstract) => "abstract",
            None => "none",
        }),
    );

    let mut exit = 0;
    let mut results = Vec::new();
    let (env, model_blocker) = match built {
        Built::Ready(env) => {
            top.insert("model".into(), json!({"status": "ok"}));
            (Some(env), None)
        }
        Built::Inconsistent(v) => {
            exit = 2;
            top.insert("model".into(), v);
            (None, Some(("inconsistent", "the model is inconsistent")))
        }
        Built::Failed(v) => {
            exit = 1;
            top.insert("model".into(), v);
            (None, Some(("model", "the model failed to build")))
        }
    };

    if let Some(env) = &env {
        let vars: Vec<Variable> = env.variables.values().cloned().collect();
        let summary = match check_principles(&env.backend, env.labeling.as_ref(), &vars, SUMMARY_TRUNCATION) {
            Ok(r) => json!({
                "n_truncation": r.n_truncation,
                "conservation": principle_value(&r.conservation),
                "asymptotic": principle_value(&r.asymptotic),
                "interoperability": principle_value(&r.interoperability),
            }),
            Err(e) => json!({"error": e.to_string()}),
        };
        top.insert("principles".into(), summary);
    }

    for (index, (pos, q)) in doc.queries().enumerate() {
        let mut entry = json!({"index": index, "line": pos.line, "query": query_text(q)});
        let outcome = match (&env, model_blocker) {
            (Some(env), _) => exec(env, q, index, opts),
            (None, Some((kind, msg))) => Err(QueryError::new(kind, msg)),
            (None, None) => unreachable!(),
        };
        match outcome {
            Ok(Value::Object(m)) => {
                if m.get("verdict").and_then(Value::as_str) == Some("violation") {
                    exit = 2;
                }
                entry.as_object_mut().expect("object").extend(m);
            }
            Ok(other) => {
                entry["value"] = other;
            }
            Err(e) => {
                if e.kind == "inconsistent" {
                    exit = 2;
                } else if exit == 0 {
                    exit = 1;
                }
                entry["error"] = json!({"kind": e.kind, "message": e.message});
            }
        }
        results.push(entry);
    }
    top.insert("results".into(), Value::Array(results));
    Report {
        json: Value::Object(top),
        exit_code: exit,
    }
}

/// Parses then runs.
pub fn check_source(src: &str, opts: &RunOptions) -> Result<Report, DslError> {
    let doc = parse(src)?;
    Ok(run(&doc, src, opts))
}

/// Runs the optimization oracle on the task behind query `index` (0-based).
pub fn oracle_for_query(src: &str, index: usize, params: OracleParams) -> Result<Value, String> {
    let doc = parse(src).map_err(|e| e.to_string())?;
    let env = match build(&doc) {
        Built::Ready(env) => env,
        Built::Inconsistent(v) | Built::Failed(v) => return Err(v["message"].as_str().unwrap_or("model error").to_string()),
    };
    if !env.backend.is_quantum() {
        return Err("the oracle needs a quantum model".into());
    }
    let (_, q) = doc
        .queries()
        .nth(index)
        .ok_or_else(|| format!("no query with index {index}"))?;
    let cat = env.backend.catalog();
    let task = (|| -> Q<Task> {
        match q {
            Query::Task { pairs, substrate } => task_on(cat, &env.substrates[&substrate.name], pairs),
            Query::Cloning { variable, receptacle } => {
                let v = &env.variables[&variable.name];
                Ok(build_cloning_task(v, &resolve_on(cat, v.substrate(), receptacle)?)?)
            }
            Query::InfoVariable(id) => {
                let v = &env.variables[&id.name];
                Ok(build_cloning_task(v, &v.members()[0])?)
            }
            Query::Extract { work, outcomes } | Query::Theorem1 { work, outcomes } => {
                let w = work_variable(&env, work)?;
                Ok(build_extraction_task(&extraction_spec(&env, outcomes, &w)?, &w)?)
            }
            other => Err(QueryError::new("invalid", format!("query `{}` has no task", other.name()))),
        }
    })()
    .map_err(|e| e.message)?;
    let mut v = oracle_value(&env, &task, params).expect("quantum");
    v["task"] = enc::task(&task);
    v["query"] = json!(query_text(q));
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn qubit_report_is_deterministic() {
        let src = "\
substrate q dim 2
attribute zero on q states [ (1,0) (0,0) ]
attribute one on q states [ (0,0) (1,0) ]
attribute plus on q states [ (sqrt(1/2),0) (sqrt(1/2),0) ]
variable b = { zero, one }
variable c = { zero, plus }
query distinguishable b
query cloning c zero
query info-variable b
";
        let opts = RunOptions { seed: 7, ..Default::default() };
        let a = check_source(src, &opts).unwrap();
        let b = check_source(src, &opts).unwrap();
        assert_eq!(a.to_json_string(), b.to_json_string());
        assert_eq!(a.exit_code, 0, "{}", a.to_json_string());
        let r = &a.json["results"];
        assert_eq!(r[0]["verdict"], "distinguishable");
        assert_eq!(r[1]["verdict"], "impossible");
        assert!(r[1]["oracle"]["value"].as_f64().unwrap() < 0.999);
        assert_eq!(r[2]["verdict"], "certified");
    }

    #[test]
    fn undecided_query_exits_one() {
        let src = "substrate s abstract\nattribute a on s\nattribute b on s\nquery task { a -> b } on s\nvariable v = { a, b }\nquery distinguishable v\n";
        let r = check_source(src, &RunOptions::default()).unwrap();
        assert_eq!(r.json["results"][0]["verdict"], "unknown");
        assert_eq!(r.json["results"][1]["error"]["kind"], "undecided");
        assert_eq!(r.exit_code, 1);
    }
}
