//! JSON encodings of verdicts. Keys come out sorted (serde_json's default map)
//! and floats are rounded to 12 significant digits.

use serde_json::{json, Map, Value};

use crate::algebra::{Attr, Task, Variable};
use crate::backend::{Evidence, TaskVerdict};
use crate::checker::closure::{Justification, TraceStep};
use crate::conservation::Energy;
use crate::quantum::{Gram, Obstruction};
use crate::relation::Status;

pub fn num(x: f64) -> Value {
    if !x.is_finite() {
        return Value::String(format!("{x}"));
    }
    let r: f64 = format!("{x:.11e}").parse().expect("formatted float");
    let r = if r == 0.0 { 0.0 } else { r };
    json!(r)
}

pub fn energy(e: &Energy) -> Value {
    if e.is_integer() {
        Value::String(e.numer().to_string())
    } else {
        Value::String(format!("{}/{}", e.numer(), e.denom()))
    }
}

pub fn status(s: Status) -> Value {
    Value::String(s.as_str().to_string())
}

pub fn attr(a: &Attr) -> Value {
    Value::String(a.to_string())
}

pub fn task(t: &Task) -> Value {
    Value::String(t.to_string())
}

pub fn variable(v: &Variable) -> Value {
    Value::String(v.to_string())
}

pub fn gram(g: &Gram) -> Value {
    Value::Array(
        (0..g.nrows())
            .map(|i| {
                Value::Array(
                    (0..g.ncols())
                        .map(|j| json!([num(g[(i, j)].re), num(g[(i, j)].im)]))
                        .collect(),
                )
            })
            .collect(),
    )
}

pub fn obstruction(o: &Obstruction) -> Value {
    match o {
        Obstruction::OrthogonalOutputs { i, j, input_overlap } => json!({
            "kind": "orthogonal-outputs", "pair": [i, j], "input_overlap": num(*input_overlap)
        }),
        Obstruction::OverlapGrows {
            i,
            j,
            input_overlap,
            output_overlap,
        } => json!({
            "kind": "overlap-grows", "pair": [i, j],
            "input_overlap": num(*input_overlap), "output_overlap": num(*output_overlap)
        }),
        Obstruction::NotPositive { min_eigenvalue } => json!({
            "kind": "not-positive", "min_eigenvalue": num(*min_eigenvalue)
        }),
    }
}

pub fn trace(steps: &[TraceStep]) -> Value {
    Value::Array(steps.iter().map(|s| Value::String(s.to_string())).collect())
}

pub fn justification(j: &Justification) -> Value {
    match j {
        Justification::Structural => json!({"kind": "structural"}),
        Justification::Fact => json!({"kind": "fact"}),
        Justification::SubtaskOf(t) => json!({"kind": "subtask-of", "task": task(t)}),
        Justification::ContainsImpossible(t) => json!({"kind": "contains-impossible", "task": task(t)}),
        Justification::Spectators(t) => json!({"kind": "spectators", "task": task(t)}),
        Justification::None => json!({"kind": "none"}),
    }
}

pub fn evidence(e: &Evidence) -> Value {
    match e {
        Evidence::Quantum {
            margin,
            certificate,
            obstruction: obs,
            energy: en,
        } => {
            let mut m = Map::new();
            m.insert("margin".into(), num(*margin));
            m.insert("certificate".into(), certificate.as_ref().map(gram).unwrap_or(Value::Null));
            m.insert("obstruction".into(), obs.as_ref().map(obstruction).unwrap_or(Value::Null));
            m.insert(
                "energy_violation".into(),
                en.as_ref()
                    .map(|v| {
                        json!({
                            "input": attr(&v.input), "output": attr(&v.output),
                            "input_energy": energy(&v.input_energy), "output_energy": energy(&v.output_energy)
                        })
                    })
                    .unwrap_or(Value::Null),
            );
            Value::Object(m)
        }
        Evidence::Abstract(j) => justification(j),
    }
}

pub fn verdict(v: &TaskVerdict) -> Value {
    json!({"task": task(&v.task), "status": status(v.status), "evidence": evidence(&v.evidence)})
}
