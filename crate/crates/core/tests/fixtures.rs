//! Fixture reports against checked-in goldens. Set UPDATE_GOLDEN=1 to rewrite them.

use std::path::{Path, PathBuf};

use ct_engine::dsl::{check_source, parse, print_document, RunOptions};

const FIXTURES: [&str; 5] = [
    "qutrit_work",
    "qutrit_unequal",
    "qubit_cloning",
    "inconsistent",
    "abstract_work",
];

fn dir(sub: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests").join(sub)
}

fn source(name: &str) -> String {
    std::fs::read_to_string(dir("fixtures").join(format!("{name}.ct"))).unwrap()
}

#[test]
fn reports_match_goldens() {
    let update = std::env::var_os("UPDATE_GOLDEN").is_some();
    for name in FIXTURES {
        let report = check_source(&source(name), &RunOptions::default()).unwrap();
        let got = report.to_json_string();
        let path = dir("golden").join(format!("{name}.json"));
        if update {
            std::fs::write(&path, &got).unwrap();
            continue;
        }
        let want = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        assert_eq!(got, want, "{name} differs from its golden");
    }
}

#[test]
fn exit_codes() {
    let code = |name| check_source(&source(name), &RunOptions::default()).unwrap().exit_code;
    assert_eq!(code("qutrit_work"), 0);
    assert_eq!(code("qutrit_unequal"), 0);
    assert_eq!(code("qubit_cloning"), 0);
    assert_eq!(code("abstract_work"), 0);
    assert_eq!(code("inconsistent"), 2);
}

#[test]
fn inconsistent_model_carries_trace() {
    let r = check_source(&source("inconsistent"), &RunOptions::default()).unwrap();
    assert_eq!(r.json["model"]["status"], "inconsistent");
    let trace = r.json["model"]["trace"].as_array().unwrap();
    assert!(!trace.is_empty());
}

#[test]
fn printed_fixtures_parse_back() {
    for name in FIXTURES {
        let doc = parse(&source(name)).unwrap();
        let printed = print_document(&doc);
        assert_eq!(parse(&printed).unwrap(), doc, "{name}");
    }
}

#[test]
fn seed_is_recorded() {
    let opts = RunOptions {
        seed: 7,
        ..RunOptions::default()
    };
    let r = check_source(&source("qubit_cloning"), &opts).unwrap();
    assert_eq!(r.json["seed"], 7);
}
