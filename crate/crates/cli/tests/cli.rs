use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::Command as Proc;

use maxsing_cli::{run, sorted, Command, OutputMode, ScenarioRequest, EXIT_MALFORMED, EXIT_OK, EXIT_PRECONDITION};
use serde_json::{json, Value};

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn run_json(command: Command, payload: Value) -> (Value, i32) {
    let r = run(&ScenarioRequest::new(command, payload));
    (r.to_value(), r.exit_code)
}

fn bin() -> Proc {
    Proc::new(env!("CARGO_BIN_EXE_maxsing"))
}

#[test]
fn factor_quadratic_has_one_step() {
    let (v, code) = run_json(Command::Factor, json!({"degree": 2, "mults": [1, 1, 1]}));
    assert_eq!(code, EXIT_OK);
    assert_eq!(v["result"]["length"], 1);
    assert_eq!(v["result"]["steps"][0]["after"]["degree"], 1);
    assert_eq!(v["result"]["round_trip"], true);
}

#[test]
fn factor_quintic_first_step() {
    let (v, code) = run_json(Command::Factor, json!({"degree": 5, "mults": [2, 2, 2, 2, 2, 2]}));
    assert_eq!(code, EXIT_OK);
    assert_eq!(v["result"]["steps"][0]["after"], json!({"degree": 4, "mults": [2, 2, 2, 1, 1, 1], "proximity": []}));
    assert_eq!(v["result"]["degrees"], json!([5, 4, 2, 1]));
}

#[test]
fn factor_failures_map_to_exit_codes() {
    let (v, code) = run_json(Command::Factor, json!({"degree": 3, "mults": [1, 1, 1]}));
    assert_eq!(code, EXIT_PRECONDITION);
    assert_eq!(v["error"]["details"]["noether"]["holds"], false);

    let (v, code) = run_json(Command::Factor, json!({"degree": 5, "mults": [2, 2, 2, 2, 2, 2], "proximity": [[5, 4]]}));
    assert_eq!(code, EXIT_PRECONDITION);
    assert_eq!(v["error"]["kind"], "infinitely_near_obstruction");
    assert_eq!(v["error"]["details"]["steps"].as_array().unwrap().len(), 1);

    let (_, code) = run_json(Command::Factor, json!({"degree": 2, "mults": [1, 2, 1]}));
    assert_eq!(code, EXIT_MALFORMED);
    let (_, code) = run_json(Command::Factor, json!({"degree": 2, "mults": [1, 1, 1], "extra": 0}));
    assert_eq!(code, EXIT_MALFORMED);
}

#[test]
fn factor_generated_uses_seed() {
    let mut req = ScenarioRequest::new(Command::Factor, json!({"random_steps": 6}));
    req.seed = Some(42);
    let a = run(&req);
    let b = run(&req);
    assert_eq!(a.exit_code, EXIT_OK);
    assert_eq!(a.to_json(), b.to_json());
    assert_eq!(a.to_value()["result"]["generated_from"]["seed"], 42);
}

#[test]
fn bound_single_vertex_contradiction() {
    let (v, code) = run_json(Command::Bound, json!({"codims": [3], "nus": [3], "threshold": 1}));
    assert_eq!(code, EXIT_OK);
    assert_eq!(v["result"]["maximality_bound"]["bound"], "4/1");
    assert_eq!(v["result"]["quartic"]["verdict"], "CONTRADICTION");

    let (v, _) = run_json(Command::Bound, json!({"codims": [3], "nus": [2], "threshold": 1}));
    assert_eq!(v["result"]["quartic"]["verdict"], "NO_VERDICT");
}

#[test]
fn bound_errors() {
    // codimension 4 does not live on a 3-fold
    let (v, code) = run_json(Command::Bound, json!({"codims": [4], "nus": [9], "threshold": 1}));
    assert_eq!(code, EXIT_PRECONDITION);
    assert_eq!(v["error"]["kind"], "precondition_failed");
    let (_, code) = run_json(Command::Bound, json!({"codims": [4], "nus": [9], "threshold": 1, "quartic": false}));
    assert_eq!(code, EXIT_OK);
    // no lower part
    let (_, code) = run_json(Command::Bound, json!({"codims": [2], "nus": [9], "threshold": 1}));
    assert_eq!(code, EXIT_PRECONDITION);
    // incompatible function: vertex 1 receives two arrows
    let (v, code) = run_json(
        Command::Bound,
        json!({"codims": [3, 3, 3], "arrows": [[2, 1], [3, 2], [3, 1]], "nus": [1, 1, 1], "threshold": 1, "compatible": [1, 1, 1]}),
    );
    assert_eq!(code, EXIT_PRECONDITION);
    assert_eq!(v["error"]["details"]["vertex"], 1);
    // invalid graph: missing mandatory arrow
    let (_, code) = run_json(Command::Bound, json!({"codims": [3, 3, 3], "arrows": [[2, 1], [3, 1]], "nus": [1, 1, 1], "threshold": 1}));
    assert_eq!(code, EXIT_MALFORMED);
}

#[test]
fn valgraph_reports_counts() {
    let (v, code) = run_json(
        Command::Valgraph,
        json!({"codims": [3, 3, 3], "arrows": [[2, 1], [3, 2], [3, 1]], "compatible": ["2", "1/1", 1]}),
    );
    assert_eq!(code, EXIT_OK);
    assert_eq!(v["result"]["path_counts"], json!([[1], [1, 1], [2, 1, 1]]));
    assert_eq!(v["result"]["discrepancies"], json!([2, 4, 8]));
    assert_eq!(v["result"]["compatible"]["compatible"], true);
    assert_eq!(v["result"]["canonical_functions"]["full"], json!(["2/1", "1/1", "1/1"]));
}

#[test]
fn untwist_and_exclude() {
    let (v, code) = run_json(Command::Untwist, json!({"n": 7, "nu": 9}));
    assert_eq!(code, EXIT_OK);
    assert_eq!(v["result"]["trajectory"], json!([{"n": 7, "nu": 9}, {"n": 3, "nu": 1}]));
    let (_, code) = run_json(Command::Untwist, json!({"n": 1, "nu": 2}));
    assert_eq!(code, EXIT_PRECONDITION);

    let (v, _) = run_json(Command::Exclude, json!({"case": "point", "n": 3, "nu": 7}));
    assert_eq!(v["result"]["verdict"], "CONTRADICTION");
    let (v, _) = run_json(Command::Exclude, json!({"case": "curve3", "n": "5", "m": 4, "nu": "9/2", "nu_star": "9/2"}));
    assert_eq!(v["result"]["feasibility"], "FEASIBLE");
    let (v, _) = run_json(Command::Exclude, json!({"case": "table", "d": 2, "m": 3}));
    assert_eq!(v["result"]["pairing"]["c"]["c*"], 6);
    let (_, code) = run_json(
        Command::Exclude,
        json!({"case": "conic_bundle", "datum": {"mu": 1, "a_dot_l": 9, "disc_pairing": 0, "exceptional": [{"nu": 2, "e_dot_l": 1}]}}),
    );
    assert_eq!(code, EXIT_PRECONDITION);
    let (_, code) = run_json(Command::Exclude, json!({"case": "curve9"}));
    assert_eq!(code, EXIT_MALFORMED);
}

#[test]
fn oracle_command_quick_and_filtered() {
    let (v, code) = run_json(Command::Oracle, json!({"only": ["paths", "case3"]}));
    assert_eq!(code, EXIT_OK);
    let names: Vec<&str> = v["result"]["oracles"].as_array().unwrap().iter().map(|o| o["name"].as_str().unwrap()).collect();
    assert_eq!(names, ["paths", "case3"]);
    let (_, code) = run_json(Command::Oracle, json!({"only": ["nope"]}));
    assert_eq!(code, EXIT_MALFORMED);
    let (v, code) = run_json(Command::Oracle, Value::Null);
    assert_eq!(code, EXIT_OK);
    assert_eq!(v["result"]["oracles"].as_array().unwrap().len(), 9);
}

#[test]
fn json_keys_are_sorted_and_free_of_timing() {
    let r = run(&ScenarioRequest::new(Command::Untwist, json!({"n": 3, "nu": 4})));
    let text = r.to_json();
    let reparsed: Value = serde_json::from_str(&text).unwrap();
    assert_eq!(serde_json::to_string_pretty(&sorted(reparsed)).unwrap() + "\n", text);
    assert!(!text.contains("elapsed"));
    assert!(r.render(OutputMode::Text).contains("elapsed"));
}

/// Every property name a schema (or anything it references) allows.
fn schema_properties(v: &Value, out: &mut BTreeSet<String>) {
    match v {
        Value::Object(m) => {
            if let Some(Value::Object(p)) = m.get("properties") {
                out.extend(p.keys().cloned());
            }
            m.values().for_each(|x| schema_properties(x, out));
        }
        Value::Array(a) => a.iter().for_each(|x| schema_properties(x, out)),
        _ => {}
    }
}

#[test]
fn scenarios_run_and_match_schemas() {
    let common: Value = serde_json::from_str(&std::fs::read_to_string(root().join("schemas/v1/common.json")).unwrap()).unwrap();
    let mut seen = 0;
    for entry in std::fs::read_dir(root().join("scenarios")).unwrap() {
        let path = entry.unwrap().path();
        let name = path.file_name().unwrap().to_str().unwrap().to_string();
        let command: Command = name.split('_').next().unwrap().parse().unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let schema: Value =
            serde_json::from_str(&std::fs::read_to_string(root().join(format!("schemas/v1/{command}.json"))).unwrap()).unwrap();
        let mut allowed = BTreeSet::new();
        schema_properties(&schema, &mut allowed);
        schema_properties(&common, &mut allowed);
        let payload: Value = serde_json::from_str(&text).unwrap();
        for key in payload.as_object().unwrap().keys() {
            assert!(allowed.contains(key), "{name}: key {key} not in schema");
        }
        let report = run(&ScenarioRequest::from_text(command, &text).unwrap());
        let expected = if name.contains("obstructed") { EXIT_PRECONDITION } else { EXIT_OK };
        assert_eq!(report.exit_code, expected, "{name}");
        seen += 1;
    }
    assert!(seen >= 10);
}

#[test]
fn binary_exit_codes_and_output_file() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{ \"degree\": ").unwrap();
    let out = bin().args(["factor", "--in"]).arg(&bad).output().unwrap();
    assert_eq!(out.status.code(), Some(EXIT_MALFORMED));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["error"]["kind"], "malformed_input");

    let report = dir.path().join("report.json");
    let status = bin()
        .args(["untwist", "--in"])
        .arg(root().join("scenarios/untwist_7_9.json"))
        .arg("--out")
        .arg(&report)
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(EXIT_OK));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(v["result"]["steps"], 1);

    let out = bin().args(["factor", "--in"]).arg(root().join("scenarios/factor_obstructed.json")).output().unwrap();
    assert_eq!(out.status.code(), Some(EXIT_PRECONDITION));

    let out = bin().args(["factor"]).output().unwrap();
    assert_eq!(out.status.code(), Some(EXIT_MALFORMED));

    let out = bin().args(["oracle", "--mode", "text"]).env("MAXSING_THREADS", "zero").output().unwrap();
    assert_eq!(out.status.code(), Some(EXIT_MALFORMED));

    let out = bin().args(["oracle", "--mode", "text", "--seed", "5"]).env("MAXSING_THREADS", "2").output().unwrap();
    assert_eq!(out.status.code(), Some(EXIT_OK));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("maxsing oracle: ok"));
    assert!(text.contains("seed = 5"));
}
