use std::process::Command;

use blocking_jacobi::cli::{run, EXIT_OK, EXIT_UNEQUAL, EXIT_USAGE};
use serde_json::Value;

fn cli(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("blocking-jacobi").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn ok(args: &[&str]) -> String {
    let (code, out, err) = cli(args);
    assert_eq!(code, EXIT_OK, "{args:?}: {err}");
    out
}

fn schema(name: &str) -> jsonschema::Validator {
    let path = format!("{}/schemas/{name}.schema.json", env!("CARGO_MANIFEST_DIR"));
    let s: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    jsonschema::validator_for(&s).unwrap()
}

fn assert_valid(name: &str, doc: &Value) {
    let v = schema(name);
    let errors: Vec<String> = v.iter_errors(doc).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "{name}: {errors:?}");
}

fn csv_rows(text: &str) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    r.records().map(|row| row.unwrap().iter().map(str::to_string).collect()).collect()
}

#[test]
fn verify_main_json() {
    let out = ok(&["verify", "main", "--order", "10", "--zwindow", "6", "--json"]);
    let doc: Value = serde_json::from_str(&out).unwrap();
    assert_valid("identity_report", &doc);
    assert_eq!(doc["equal"], true);
    assert_eq!(doc["id"], "main");
    assert!(doc["discrepancy"].is_null());
}

#[test]
fn verify_every_id_reports_equal() {
    for id in ["jacobi", "asep", "three-state", "two-exclusion", "products", "k-exclusion:3", "offset-law:2:3"] {
        let out = ok(&["verify", id, "--order", "6", "--zwindow", "3", "--json"]);
        let doc: Value = serde_json::from_str(&out).unwrap();
        assert_valid("identity_report", &doc);
        assert_eq!(doc["equal"], true, "{id}");
    }
    assert!(ok(&["verify", "main", "--order", "4", "--zwindow", "2"]).contains("equal"));
}

#[test]
fn sequence_s_even_csv() {
    let out = ok(&["sequence", "s_even", "--order", "8", "--csv"]);
    assert!(out.starts_with("n,m,coeff\n"));
    let rows = csv_rows(&out);
    let get = |n: &str, m: &str| rows.iter().find(|r| r[0] == n && r[1] == m).map(|r| r[2].clone());
    assert_eq!(get("0", "0").as_deref(), Some("1"));
    assert_eq!(get("1", "2").as_deref(), Some("1"));
    assert_eq!(get("3", "2").as_deref(), Some("5"));
    assert_eq!(get("4", "4").as_deref(), Some("1"));
    assert!(rows.iter().all(|r| r[0].parse::<u32>().unwrap() <= 8));
}

#[test]
fn sequences_validate_and_univariate_csv() {
    for name in ["s_even", "s_odd", "gfp", "s_k", "asep-even", "asep-odd"] {
        let out = ok(&["sequence", name, "--order", "5", "--k", "3", "--offset", "-1", "--json"]);
        assert_valid("sequence", &serde_json::from_str(&out).unwrap());
    }
    let out = ok(&["sequence", "asep-odd", "--order", "6", "--csv"]);
    assert!(out.starts_with("n,coeff\n"));
    assert_eq!(csv_rows(&out).len(), 7);
}

#[test]
fn biject_psi_known_example() {
    let out = ok(&["biject", "psi", "--omega", "3,0,1,2,2,0,1,1,0,1,0", "--class", "even"]);
    assert_eq!(out.trim(), "(3 1 1 0 ; 5 2 2 1)");
    let back = ok(&["biject", "psi-inverse", "--gfp", "(3 1 1 0 ; 5 2 2 1)"]);
    let again = ok(&["biject", "psi", "--omega", back.trim(), "--class", "even"]);
    assert_eq!(again.trim(), "(3 1 1 0 ; 5 2 2 1)");
    let json = ok(&["biject", "psi", "--omega", "3,0,1,2,2,0,1", "--json"]);
    assert_valid("gfp", &serde_json::from_str(&json).unwrap());
    let state = ok(&["biject", "psi-inverse", "--gfp", "(3 1 ; 2 0)", "--json"]);
    assert_valid("state", &serde_json::from_str(&state).unwrap());
}

#[test]
fn biject_phi_and_frobenius() {
    let out = ok(&["biject", "phi", "--gfp", "( ; )", "--offset", "2"]);
    assert!(out.trim().starts_with('('));
    assert_eq!(ok(&["biject", "frobenius", "--partition", "4,3,1"]).trim(), "(3 1 ; 2 0)");
}

#[test]
fn expand_and_enumerate_outputs_validate() {
    let out = ok(&["expand", "k2-plus", "--order", "3", "--json"]);
    assert_valid("series", &serde_json::from_str(&out).unwrap());
    let out = ok(&["expand", "k-exclusion", "--k", "3", "--order", "4", "--offset", "1", "--csv"]);
    assert!(out.starts_with("dq,dt,dz,coeff\n"));
    let gfps: Value = serde_json::from_str(&ok(&["enumerate", "gfp", "--order", "4", "--json"])).unwrap();
    for g in gfps.as_array().unwrap() {
        assert_valid("gfp", g);
    }
    let states: Value =
        serde_json::from_str(&ok(&["enumerate", "states", "--k", "3", "--offset", "1", "--order", "4", "--json"]))
            .unwrap();
    assert!(!states.as_array().unwrap().is_empty());
    for s in states.as_array().unwrap() {
        assert_valid("state", s);
    }
    let text = ok(&["enumerate", "gfp", "--order", "3"]);
    assert_eq!(text.lines().count(), 10);
}

#[test]
fn simulate_json_and_csv() {
    let out = ok(&[
        "simulate",
        "--model",
        "asep",
        "--q",
        "1/2",
        "--window",
        "4",
        "--horizon",
        "50",
        "--seed",
        "3",
        "--exact",
        "--json",
    ]);
    let doc: Value = serde_json::from_str(&out).unwrap();
    assert_valid("simulation", &doc);
    assert_eq!(doc["stats"]["conserved_held"], true);
    let csv = ok(&["simulate", "--model", "2-exclusion", "--window", "4", "--horizon", "20", "--seed", "3", "--csv"]);
    assert!(csv.starts_with("site,z,fraction,std_err\n"));
    let again = ok(&["simulate", "--model", "2-exclusion", "--window", "4", "--horizon", "20", "--seed", "3", "--csv"]);
    assert_eq!(csv, again);
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        &["verify", "nope"][..],
        &["frobnicate"],
        &["verify", "main", "--order", "x"],
        &["biject", "psi"],
        &["biject", "psi", "--omega", "0,0,1"],
        &["simulate", "--model", "asep", "--q", "abc"],
        &["simulate", "--model", "nope"],
        &["sequence", "s_k", "--k", "0"],
        &["verify", "main", "--json", "--csv"],
    ] {
        let (code, _, err) = cli(args);
        assert_eq!(code, EXIT_USAGE, "{args:?}");
        assert!(!err.is_empty());
    }
    let (code, out, _) = cli(&["--help"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("verify"));
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_blocking-jacobi");
    let st = Command::new(bin).args(["verify", "main", "--order", "6", "--zwindow", "3"]).output().unwrap();
    assert_eq!(st.status.code(), Some(EXIT_OK));
    let st = Command::new(bin).args(["verify", "bogus"]).output().unwrap();
    assert_eq!(st.status.code(), Some(EXIT_USAGE));
    assert_ne!(EXIT_UNEQUAL, EXIT_OK);
}
