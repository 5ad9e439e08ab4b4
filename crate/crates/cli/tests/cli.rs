use std::path::PathBuf;

use keyval_cli::{run_command, Outcome, EXIT_OK, EXIT_USAGE, EXIT_VIOLATION};
use keyval_core::basefield::BaseFieldConfig;
use keyval_core::io::{basis_from_json, ExpansionDoc, IzumiReportDoc, TraceStepDoc, ValidationDoc};
use keyval_core::numeric::{Rat, Value};
use keyval_core::text::parse_poly;

fn data(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "data", name].iter().collect();
    p.to_string_lossy().into_owned()
}

fn run(args: &[&str]) -> Outcome {
    run_with_stdin(args, "")
}

fn run_with_stdin(args: &[&str], stdin: &str) -> Outcome {
    let argv = std::iter::once("keyval").chain(args.iter().copied());
    run_command(argv, &mut stdin.as_bytes())
}

fn ok(args: &[&str]) -> String {
    let out = run(args);
    assert_eq!(out.code, EXIT_OK, "{args:?}: {}", out.stderr);
    out.stdout.trim_end().to_string()
}

#[test]
fn weight_example() {
    let b1 = data("b1.json");
    assert_eq!(ok(&["weight", "--basis", &b1, "--level", "2", "--poly", "x^3 + y*x"]), "3/2");
}

#[test]
fn izumi_exact_example() {
    let b2 = data("b2.json");
    assert_eq!(ok(&["izumi-exact", "--basis", &b2, "--upper", "3", "--lower", "1"]), "11/8");
    assert_eq!(ok(&["izumi-exact", "--basis", &b2, "--upper", "3", "--lower", "2"]), "11/10");
    let out = run(&["izumi-exact", "--basis", &b2, "--upper", "4", "--lower", "1"]);
    assert_eq!(out.code, EXIT_USAGE);
}

#[test]
fn example_conic_table() {
    let out = ok(&["example-conic", "--depth", "12", "--json"]);
    let rows: serde_json::Value = serde_json::from_str(&out).unwrap();
    let rows = rows.as_array().unwrap();
    assert_eq!(rows.len(), 12);
    for (k, row) in rows.iter().enumerate() {
        let i = (k + 1).to_string();
        assert_eq!(row["beta"], i.as_str());
        assert_eq!(row["oracle"], i.as_str());
    }
    assert_eq!(rows[1]["U"], "x + y");
    let text = ok(&["example-conic", "--depth", "3"]);
    assert_eq!(text.lines().count(), 4);
}

#[test]
fn validate_reports_and_exit_codes() {
    assert_eq!(run(&["validate", "--basis", &data("b3.json")]).code, EXIT_OK);
    let dir = std::env::temp_dir().join(format!("keyval-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let bad = dir.join("bad.json");
    std::fs::write(
        &bad,
        r#"{"base": "function_field", "steps": [{"U": "x", "beta": "1"}, {"U": "x^2 - y", "beta": "3"}]}"#,
    )
    .unwrap();
    let bad = bad.to_string_lossy().into_owned();
    let out = run(&["validate", "--basis", &bad]);
    assert_eq!(out.code, EXIT_VIOLATION);
    assert!(out.stdout.contains("step 1 (c)"), "{}", out.stdout);
    let out = run(&["validate", "--basis", &bad, "--json"]);
    let doc: ValidationDoc = serde_json::from_str(&out.stdout).unwrap();
    assert!(!doc.valid);
    assert_eq!(doc.violations[0].condition, "c");

    let garbled = dir.join("garbled.json");
    std::fs::write(&garbled, "{").unwrap();
    assert_eq!(run(&["validate", "--basis", &garbled.to_string_lossy()]).code, EXIT_USAGE);
    assert_eq!(run(&["validate", "--basis", "/nonexistent/basis.json"]).code, EXIT_USAGE);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn usage_errors() {
    let b1 = data("b1.json");
    assert_eq!(run(&[]).code, EXIT_USAGE);
    assert_eq!(run(&["frobnicate"]).code, EXIT_USAGE);
    assert_eq!(run(&["weight", "--basis", &b1, "--level", "2"]).code, EXIT_USAGE);
    let out = run(&["weight", "--basis", &b1, "--level", "2", "--poly", "x^-1"]);
    assert_eq!(out.code, EXIT_USAGE);
    assert!(out.stderr.contains("--poly"), "{}", out.stderr);
    assert_eq!(run(&["weight", "--basis", &b1, "--level", "3", "--poly", "x"]).code, EXIT_USAGE);
    assert_eq!(run(&["--help"]).code, EXIT_OK);
}

#[test]
fn poly_from_stdin() {
    let b1 = data("b1.json");
    let out = run_with_stdin(&["weight", "--basis", &b1, "--level", "1", "--poly", "-"], "x^3 + y*x\n");
    assert_eq!(out.code, EXIT_OK, "{}", out.stderr);
    assert_eq!(out.stdout.trim(), "3/2");
}

#[test]
fn expand_and_initial() {
    let b1 = data("b1.json");
    assert_eq!(ok(&["expand", "--basis", &b1, "--level", "2", "--poly", "x^3 + y*x"]), "U_1*U_2 + 2*y*U_1");
    assert_eq!(ok(&["initial", "--basis", &b1, "--level", "2", "--poly", "x^3 + y*x"]), "2*y*U_1");
    let out = ok(&["expand", "--basis", &b1, "--level", "2", "--poly", "x^4", "--json"]);
    let doc: ExpansionDoc = serde_json::from_str(&out).unwrap();
    let cfg = BaseFieldConfig::function_field();
    let e = doc.to_expansion(&cfg).unwrap();
    let b = basis_from_json(&std::fs::read_to_string(&b1).unwrap()).unwrap();
    assert_eq!(b.expansion_eval(&e).unwrap(), parse_poly("x^4", &cfg).unwrap());
    assert_eq!(serde_json::to_string_pretty(&doc).unwrap(), out);
}

#[test]
fn raise_and_lower_traces() {
    let b1 = data("b1.json");
    let out = ok(&["raise", "--basis", &b1, "--level", "1", "--poly", "x^4", "--json", "--trace"]);
    let j: serde_json::Value = serde_json::from_str(&out).unwrap();
    let trace: Vec<TraceStepDoc> = serde_json::from_value(j["trace"].clone()).unwrap();
    let weights: Vec<Value> = trace.iter().map(|s| s.weight.clone()).collect();
    assert_eq!(weights, vec![Value::from(2); 3]);
    assert_eq!(j["direction"], "raise");

    let out = ok(&["lower", "--basis", &b1, "--level", "2", "--poly", "x^3 + y*x", "--json", "--trace"]);
    let j: serde_json::Value = serde_json::from_str(&out).unwrap();
    let trace: Vec<TraceStepDoc> = serde_json::from_value(j["trace"].clone()).unwrap();
    let w = Value::from(Rat::new(3, 2));
    assert_eq!(trace.iter().map(|s| s.weight.clone()).collect::<Vec<_>>(), vec![w.clone(), w]);

    let plain = ok(&["lower", "--basis", &b1, "--level", "2", "--poly", "x^3 + y*x"]);
    assert_eq!(plain, "U_1^3 + y*U_1");
    assert_eq!(run(&["lower", "--basis", &b1, "--level", "1", "--poly", "x"]).code, EXIT_USAGE);
}

#[test]
fn groups_and_gauss() {
    let out = ok(&["groups", "--basis", &data("b3.json"), "--json"]);
    let rows: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(rows[0]["n"], 1);
    assert_eq!(rows[0]["m"], 2);
    assert_eq!(rows[0]["m_equals_n"], false);
    assert_eq!(ok(&["gauss", "--beta", "1/2", "--poly", "x^3 + y*x"]), "3/2");
    assert_eq!(ok(&["gauss", "--beta", "1", "--p", "3", "--poly", "9*x^2 + 3*x + 27"]), "2");
    assert_eq!(run(&["gauss", "--beta", "1", "--p", "4", "--poly", "x"]).code, EXIT_USAGE);
    assert_eq!(run(&["gauss", "--beta", "0", "--poly", "x"]).code, EXIT_USAGE);
}

#[test]
fn izumi_bound_flags() {
    assert_eq!(ok(&["izumi-bound", "--basis", &data("b1.json")]), "3/2");
    assert_eq!(run(&["izumi-bound", "--basis", &data("b1.json"), "--normalized"]).code, EXIT_VIOLATION);
    assert_eq!(ok(&["izumi-bound", "--basis", &data("conic-basis.json"), "--normalized"]), "3");
}

#[test]
fn izumi_search_is_reproducible() {
    let b1 = data("b1.json");
    let args = ["izumi-search", "--basis", &b1, "--upper", "2", "--lower", "1", "--samples", "400", "--seed", "42", "--json"];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.code, EXIT_OK, "{}", a.stderr);
    assert_eq!(a.stdout, b.stdout);
    let doc: IzumiReportDoc = serde_json::from_str(&a.stdout).unwrap();
    assert_eq!(doc.sup_found, Rat::new(3, 2));
    assert_eq!(doc.witness, "x^2 - y");
    assert_eq!(doc.within_theoretical, Some(true));
    assert_eq!(serde_json::to_string_pretty(&doc).unwrap(), a.stdout.trim_end());
}

#[test]
fn oracle_outcomes() {
    let conic = data("conic.json");
    assert_eq!(ok(&["oracle", "--param", &conic, "--poly", "x + y"]), "2");
    assert_eq!(ok(&["oracle", "--param", &conic, "--poly", "x"]), "1");
    assert_eq!(ok(&["oracle", "--param", &conic, "--poly", "x^2 - y^2 - y^3"]), ">= 512");
    let j = ok(&["oracle", "--param", &conic, "--poly", "x^2 - y^2 - y^3", "--json"]);
    let j: serde_json::Value = serde_json::from_str(&j).unwrap();
    assert_eq!(j["at_least"], "512");
}

#[test]
fn data_files_load() {
    for name in ["b1.json", "b2.json", "b3.json", "conic-basis.json", "p3.json"] {
        let b = basis_from_json(&std::fs::read_to_string(data(name)).unwrap()).unwrap();
        assert!(b.validate().is_valid(), "{name}");
    }
}
