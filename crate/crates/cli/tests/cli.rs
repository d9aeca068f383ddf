use serde_json::Value;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_lorentz-verify"))
}

fn exec(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn json_of(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("stdout is JSON")
}

fn strip(v: &mut Value) {
    match v {
        Value::Object(m) => {
            m.remove("runtime_ms");
            m.remove("fingerprint");
            m.values_mut().for_each(strip);
        }
        Value::Array(a) => a.iter_mut().for_each(strip),
        _ => {}
    }
}

#[test]
fn list_is_sorted_and_names_required_entries() {
    let o = exec(&["list", "--format", "json"]);
    assert!(o.status.success());
    let items = json_of(&o);
    let keys: Vec<(String, String)> = items
        .as_array()
        .unwrap()
        .iter()
        .map(|i| (i["kind"].as_str().unwrap().to_string(), i["name"].as_str().unwrap().to_string()))
        .collect();
    let mut sorted = keys.clone();
    sorted.sort();
    assert_eq!(keys, sorted);
    for name in ["minkowski", "de-sitter-grw", "anti-de-sitter-grw", "simons-great-circle", "desitter-slice-suite"] {
        assert!(keys.iter().any(|(_, n)| n == name), "{name} missing");
    }
    assert_eq!(exec(&["list"]).stdout, exec(&["list"]).stdout);
}

#[test]
fn builtin_suite_passes_with_exit_zero() {
    let o = exec(&["run", "minkowski-suite", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let r = json_of(&o);
    assert_eq!(r["verdict"], "pass");
    assert_eq!(r["scenario_id"], "minkowski-suite");
    for c in r["checks"].as_array().unwrap() {
        for v in c["residuals"].as_object().unwrap().values() {
            let s = v.as_str().unwrap();
            s.parse::<f64>().unwrap();
            let mantissa = s.split('e').next().unwrap().trim_start_matches('-').replace('.', "");
            assert_eq!(mantissa.len(), 17, "{s}");
        }
    }
}

#[test]
fn reports_are_byte_identical_modulo_volatile_fields() {
    let dir = tempfile::tempdir().unwrap();
    let mut docs = Vec::new();
    for k in 0..2 {
        let out = dir.path().join(format!("r{k}.json"));
        let o = exec(&["run", "simons-small-circle", "--seed", "7", "--format", "json", "--out", out.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0));
        let mut v: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
        assert_eq!(v["seed"], 7);
        strip(&mut v);
        docs.push(serde_json::to_string_pretty(&v).unwrap());
    }
    assert_eq!(docs[0], docs[1]);
}

#[test]
fn unknown_field_reference_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    let doc = serde_json::json!({
        "schema_version": 1,
        "id": "bad",
        "ambient": {"kind": "builtin", "name": "minkowski", "n": 2},
        "fields": [],
        "checks": [{"check": "certify", "args": {"field": "nope"}}]
    });
    std::fs::write(&path, doc.to_string()).unwrap();
    let o = exec(&["run", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("UnresolvedReference"));
}

#[test]
fn empty_scenario_passes_with_warning() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("empty.json");
    let doc = serde_json::json!({
        "schema_version": 1,
        "id": "empty",
        "ambient": {"kind": "builtin", "name": "minkowski", "n": 2},
        "checks": []
    });
    std::fs::write(&path, doc.to_string()).unwrap();
    let o = exec(&["run", path.to_str().unwrap(), "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let r = json_of(&o);
    assert_eq!(r["checks"].as_array().unwrap().len(), 0);
    assert_eq!(r["warnings"].as_array().unwrap().len(), 1);
}

#[test]
fn failing_check_exits_one() {
    let o = exec(&["verify-conformal", "--model", "minkowski", "--field", "position", "--expect-class", "parallel"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stdout).contains("[fail] certify"));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(exec(&["run", "minkowski-suite", "--format", "yaml"]).status.code(), Some(2));
    assert_eq!(exec(&["run", "/nonexistent/scenario.json"]).status.code(), Some(2));
    assert_eq!(exec(&["verify-ambient", "--model", "no-such-model"]).status.code(), Some(2));
    assert_eq!(exec(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn tolerance_flag_reaches_checks() {
    let o = exec(&["verify-ambient", "--model", "minkowski", "--tol", "1e-3", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let r = json_of(&o);
    let metric = &r["checks"][0];
    assert_eq!(metric["tolerances"]["symmetry"], "1.0000000000000000e-3");
}

#[test]
fn subcommands_pass_on_de_sitter_defaults() {
    let half_pi = std::f64::consts::FRAC_PI_2.to_string();
    let runs: Vec<Vec<&str>> = vec![
        vec!["verify-ambient", "--curvature", "1"],
        vec!["verify-conformal", "--expect-class", "closed_conformal", "--psi", "sinh(x0)"],
        vec!["curvature", "--t0", "1"],
        vec!["flow", "--t0", "1", "--theta0", &half_pi, "--expect", "small"],
        vec!["flow", "--t0", "1", "--theta0", "1.0471975511965976", "--expect", "large"],
        vec!["verify-ambient", "--model", "anti-de-sitter-grw", "--curvature", "-1"],
        vec!["curvature", "--t0", "-0.5"],
        vec!["stability", "--t0", "1", "--expect-classification", "leaf"],
    ];
    for args in runs {
        let o = exec(&args);
        assert_eq!(o.status.code(), Some(0), "{args:?}: {}", String::from_utf8_lossy(&o.stdout));
    }
}

#[test]
fn thread_cap_does_not_change_results() {
    let run = |threads: &str| {
        let o = bin()
            .args(["run", "minkowski-suite", "--format", "json"])
            .env("LORENTZ_VERIFY_THREADS", threads)
            .output()
            .unwrap();
        let mut v = json_of(&o);
        strip(&mut v);
        v
    };
    assert_eq!(run("1"), run("3"));
}
