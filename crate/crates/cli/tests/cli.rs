use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn ffdef(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ffdef")).args(args).env_remove("FFDEF_OUT_DIR").output().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn assert_schema(name: &str, value: &Value) {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("schemas").join(format!("{name}.v1.json"));
    let schema: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    let validator = jsonschema::validator_for(&schema).unwrap();
    let errors: Vec<String> = validator.iter_errors(value).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "{name}: {errors:?}");
}

/// Runs with `--format json`, checks exit 0 and the schema, returns the value.
fn json(schema: &str, args: &[&str]) -> Value {
    let mut full = args.to_vec();
    full.extend(["--format", "json"]);
    let out = ffdef(&full);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    let value: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_schema(schema, &value);
    value
}

#[test]
fn documented_examples() {
    let out = ffdef(&["m-bound", "--genus", "0", "--d", "7", "--p", "2"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out), "18\n");

    let out = ffdef(&["orbit-check", "--p", "2", "--k", "1", "--f", "t^2", "--g", "t"]);
    assert!(stdout(&out).starts_with("criterion true, oracle true, agree"));

    let out = ffdef(&["pheidas", "roundtrip", "--p", "2", "E n . n + n = n"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out), "nat true (n=0), lifted witness verifies, report OK\n");
}

#[test]
fn irreducible_counts() {
    for (p, d, n) in [("2", "7", 18), ("2", "11", 186), ("3", "5", 48)] {
        let v = json("irr-polys", &["irr-polys", "--p", p, "--d", d]);
        assert_eq!(v["count"], n);
        assert_eq!(v["necklace_count"], n);
    }
}

#[test]
fn outputs_match_schemas() {
    let v = json("m-bound", &["m-bound", "--genus", "0..2", "--d", "1", "--p", "2"]);
    let ms: Vec<u64> = v["rows"].as_array().unwrap().iter().map(|r| r["m"].as_u64().unwrap()).collect();
    assert_eq!(ms, [12, 16, 20]);
    let v = json("config", &["config", "--p", "3"]);
    assert_eq!((v["d"].as_u64(), v["m"].as_u64()), (Some(5), Some(22)));
    let v = json("as-solve", &["as-solve", "--p", "2", "--c", "t^2+t"]);
    assert_eq!(v["solvable"], true);
    let v = json("as-solve", &["as-solve", "--p", "2", "--k", "2", "--c", "1/t"]);
    assert_eq!(v["obstruction"]["kind"], "odd_pole");
    let v = json("square", &["square", "--p", "3", "--f", "t^2+2*t+1"]);
    assert_eq!(v["root"], "t+1");
    let v = json("orbit-check", &["orbit-check", "--p", "3", "--f", "t", "--g", "t+1"]);
    assert_eq!((v["criterion"].as_bool(), v["agree"].as_bool()), (Some(false), Some(true)));
    json("build-formula", &["build-formula", "phi"]);
    json("build-formula", &["build-formula", "pi-root", "--p", "3", "--m", "1"]);
    json("lower-system", &["lower", "system", "E h . x = h^2 & (y = 0 | y = t)"]);
    json("lower-single", &["lower", "single", "--p", "3", "E h . x = h^2 & y = 0"]);
    json("pheidas-parse", &["pheidas", "parse", "--p", "2", "E n . E m . n + n + 1 = m & n divp m"]);
    let v = json("pheidas-eval", &["pheidas", "eval", "--p", "3", "E n . n + 1 = 1 + 1 + 1"]);
    assert_eq!(v["witness"]["n"], 2);
    json("pheidas-translate", &["pheidas", "translate", "--p", "2", "E n . E m . n = 1 & n divp m"]);
    let v = json("pheidas-roundtrip", &["pheidas", "roundtrip", "--p", "3", "E n . E m . n = 1 & n divp m"]);
    assert_eq!(v["lifted_check"]["ok"], true);
    let interp = r#"{"p":2,"k":1,"assignment":{"x":"t^2+t"}}"#;
    let v = json("eval", &["eval", "E u . u^2 + u = x", "--interp", interp]);
    assert_eq!((v["verdict"].as_str(), v["method"].as_str()), (Some("true"), Some("exact-pattern")));
}

#[test]
fn exit_codes_and_diagnostics() {
    let cases: [(&[&str], i32, &str); 5] = [
        (&["no-such-command"], 2, "usage"),
        (&["square", "--p", "3", "--f", "t^^2"], 2, "usage"),
        (&["as-solve", "--p", "3", "--c", "t"], 1, "domain"),
        (&["build-formula", "phi", "--genus", "1"], 1, "domain"),
        (&["irr-polys", "--p", "4", "--d", "2"], 1, "domain"),
    ];
    for (args, code, kind) in cases {
        let out = ffdef(args);
        assert_eq!(out.status.code(), Some(code), "{args:?}");
        let err: Value = serde_json::from_slice(&out.stderr).unwrap();
        assert_schema("error", &err);
        assert_eq!(err["error"], kind);
    }
    assert!(ffdef(&["--help"]).status.success());
}

#[test]
fn sweep_is_deterministic_across_workers() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, workers: &str| {
        let path = dir.path().join(name);
        let out = ffdef(&[
            "sweep", "--p", "2", "--max-degree", "2", "--workers", workers, "--out", path.to_str().unwrap(),
            "--format", "json",
        ]);
        assert!(out.status.success());
        let v: Value = serde_json::from_slice(&out.stdout).unwrap();
        assert_schema("sweep", &v);
        assert_eq!(v["disagreements"], 0);
        assert!(!Path::new(&format!("{}.checkpoint.jsonl", path.display())).exists());
        std::fs::read(path).unwrap()
    };
    let a = run("a.csv", "1");
    let b = run("b.csv", "4");
    assert_eq!(a, b);
    assert!(a.starts_with(b"f,g,criterion,oracle,agree\n"));

    let out = ffdef(&["sweep", "--p", "3", "--max-degree", "1", "--format", "csv"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out).lines().count(), 721);
}

#[test]
fn out_dir_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_ffdef"))
        .args(["sweep", "--p", "2", "--max-degree", "1"])
        .env("FFDEF_OUT_DIR", dir.path())
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(dir.path().join("sweep-p2-k1-deg1.csv").exists());
    let out = Command::new(env!("CARGO_BIN_EXE_ffdef"))
        .args(["m-bound", "--d", "5", "--p", "3", "--out", "m.txt"])
        .env("FFDEF_OUT_DIR", dir.path())
        .output()
        .unwrap();
    assert!(out.status.success());
    assert_eq!(std::fs::read_to_string(dir.path().join("m.txt")).unwrap(), "22\n");
}

#[test]
fn formulas_pass_between_commands() {
    let dir = tempfile::tempdir().unwrap();
    let pi = dir.path().join("pi.json");
    let out = ffdef(&["build-formula", "pi", "--format", "json", "--out", pi.to_str().unwrap()]);
    assert!(out.status.success());
    let interp = r#"{"p":2,"k":1,"assignment":{"x":"t^2","y":"t","z":"t"}}"#;
    let arg = format!("@{}", pi.display());
    let v = json("eval", &["eval", &arg, "--interp", interp]);
    assert_eq!(v["verdict"], "true");
    let again = json("eval", &["eval", &arg, "--interp", interp]);
    assert_eq!(v, again);
}
