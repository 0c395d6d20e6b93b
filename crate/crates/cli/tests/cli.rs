use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use polywell_core::Certificate;
use serde_json::Value;
use tempfile::TempDir;

const IDENTITY_WELLS: &str =
    r#"{"X1":{"n":2,"entries":[[1,0],[0,1]]},"X2":{"n":2,"entries":[[-1,0],[0,-1]]}}"#;
const BAD_WELLS: &str = r#"{"X1":{"n":2,"entries":[[2,0],[0,1]]},"X2":{"n":2,"entries":[[0,0],[0,0]]}}"#;
const ZERO: &str = r#"{"n":2,"entries":[[0,0],[0,0]]}"#;
const ID: &str = r#"{"n":2,"entries":[[1,0],[0,1]]}"#;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_polywell"))
        .args(args)
        .output()
        .unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn json(p: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(p).unwrap()).unwrap()
}

/// Parsing, re-serializing and parsing again must give an equal value, with
/// every number bit-equal.
fn assert_round_trip(text: &str) {
    let v: Value = serde_json::from_str(text).unwrap();
    let again: Value = serde_json::from_str(&serde_json::to_string(&v).unwrap()).unwrap();
    assert_eq!(again, v);
}

#[test]
fn certify_exit_codes() {
    let dir = TempDir::new().unwrap();
    let good = write(&dir, "good.json", IDENTITY_WELLS);
    let bad = write(&dir, "bad.json", BAD_WELLS);
    let out = dir.path().join("cert.json");

    let o = run(&["certify", "--wells", s(&good), "--out", s(&out)]);
    assert_eq!(code(&o), 0);
    let v = json(&out);
    assert_eq!(v["verdict"], "polyconvex");
    assert_eq!(v["a"], 1.0);

    let o = run(&["certify", "--wells", s(&bad), "--out", s(&out)]);
    assert_eq!(code(&o), 2);
    let text = fs::read_to_string(&out).unwrap();
    assert_round_trip(&text);
    let cert: Certificate = serde_json::from_str(&text).unwrap();
    assert_eq!(serde_json::to_string_pretty(&cert).unwrap() + "\n", text);
    match cert {
        Certificate::NotPolyconvex { witness: Some(w), .. } => assert!((w.value + 3.0).abs() < 1e-9),
        other => panic!("{other:?}"),
    }

    let o = run(&["certify", "--wells", s(&dir.path().join("missing.json"))]);
    assert_eq!(code(&o), 1);
}

#[test]
fn malformed_input_names_the_field() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "w.json", r#"{"X1":{"n":2,"entries":[[1,0],[0,1]]}}"#);
    let o = run(&["certify", "--wells", s(&p)]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("X2"));

    let p = write(
        &dir,
        "w.json",
        r#"{"X1":{"n":2,"entries":[[1,0],[0,1]]},"X2":{"n":2,"entries":[[1,0]]}}"#,
    );
    let o = run(&["certify", "--wells", s(&p)]);
    assert_eq!(code(&o), 1);

    let o = run(&["certify"]);
    assert_eq!(code(&o), 1);
}

#[test]
fn identities_report() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("id.json");
    let o = run(&["identities", "--out", s(&out)]);
    assert_eq!(code(&o), 0);
    let v = json(&out);
    let checks = v["checks"].as_array().unwrap();
    let tm = checks.iter().find(|c| c["name"] == "trace_minor").unwrap();
    assert_eq!(tm["samples"], 1000);
    for c in checks {
        let r = c["max_residual"].as_f64().unwrap();
        assert!(r <= 1e-9 || c["name"] == "p3_nonpoly_hessian", "{c}");
        assert_eq!(c["passed"], true);
    }
}

#[test]
fn minimize_examples() {
    let dir = TempDir::new().unwrap();
    let wells = write(&dir, "w.json", IDENTITY_WELLS);
    let out = dir.path().join("well.json");
    let o = run(&[
        "minimize",
        "--wells",
        s(&wells),
        "--boundary-affine",
        ID,
        "--random-start",
        "--out",
        s(&out),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(json(&out)["energy_total"].as_f64().unwrap() <= 1e-8);

    let out = dir.path().join("mid.json");
    let history = dir.path().join("hist.csv");
    let o = run(&[
        "minimize",
        "--wells",
        s(&wells),
        "--boundary-affine",
        ZERO,
        "--random-start",
        "--out",
        s(&out),
        "--history",
        s(&history),
    ]);
    assert_eq!(code(&o), 0);
    let v = json(&out);
    assert!((v["energy_total"].as_f64().unwrap() - 4.0).abs() <= 1e-6);
    let field = fs::read_to_string(dir.path().join("mid.field.csv")).unwrap();
    assert_eq!(field.lines().next().unwrap(), "node_index,x,y,y1,y2");
    assert_eq!(field.lines().count(), 1 + 81);
    assert_eq!(v["field_csv"], s(&dir.path().join("mid.field.csv")));
    let hist = fs::read_to_string(&history).unwrap();
    assert_eq!(hist.lines().next().unwrap(), "iter,I_C,grad_norm,step");
    let energies: Vec<f64> = hist
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert!(energies.windows(2).all(|w| w[1] <= w[0]));

    let bad = write(&dir, "bad.json", BAD_WELLS);
    let o = run(&["minimize", "--wells", s(&bad), "--boundary-affine", ZERO]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stdout).contains("\"value\": -3.0"));
}

#[test]
fn minimize_no_convergence_exits_3() {
    let dir = TempDir::new().unwrap();
    let wells = write(&dir, "w.json", IDENTITY_WELLS);
    let o = run(&[
        "minimize",
        "--wells",
        s(&wells),
        "--boundary-affine",
        ZERO,
        "--random-start",
        "--max-iters",
        "2",
    ]);
    assert_eq!(code(&o), 3);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["converged"], false);
}

#[test]
fn boundary_csv_matches_affine_data() {
    let dir = TempDir::new().unwrap();
    let wells = write(&dir, "w.json", IDENTITY_WELLS);
    let affine = r#"{"M":{"n":2,"entries":[[0.5,0.2],[-0.1,0.8]]},"c":[1,2]}"#;
    let spec = write(&dir, "affine.json", affine);
    let a = dir.path().join("a.json");
    assert_eq!(
        code(&run(&[
            "minimize",
            "--wells",
            s(&wells),
            "--mesh-m",
            "4",
            "--boundary-affine",
            s(&spec),
            "--out",
            s(&a)
        ])),
        0
    );
    let b = dir.path().join("b.json");
    let csv = dir.path().join("a.field.csv");
    assert_eq!(
        code(&run(&[
            "minimize",
            "--wells",
            s(&wells),
            "--mesh-m",
            "4",
            "--boundary-csv",
            s(&csv),
            "--out",
            s(&b)
        ])),
        0
    );
    let (va, vb) = (json(&a), json(&b));
    assert!((va["energy_total"].as_f64().unwrap() - vb["energy_total"].as_f64().unwrap()).abs() <= 1e-12);

    let o = run(&[
        "minimize",
        "--wells",
        s(&wells),
        "--mesh-m",
        "8",
        "--boundary-csv",
        s(&csv),
    ]);
    assert_eq!(code(&o), 1);
    let o = run(&[
        "minimize",
        "--wells",
        s(&wells),
        "--boundary-affine",
        r#"{"M":{"n":3,"entries":[[1,0,0],[0,1,0],[0,0,1]]}}"#,
    ]);
    assert_eq!(code(&o), 1);
    let o = run(&[
        "minimize",
        "--wells",
        s(&wells),
        "--mesh-m",
        "0",
        "--boundary-affine",
        ID,
    ]);
    assert_eq!(code(&o), 1);
}

#[test]
fn outputs_are_deterministic() {
    let dir = TempDir::new().unwrap();
    let wells = write(&dir, "w.json", IDENTITY_WELLS);
    let mut runs = Vec::new();
    for k in 0..2 {
        let out = dir.path().join(format!("r{k}.json"));
        let hist = dir.path().join(format!("r{k}.csv"));
        let args = [
            "minimize",
            "--wells",
            s(&wells),
            "--mesh-m",
            "4",
            "--boundary-affine",
            ZERO,
            "--random-start",
            "--seed",
            "7",
        ];
        assert_eq!(
            code(&run(
                &[&args[..], &["--out", s(&out), "--history", s(&hist)]].concat()
            )),
            0
        );
        let probe = run(&[
            "probe-uniqueness",
            "--wells",
            s(&wells),
            "--mesh-m",
            "4",
            "--boundary-affine",
            ID,
            "--starts",
            "3",
            "--seed",
            "7",
        ]);
        assert_eq!(code(&probe), 0);
        let hess = run(&[
            "hessian-check",
            "--wells",
            s(&wells),
            "--samples",
            "2000",
            "--seed",
            "7",
        ]);
        assert_eq!(code(&hess), 0);
        let text = fs::read_to_string(&out).unwrap();
        assert_round_trip(&text);
        assert_round_trip(&String::from_utf8(probe.stdout.clone()).unwrap());
        assert_round_trip(&String::from_utf8(hess.stdout.clone()).unwrap());
        runs.push((
            text.replace(&format!("r{k}"), "r"),
            fs::read(dir.path().join(format!("r{k}.field.csv"))).unwrap(),
            fs::read(&hist).unwrap(),
            probe.stdout,
            hess.stdout,
        ));
    }
    assert_eq!(runs[0], runs[1]);
}

#[test]
fn sampled_checks() {
    let dir = TempDir::new().unwrap();
    let good = write(&dir, "good.json", IDENTITY_WELLS);
    let bad = write(&dir, "bad.json", BAD_WELLS);

    let o = run(&["decompose-check", "--wells", s(&good), "--samples", "500"]);
    assert_eq!(code(&o), 0);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["passed"], true);
    assert_eq!(v["decomposition"]["null_coeff"], -8.0);
    assert_eq!(code(&run(&["decompose-check", "--wells", s(&bad)])), 2);

    let o = run(&["hessian-check", "--wells", s(&bad), "--samples", "100"]);
    assert_eq!(code(&o), 2);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["min_value"], -3.0);
}
