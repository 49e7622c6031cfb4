//! End-to-end runs of the `qclab` binary.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

const COS: &str = "omega,re,im\n-0.5,0.5,0\n0.5,0.5,0\n";

fn qclab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qclab"))
        .args(args)
        .output()
        .unwrap()
}

fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p
}

fn report(out: &Path) -> Value {
    serde_json::from_slice(&fs::read(out.join("report.json")).unwrap()).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn analyze_cosine() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "cos.csv", COS);
    let out = dir.path().join("out");
    let o = qclab(&["analyze", "--input", s(&input), "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    for f in [
        "report.json",
        "zeros.csv",
        "zeros.json",
        "measure.csv",
        "rebuilt.csv",
        "g_windows.csv",
        "growth.csv",
        "poisson_vs_T.csv",
    ] {
        assert!(out.join(f).is_file(), "{f} missing");
    }
    let r = report(&out);
    assert_eq!(r["schema"], 1);
    assert!(r["error"].is_null());
    let ld = &r["diffraction"]["logderiv"];
    assert_eq!(ld["status"], "present");
    assert!((ld["data"]["d"].as_f64().unwrap() - 1.0).abs() < 1e-10);
    for atom in ld["data"]["atoms"].as_array().unwrap() {
        let g = atom["gamma"].as_f64().unwrap();
        let want = if (g.round() as i64) % 2 == 0 { 1.0 } else { -1.0 };
        assert!((atom["b"][0].as_f64().unwrap() - want).abs() < 1e-10);
    }
    let rt = &r["reconstruct"]["roundtrip"];
    assert_eq!(rt["original"], rt["rebuilt"]);
    assert!(rt["max_error"].as_f64().unwrap() < 1e-6);
    assert_eq!(r["reconstruct"]["g"]["verdict"], "bounded");
    let zeros = fs::read_to_string(out.join("zeros.csv")).unwrap();
    let mut lines = zeros.lines();
    assert_eq!(lines.next(), Some("point,multiplicity"));
    let (a, m) = lines.next().unwrap().split_once(',').unwrap();
    assert!((a.parse::<f64>().unwrap() + 99.5).abs() < 1e-10);
    assert_eq!(m, "1");
}

#[test]
fn zero_set_input_has_no_logderiv() {
    let dir = tempfile::tempdir().unwrap();
    let mut body = String::from("point,multiplicity\n");
    for k in -60..60 {
        body.push_str(&format!("{},1\n", k as f64 + 0.5));
    }
    let input = write(dir.path(), "z.csv", &body);
    let out = dir.path().join("out");
    let o = qclab(&[
        "diffract",
        "--input",
        s(&input),
        "--window=-60,60",
        "--out",
        s(&out),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r = report(&out);
    assert_eq!(r["diffraction"]["logderiv"]["status"], "absent");
    assert_eq!(r["diffraction"]["measure_source"], "bohr");
    assert!((r["diffraction"]["bohr"]["d"].as_f64().unwrap() - 1.0).abs() < 0.02);
}

#[test]
fn t3_budget_is_a_stage_error() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(
        dir.path(),
        "m.csv",
        "gamma,re,im\n-0.0001,1,0\n0,1,0\n0.0001,1,0\n",
    );
    let out = dir.path().join("out");
    let o = qclab(&["reconstruct", "--input", s(&input), "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(2));
    let r = report(&out);
    assert_eq!(r["error"]["stage"], "reconstruct/log_series");
}

#[test]
fn duplicate_gammas_warn() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(
        dir.path(),
        "m.csv",
        "gamma,re,im\n-1,-0.5,0\n-1,-0.5,0\n0,1,0\n1,-1,0\n",
    );
    let out = dir.path().join("out");
    let o = qclab(&["reconstruct", "--input", s(&input), "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r = report(&out);
    let w = r["warnings"].as_array().unwrap();
    assert!(w.iter().any(|x| x.as_str().unwrap().contains("repeated gamma")), "{w:?}");
    let measure = fs::read_to_string(out.join("measure.csv")).unwrap();
    assert!(measure.lines().any(|l| l == "-1.0,-1.0,0.0"), "{measure}");
}

#[test]
fn poisson_with_given_measure() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "cos.csv", COS);
    let mut m = String::from("gamma,re,im\n0,1,0\n");
    for k in 1..=12 {
        let b = if k % 2 == 0 { 1 } else { -1 };
        m.push_str(&format!("{k},{b},0\n-{k},{b},0\n"));
    }
    let measure = write(dir.path(), "m.csv", &m);
    let out = dir.path().join("out");
    let o = qclab(&[
        "poisson",
        "--input",
        s(&input),
        "--measure",
        s(&measure),
        "--out",
        s(&out),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r = report(&out);
    assert_eq!(r["poisson"]["measure_source"], "file");
    assert!(r["poisson"]["residual"].as_f64().unwrap() < 1e-8);
}

#[test]
fn parse_errors_name_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "bad.csv", "omega,re,im\n0.5,0.5,0\n0.5,x,0\n");
    let out = dir.path().join("out");
    let o = qclab(&["zeros", "--input", s(&input), "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(2));
    let r = report(&out);
    assert_eq!(r["error"]["stage"], "input");
    assert!(r["error"]["message"].as_str().unwrap().contains("line 3"));
}

#[test]
fn usage_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "cos.csv", COS);
    let out = dir.path().join("out");
    assert_eq!(qclab(&["analyze", "--input", s(&input)]).status.code(), Some(1));
    assert_eq!(
        qclab(&["analyze", "--input", s(&input), "--window", "3,1", "--out", s(&out)])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        qclab(&["analyze", "--input", "/nonexistent.csv", "--out", s(&out)])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(qclab(&["frobnicate"]).status.code(), Some(1));
}

#[test]
fn unwritable_output_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "cos.csv", COS);
    // A path below a regular file can never be created.
    let blocker = write(dir.path(), "file", "");
    let out = blocker.join("out");
    let o = qclab(&["zeros", "--input", s(&input), "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("output directory"));
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(
        dir.path(),
        "u.csv",
        "omega,re,im\n-1.2071067811865475,0.25,0\n-0.20710678118654757,0.25,0\n0.20710678118654757,0.25,0\n1.2071067811865475,0.25,0\n",
    );
    let run = |name: &str| {
        let out = dir.path().join(name);
        let o = qclab(&["analyze", "--input", s(&input), "--seed", "3", "--out", s(&out)]);
        assert_eq!(o.status.code(), Some(0));
        out
    };
    let (a, b) = (run("a"), run("b"));
    for f in fs::read_dir(&a).unwrap() {
        let name = f.unwrap().file_name();
        assert_eq!(
            fs::read(a.join(&name)).unwrap(),
            fs::read(b.join(&name)).unwrap(),
            "{name:?}"
        );
    }
}
