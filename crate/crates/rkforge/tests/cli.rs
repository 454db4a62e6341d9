//! End-to-end runs of the `rkforge` binary.

use serde_json::Value;
use std::path::Path;
use std::process::{Command, Output};

fn rkforge(args: &[&str], threads: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_rkforge"));
    cmd.args(args);
    match threads {
        Some(t) => cmd.env("RKFORGE_THREADS", t),
        None => cmd.env_remove("RKFORGE_THREADS"),
    };
    cmd.output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn prepare(dir: &Path, extra: &[&str], threads: Option<&str>) -> Output {
    let mut args = vec!["prepare", "--out", dir.to_str().unwrap()];
    args.extend_from_slice(extra);
    rkforge(&args, threads)
}

fn report(dir: &Path) -> Value {
    let mut v: Value = serde_json::from_str(&std::fs::read_to_string(dir.join("report.json")).unwrap()).unwrap();
    v.as_object_mut().unwrap().remove("timestamp");
    v
}

#[test]
fn prepare_writes_verified_outputs() {
    let d = tempfile::tempdir().unwrap();
    let o = prepare(
        d.path(),
        &["--orientation", "YC", "--N", "1", "--M", "4", "--verify"],
        None,
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["state.txt", "schedule.json", "report.json"] {
        assert!(d.path().join(f).exists(), "{f} missing");
    }
    let r = report(d.path());
    assert!((r["overlap"].as_f64().unwrap() - 1.0).abs() < 1e-9);
    assert!((r["mps_overlap"].as_f64().unwrap() - 1.0).abs() < 1e-9);
    assert_eq!(r["bonds"], 24);
    assert!(r["amplitudes_real_nonnegative"].as_bool().unwrap());
}

#[test]
fn prepare_is_deterministic_across_thread_counts() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["--orientation", "XC", "--N", "2", "--M", "3", "--verify"];
    assert_eq!(code(&prepare(a.path(), &args, Some("1"))), 0);
    assert_eq!(code(&prepare(b.path(), &args, Some("4"))), 0);
    assert_eq!(report(a.path()), report(b.path()));
    for f in ["state.txt", "schedule.json"] {
        assert_eq!(
            std::fs::read(a.path().join(f)).unwrap(),
            std::fs::read(b.path().join(f)).unwrap(),
            "{f} differs"
        );
    }
}

#[test]
fn usage_errors_exit_2() {
    let d = tempfile::tempdir().unwrap();
    // missing required size
    assert_eq!(code(&prepare(d.path(), &["--orientation", "YC", "--M", "2"], None)), 2);
    // exhaustive verification guard
    assert_eq!(
        code(&prepare(
            d.path(),
            &["--orientation", "YC", "--N", "2", "--M", "4", "--verify"],
            None
        )),
        2
    );
    // malformed thread count
    assert_eq!(
        code(&prepare(
            d.path(),
            &["--orientation", "YC", "--N", "1", "--M", "2"],
            Some("lots")
        )),
        2
    );
    // missing state file
    assert_eq!(
        code(&rkforge(
            &["probe", "--state", "/nonexistent/state.txt", "--probe", "z-scan"],
            None
        )),
        2
    );
    // unknown gate
    assert_eq!(code(&rkforge(&["pulsecheck", "--gate", "Nope"], None)), 2);
    // help is not an error
    assert_eq!(code(&rkforge(&["--help"], None)), 0);
}

#[test]
fn errors_are_reported_as_json() {
    let o = rkforge(&["pulsecheck", "--gate", "Nope"], None);
    let v: Value = serde_json::from_str(String::from_utf8_lossy(&o.stderr).trim()).unwrap();
    assert_eq!(v["exit_code"], 2);
    assert!(v["message"].is_string());
}

#[test]
fn allow_large_lifts_the_guard() {
    let d = tempfile::tempdir().unwrap();
    let o = prepare(
        d.path(),
        &[
            "--orientation",
            "YC",
            "--N",
            "2",
            "--M",
            "4",
            "--verify",
            "--allow-large",
        ],
        None,
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!((report(d.path())["overlap"].as_f64().unwrap() - 1.0).abs() < 1e-9);
}

#[test]
fn probes_on_prepared_states() {
    let d = tempfile::tempdir().unwrap();
    assert_eq!(
        code(&prepare(
            d.path(),
            &["--orientation", "YC", "--N", "1", "--M", "4"],
            None
        )),
        0
    );
    let state = d.path().join("state.txt");
    let state = state.to_str().unwrap();
    let out = d.path().join("zscan.json");
    let o = rkforge(
        &[
            "probe",
            "--state",
            state,
            "--probe",
            "z-scan",
            "--out",
            out.to_str().unwrap(),
        ],
        None,
    );
    assert_eq!(code(&o), 0);
    let stdout: Value = serde_json::from_slice(&o.stdout).unwrap();
    let file: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(stdout, file);
    assert_eq!(
        code(&rkforge(&["probe", "--state", state, "--probe", "x-rotation"], None)),
        0
    );

    let t = tempfile::tempdir().unwrap();
    let torus = ["--orientation", "YC", "--N", "2", "--M", "2", "--closure", "torus"];
    assert_eq!(code(&prepare(t.path(), &torus, None)), 0);
    let ts = t.path().join("state.txt");
    let o = rkforge(
        &[
            "probe",
            "--state",
            ts.to_str().unwrap(),
            "--probe",
            "semion",
            "--seed",
            "3",
        ],
        None,
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn pulsecheck_modes() {
    let d = tempfile::tempdir().unwrap();
    let csv = d.path().join("f.csv");
    let o = rkforge(&["pulsecheck", "--gate", "U1c2t", "--out", csv.to_str().unwrap()], None);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("gate,step,input,fidelity,phase\n"));
    assert_eq!(
        code(&rkforge(
            &["pulsecheck", "--gate", "Xsweep", "--mode", "adiabatic"],
            None
        )),
        0
    );
    assert_eq!(
        code(&rkforge(
            &["pulsecheck", "--gate", "Hsweep", "--mode", "adiabatic"],
            None
        )),
        0
    );
}

#[test]
fn verification_failures_exit_1() {
    // a sweep far too fast to be adiabatic
    let o = rkforge(
        &["pulsecheck", "--gate", "Xsweep", "--mode", "adiabatic", "--T", "1"],
        None,
    );
    assert_eq!(code(&o), 1, "{}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_str(String::from_utf8_lossy(&o.stderr).trim()).unwrap();
    assert_eq!(v["exit_code"], 1);
}
