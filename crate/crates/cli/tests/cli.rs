use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_wigmaj"));
    c.env_remove("WIGMAJ_TOLERANCE_PROFILE");
    c
}

fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not JSON ({e}): {}\nstderr: {}",
            String::from_utf8_lossy(&out.stdout),
            String::from_utf8_lossy(&out.stderr)
        )
    })
}

fn fock(dir: &Path, n: usize) -> PathBuf {
    write(dir, &format!("fock{n}.json"), &format!(r#"{{"schema_version": 1, "type": "fock", "n": {n}}}"#))
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(str::to_string).collect();
    let rows = r.records().map(|rec| rec.unwrap().iter().map(str::to_string).collect()).collect();
    (header, rows)
}

fn column(header: &[String], rows: &[Vec<String>], name: &str) -> Vec<f64> {
    let i = header.iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name} in {header:?}"));
    rows.iter().map(|r| r[i].parse().unwrap()).collect()
}

#[test]
fn detgamma_orders_vacuum_over_thermal() {
    let d = tempfile::tempdir().unwrap();
    let a = write(d.path(), "a.json", r#"{"schema_version": 1, "type": "vacuum"}"#);
    let b = write(d.path(), "b.json", r#"{"schema_version": 1, "type": "thermal", "sigma": 1.3}"#);
    let out = bin().args(["majorize", "--proposal", "detgamma"]).arg(&a).arg(&b).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout_json(&out)["relation"], "FirstMajorizes");
}

#[test]
fn crossing_fock_states_exit_two() {
    let d = tempfile::tempdir().unwrap();
    let csv = d.path().join("margins.csv");
    let out = bin()
        .args(["majorize", "--proposal", "p1"])
        .arg(fock(d.path(), 0))
        .arg(fock(d.path(), 1))
        .arg("--margins")
        .arg(&csv)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(stdout_json(&out)["relation"], "Incomparable");
    let (h, rows) = read_csv(&csv);
    let m = column(&h, &rows, "margin");
    assert!(m.iter().any(|v| *v > 0.0) && m.iter().any(|v| *v < 0.0));
}

#[test]
fn malformed_input_exits_one() {
    let d = tempfile::tempdir().unwrap();
    let bad = write(d.path(), "bad.json", r#"{"schema_version": 1, "type": "fock", "n": "#);
    let out = bin().args(["majorize", "--proposal", "p1"]).arg(&bad).arg(fock(d.path(), 1)).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("schema"), "{err}");
    let unknown = write(d.path(), "unknown.json", r#"{"schema_version": 1, "type": "squid"}"#);
    let out = bin().args(["majorize", "--proposal", "p1"]).arg(&unknown).arg(fock(d.path(), 1)).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let future = write(d.path(), "future.json", r#"{"schema_version": 99, "type": "fock", "n": 1}"#);
    let out = bin().args(["majorize", "--proposal", "p1"]).arg(&future).arg(fock(d.path(), 1)).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("schema_version"));
}

#[test]
fn identity_channel_round_trip() {
    let d = tempfile::tempdir().unwrap();
    let ch = write(
        d.path(),
        "id.json",
        r#"{"schema_version": 1, "type": "raw", "X": [[1, 0], [0, 1]], "Y": [[0, 0], [0, 0]]}"#,
    );
    let csv = d.path().join("out.csv");
    let out = bin()
        .args(["channel", "apply", "--method", "convolve", "--channel"])
        .arg(&ch)
        .arg("--state")
        .arg(fock(d.path(), 1))
        .args(["--halfwidth", "4", "--points", "41", "--out"])
        .arg(&csv)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(stdout_json(&out)["method"], "convolve");
    let (h, rows) = read_csv(&csv);
    let (x, p, w) = (column(&h, &rows, "x"), column(&h, &rows, "p"), column(&h, &rows, "w"));
    assert_eq!(w.len(), 41 * 41);
    for i in 0..w.len() {
        let r2 = x[i] * x[i] + p[i] * p[i];
        let want = (2.0 * r2 - 1.0) * (-r2).exp() / PI;
        assert!((w[i] - want).abs() < 1e-14, "({}, {}): {} vs {want}", x[i], p[i], w[i]);
    }
}

#[test]
fn analytic_and_convolved_outputs_agree() {
    let d = tempfile::tempdir().unwrap();
    let ch = write(
        d.path(),
        "th.json",
        r#"{"schema_version": 1, "type": "thermal_noise", "params": {"s": 0.4, "c": 0.75}}"#,
    );
    let st = write(d.path(), "mix.json", r#"{"schema_version": 1, "type": "fock_mixture", "u": 0.9, "pair": "01"}"#);
    let out = bin()
        .args(["channel", "apply", "--method", "analytic", "--compare", "--channel"])
        .arg(&ch)
        .arg("--state")
        .arg(&st)
        .arg("--out")
        .arg(d.path().join("out.csv"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = stdout_json(&out);
    assert_eq!(v["grid"]["points"], 101);
    assert!(v["sup_norm_vs_convolve"].as_f64().unwrap() < 1e-6, "{v}");
}

#[test]
fn gaussian_input_uses_covariance_action() {
    let d = tempfile::tempdir().unwrap();
    let ch = write(d.path(), "amp.json", r#"{"schema_version": 1, "type": "amplification", "params": {"eta": 2.0}}"#);
    let st = write(d.path(), "v.json", r#"{"schema_version": 1, "type": "vacuum"}"#);
    let json = d.path().join("out.json");
    let out = bin()
        .args(["channel", "apply", "--method", "covariance", "--channel"])
        .arg(&ch)
        .arg("--state")
        .arg(&st)
        .arg("--out")
        .arg(&json)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v: Value = serde_json::from_str(&fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(v["type"], "gaussian");
    // eta gamma + (eta - 1) I = 2 I for the vacuum gamma = I / 2
    assert!((v["cov"][0][0].as_f64().unwrap() - 2.0).abs() < 1e-14);
    assert!((v["cov"][1][1].as_f64().unwrap() - 2.0).abs() < 1e-14);
    assert!(v["cov"][0][1].as_f64().unwrap().abs() < 1e-14);
}

#[test]
fn invalid_channel_is_rejected() {
    let d = tempfile::tempdir().unwrap();
    let ch = write(
        d.path(),
        "bad.json",
        r#"{"schema_version": 1, "type": "raw", "X": [[2, 0], [0, 2]], "Y": [[0, 0], [0, 0]]}"#,
    );
    let out = bin()
        .args(["channel", "apply", "--method", "convolve", "--channel"])
        .arg(&ch)
        .arg("--state")
        .arg(fock(d.path(), 0))
        .arg("--out")
        .arg(d.path().join("o.csv"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("completely positive"));
}

#[test]
fn analytic_method_rejects_other_families() {
    let d = tempfile::tempdir().unwrap();
    let ch = write(
        d.path(),
        "th.json",
        r#"{"schema_version": 1, "type": "thermal_noise", "params": {"s": 0.4, "c": 0.75}}"#,
    );
    let out = bin()
        .args(["channel", "apply", "--method", "analytic", "--channel"])
        .arg(&ch)
        .arg("--state")
        .arg(fock(d.path(), 3))
        .arg("--out")
        .arg(d.path().join("o.csv"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn negativity_and_renyi_commands() {
    let d = tempfile::tempdir().unwrap();
    let out = bin().arg("negativity").arg(fock(d.path(), 1)).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    let want = (4.0 * (-0.5f64).exp() - 1.0).ln();
    assert!((v["log_negativity"].as_f64().unwrap() - want).abs() < 1e-8);

    let vac = write(d.path(), "v.json", r#"{"schema_version": 1, "type": "vacuum"}"#);
    let out = bin().args(["renyi", "--alpha", "2"]).arg(&vac).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert!((v["entropy"].as_f64().unwrap() - (2.0 * PI).ln()).abs() < 1e-10);
    assert_eq!(v["alpha"], "2");

    let out = bin().args(["renyi", "--alpha", "1"]).arg(&vac).output().unwrap();
    assert_eq!(out.status.code(), Some(1));

    let scan = d.path().join("scan.csv");
    let out = bin().args(["negativity", "--fock-scan", "6", "--window", "3", "--out"]).arg(&scan).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let (h, rows) = read_csv(&scan);
    assert_eq!(column(&h, &rows, "n"), vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
    assert!(column(&h, &rows, "log_I0").windows(2).all(|w| w[1] > w[0]));
}

#[test]
fn renyi_channel_inequality_command() {
    let d = tempfile::tempdir().unwrap();
    let ch = write(
        d.path(),
        "th.json",
        r#"{"schema_version": 1, "type": "thermal_noise", "params": {"s": 0.5, "c": 0.75}}"#,
    );
    let st = write(d.path(), "mix.json", r#"{"schema_version": 1, "type": "fock_mixture", "u": 0.6, "pair": "01"}"#);
    let out = bin().args(["renyi", "--alpha", "4/3", "--channel"]).arg(&ch).arg(&st).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = stdout_json(&out);
    let (lhs, rhs, slack) = (v["lhs"].as_f64().unwrap(), v["rhs"].as_f64().unwrap(), v["slack"].as_f64().unwrap());
    assert!((slack - (lhs - rhs)).abs() < 1e-12);
    assert!(slack >= -1e-8);
}

#[test]
fn state_eval_points() {
    let d = tempfile::tempdir().unwrap();
    let out =
        bin().args(["state", "eval"]).arg(fock(d.path(), 1)).args(["--at", "0,0", "--at", "1,0"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    let vals: Vec<f64> = v["values"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
    assert!((vals[0] + 1.0 / PI).abs() < 1e-15);
    assert!((vals[1] - (-1.0f64).exp() / PI).abs() < 1e-15);
    assert!((v["integral"].as_f64().unwrap() - 1.0).abs() < 1e-8);
    let out = bin().args(["state", "eval"]).arg(fock(d.path(), 1)).args(["--at", "0,0,1"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn fig2r_has_four_non_crossing_curves() {
    let d = tempfile::tempdir().unwrap();
    let out = bin().args(["figure", "fig2R", "--out-dir"]).arg(d.path()).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let m: Value = serde_json::from_str(&fs::read_to_string(d.path().join("fig2R.manifest.json")).unwrap()).unwrap();
    assert_eq!(m["figure_id"], "fig2R");
    assert!(m["checks"].as_array().unwrap().iter().all(|c| c["passed"] == true), "{m}");
    let (h, rows) = read_csv(&d.path().join("fig2R.csv"));
    let u = column(&h, &rows, "u");
    let i = column(&h, &rows, "I_t");
    let t = column(&h, &rows, "t");
    let mut us = u.clone();
    us.dedup();
    assert_eq!(us, vec![1.0, 0.9, 0.75, 0.6]);
    // curves are stored on a common t grid, in order of decreasing u
    let per = t.len() / 4;
    for k in 0..per {
        for c in 0..3 {
            assert!(i[c * per + k] >= i[(c + 1) * per + k] - 1e-9, "t = {}", t[k]);
        }
    }
}

#[test]
fn fig3l_reports_a_sign_change() {
    let d = tempfile::tempdir().unwrap();
    let out = bin().args(["figure", "fig3L", "--out-dir"]).arg(d.path()).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let m: Value = serde_json::from_str(&fs::read_to_string(d.path().join("fig3L.manifest.json")).unwrap()).unwrap();
    let checks = m["checks"].as_array().unwrap();
    let sign = checks.iter().find(|c| c["name"] == "asymptotic_sign_change").unwrap();
    assert_eq!(sign["passed"], true);
    let (h, rows) = read_csv(&d.path().join("fig3L.csv"));
    let lam = column(&h, &rows, "lambda");
    let margin = column(&h, &rows, "margin");
    let top = lam.iter().copied().fold(0.0, f64::max);
    let asym: Vec<f64> = lam.iter().zip(&margin).filter(|(l, _)| **l == top).map(|(_, m)| *m).collect();
    assert!(asym.iter().any(|m| *m > 1e-6) && asym.iter().any(|m| *m < -1e-6));
}

#[test]
fn fig4r_slack_is_nonnegative() {
    let d = tempfile::tempdir().unwrap();
    let out = bin().args(["figure", "fig4R", "--out-dir"]).arg(d.path()).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let (h, rows) = read_csv(&d.path().join("fig4R.csv"));
    let slack = column(&h, &rows, "slack");
    assert_eq!(slack.len(), 2 * 3 * 19);
    assert!(slack.iter().all(|s| *s >= -1e-6));
    let m: Value = serde_json::from_str(&fs::read_to_string(d.path().join("fig4R.manifest.json")).unwrap()).unwrap();
    let params = m["parameters"].as_array().unwrap();
    let u = params.iter().find(|p| p["name"] == "u").unwrap();
    assert_eq!(u["paper_unstated"], true);
}

#[test]
fn figures_are_byte_identical_on_rerun() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for d in [&a, &b] {
        let out = bin().args(["figure", "fig1", "--out-dir"]).arg(d.path()).output().unwrap();
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    }
    for name in ["fig1.csv", "fig1.manifest.json"] {
        assert_eq!(fs::read(a.path().join(name)).unwrap(), fs::read(b.path().join(name)).unwrap(), "{name}");
    }
}

#[test]
fn tolerance_profile_comes_from_the_environment() {
    let d = tempfile::tempdir().unwrap();
    let out = bin()
        .env("WIGMAJ_TOLERANCE_PROFILE", "strict")
        .args(["figure", "fig1", "--out-dir"])
        .arg(d.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let m: Value = serde_json::from_str(&fs::read_to_string(d.path().join("fig1.manifest.json")).unwrap()).unwrap();
    assert_eq!(m["tolerance_profile"], "strict");
    assert_eq!(m["tolerance"]["collapse"].as_f64(), Some(1e-5));

    let out =
        bin().env("WIGMAJ_TOLERANCE_PROFILE", "sloppy").arg("negativity").arg(fock(d.path(), 1)).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn corpus_runner_finds_no_violations() {
    let d = tempfile::tempdir().unwrap();
    let corpus = write(
        d.path(),
        "corpus.json",
        r#"{
  "schema_version": 1,
  "states": {
    "f0": {"type": "fock", "n": 0},
    "f1": {"type": "fock", "n": 1},
    "m9": {"type": "fock_mixture", "u": 0.9, "pair": "01"},
    "m6": {"type": "fock_mixture", "u": 0.6, "pair": "01"}
  },
  "all_pairs": ["p1"],
  "comparisons": [{"first": "m9", "second": "m6", "proposals": ["p2", "quasi"]}],
  "channels": [{"state": "m9", "channel": {"type": "classical_mixing", "params": {"Y": [[0.2, 0], [0, 0.2]]}}}]
}"#,
    );
    let report = d.path().join("report.json");
    let out = bin().args(["corpus", "run", "--corpus"]).arg(&corpus).arg("--out").arg(&report).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v: Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(v["violations"].as_array().unwrap().len(), 0);
    // m9 over m6 and f1 over both mixtures by p1, m9 over m6 by p2 and quasi,
    // and the channel input over its output
    assert!(v["first_majorizes"].as_u64().unwrap() >= 6, "{v}");
}
