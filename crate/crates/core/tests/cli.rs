use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn wigner(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wigner"))
        .args(args)
        .env_remove("WIGNER_THREADS")
        .output()
        .unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

fn read_csv(p: &Path) -> Vec<[f64; 3]> {
    let text = std::fs::read_to_string(p).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("x,y,w"));
    lines
        .map(|l| {
            let v: Vec<f64> = l.split(',').map(|s| s.parse().unwrap()).collect();
            [v[0], v[1], v[2]]
        })
        .collect()
}

fn value_at(rows: &[[f64; 3]], x: f64, y: f64) -> f64 {
    rows.iter()
        .find(|r| (r[0] - x).abs() < 1e-12 && (r[1] - y).abs() < 1e-12)
        .expect("grid point")[2]
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn scenario(dir: &Path, body: &str) -> PathBuf {
    let p = dir.join("scenario.json");
    std::fs::write(&p, body).unwrap();
    p
}

const INCOHERENT: &str = r#"{"drive": {"mode": "incoherent", "gamma": 1, "pump": 2},
                             "detector": {"Gamma": 100, "dim": 6}}"#;
const COHERENT: &str = r#"{"drive": {"mode": "coherent", "gamma": 1, "omega": 1},
                           "detector": {"Gamma": 10, "dim": 10}}"#;
const SMALL_GRID: &str = "-3:3:61,-3:3:61";

#[test]
fn state_writes_matrix_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("rho.json");
    let o = wigner(&["state", "fock:2", "--out", s(&out)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let m = read_json(&out);
    assert_eq!(m["dim"], 3);
    assert_eq!(m["re"][2][2], 1.0);
    let manifest = read_json(&dir.path().join("rho.manifest.json"));
    assert_eq!(manifest["command"], "state");
    assert_eq!(manifest["parameters"]["spec"], "fock:2");
    assert_eq!(manifest["version"], env!("CARGO_PKG_VERSION"));
}

#[test]
fn series_and_closed_form_agree() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("series.csv");
    let b = dir.path().join("closed.csv");
    for (method, out) in [("series", &a), ("closed", &b)] {
        let o = wigner(&[
            "wigner",
            "--state",
            "fock:2",
            "--grid",
            SMALL_GRID,
            "--method",
            method,
            "--out",
            s(out),
        ]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    }
    let (a, b) = (read_csv(&a), read_csv(&b));
    assert_eq!(a.len(), 61 * 61);
    let worst = a.iter().zip(&b).map(|(p, q)| (p[2] - q[2]).abs()).fold(0.0, f64::max);
    assert!(worst < 1e-10, "{worst}");
    let metrics = read_json(&dir.path().join("series.metrics.json"));
    assert!((metrics["integral"].as_f64().unwrap() - 1.0).abs() < 1e-5);
    assert!(dir.path().join("closed.manifest.json").exists());
}

#[test]
fn matrix_input_and_json_field_output() {
    let dir = tempfile::tempdir().unwrap();
    let rho = dir.path().join("rho.json");
    assert_eq!(code(&wigner(&["state", "tls-coh:1,0.5,0", "--out", s(&rho)])), 0);
    let out = dir.path().join("field.json");
    let o = wigner(&[
        "wigner",
        "--input",
        s(&rho),
        "--grid",
        "-2:2:5,-1:1:3",
        "--out",
        s(&out),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let f = read_json(&out);
    assert_eq!(f["values"].as_array().unwrap().len(), 3);
    assert_eq!(f["values"][0].as_array().unwrap().len(), 5);

    let closed = dir.path().join("closed.json");
    let o = wigner(&[
        "wigner",
        "--state",
        "tls-coh:1,0.5,0",
        "--grid",
        "-2:2:5,-1:1:3",
        "--method",
        "closed",
        "--out",
        s(&closed),
    ]);
    assert_eq!(code(&o), 0);
    let g = read_json(&closed);
    for (r1, r2) in f["values"]
        .as_array()
        .unwrap()
        .iter()
        .zip(g["values"].as_array().unwrap())
    {
        for (x, y) in r1.as_array().unwrap().iter().zip(r2.as_array().unwrap()) {
            assert!((x.as_f64().unwrap() - y.as_f64().unwrap()).abs() < 1e-12);
        }
    }
}

#[test]
fn usage_and_validation_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x.csv");
    assert_eq!(code(&wigner(&["state", "banana:1", "--out", s(&out)])), 2);
    assert_eq!(
        code(&wigner(&[
            "wigner",
            "--state",
            "fock:1",
            "--grid",
            "1:0:3,0:1:3",
            "--out",
            s(&out)
        ])),
        2
    );
    assert_eq!(code(&wigner(&["wigner", "--state", "fock:1"])), 2);
    assert_eq!(code(&wigner(&["nonsense"])), 2);
    assert_eq!(
        code(&wigner(&["state", "coherent:3,0", "--dim", "5", "--out", s(&out)])),
        3
    );
    let bad = dir.path().join("bad.json");
    std::fs::write(
        &bad,
        r#"{"dim": 2, "re": [[0.6, 0], [0, 0.6]], "im": [[0, 0], [0, 0]]}"#,
    )
    .unwrap();
    let o = wigner(&["wigner", "--input", s(&bad), "--out", s(&out)]);
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains("trace"));
    let o = wigner(&[
        "wigner",
        "--state",
        "thermal:1",
        "--method",
        "closed",
        "--input",
        s(&bad),
        "--out",
        s(&out),
    ]);
    assert_eq!(code(&o), 2);
}

#[test]
fn cascade_mixture_recovers_negative_centre() {
    let dir = tempfile::tempdir().unwrap();
    let sc = scenario(dir.path(), INCOHERENT);
    let out = dir.path().join("run");
    let o = wigner(&[
        "cascade",
        "--scenario",
        s(&sc),
        "--reconstruct",
        "mixture",
        "--grid",
        SMALL_GRID,
        "--out-dir",
        s(&out),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    for f in [
        "observed_state.json",
        "observed_wigner.csv",
        "emitter_wigner.csv",
        "reconstruction.json",
        "effective_wigner.csv",
        "metrics.json",
        "manifest.json",
    ] {
        assert!(out.join(f).exists(), "{f}");
    }
    let observed = read_csv(&out.join("observed_wigner.csv"));
    let effective = read_csv(&out.join("effective_wigner.csv"));
    assert!(value_at(&observed, 0.0, 0.0) > 0.0);
    assert!(value_at(&effective, 0.0, 0.0) < 0.0);
    let m = read_json(&out.join("metrics.json"));
    assert!((m["n_sigma"].as_f64().unwrap() - 2.0 / 3.0).abs() < 1e-12);
    assert!(m["effective_vs_emitter"]["l_inf"].as_f64().unwrap() < 1e-3);
    let r = read_json(&out.join("reconstruction.json"));
    assert_eq!(r["model"], "mixture");
    assert_eq!(r["weights"]["kind"], "mixture");
}

#[test]
fn cascade_superposition_under_coherent_drive() {
    let dir = tempfile::tempdir().unwrap();
    let sc = scenario(dir.path(), COHERENT);
    let out = dir.path().join("run");
    let o = wigner(&[
        "cascade",
        "--scenario",
        s(&sc),
        "--reconstruct",
        "superposition",
        "--seed",
        "3",
        "--grid",
        SMALL_GRID,
        "--out-dir",
        s(&out),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let m = read_json(&out.join("metrics.json"));
    assert!(m["effective"]["min"].as_f64().unwrap() < 0.0);
    assert_eq!(read_json(&out.join("manifest.json"))["seed"], 3);
}

#[test]
fn infeasible_target_exits_4_with_diagnostic() {
    let dir = tempfile::tempdir().unwrap();
    let sc = scenario(dir.path(), INCOHERENT);
    let out = dir.path().join("run");
    let o = wigner(&[
        "cascade",
        "--scenario",
        s(&sc),
        "--reconstruct",
        "mixture",
        "--n-target",
        "0.001",
        "--grid",
        SMALL_GRID,
        "--out-dir",
        s(&out),
    ]);
    assert_eq!(code(&o), 4);
    let r = read_json(&out.join("reconstruction.json"));
    assert!(r["kind"].as_str().unwrap().starts_with("Infeasible"), "{r}");
    assert!(out.join("metrics.json").exists());
    assert!(!out.join("effective_wigner.csv").exists());
}

#[test]
fn undriven_emitter_leaves_vacuum() {
    let dir = tempfile::tempdir().unwrap();
    let sc = scenario(
        dir.path(),
        r#"{"drive": {"mode": "incoherent", "gamma": 1, "pump": 0},
                                     "detector": {"Gamma": 10, "dim": 4}}"#,
    );
    let out = dir.path().join("run");
    let o = wigner(&[
        "cascade",
        "--scenario",
        s(&sc),
        "--grid",
        SMALL_GRID,
        "--out-dir",
        s(&out),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let vac = std::f64::consts::FRAC_2_PI;
    for name in ["observed_wigner.csv", "emitter_wigner.csv"] {
        for [x, y, w] in read_csv(&out.join(name)) {
            assert!((w - vac * (-2.0 * (x * x + y * y)).exp()).abs() < 1e-12, "{name}");
        }
    }
    let o = wigner(&[
        "cascade",
        "--scenario",
        s(&sc),
        "--reconstruct",
        "mixture",
        "--n-target",
        "0.5",
        "--grid",
        SMALL_GRID,
        "--out-dir",
        s(&out),
    ]);
    assert_eq!(code(&o), 4);
}

fn data_files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| !p.file_name().unwrap().to_str().unwrap().contains("manifest"))
        .map(|p| {
            (
                p.file_name().unwrap().to_string_lossy().into_owned(),
                std::fs::read(&p).unwrap(),
            )
        })
        .collect();
    v.sort();
    v
}

#[test]
fn repeated_runs_are_bitwise_identical() {
    let dir = tempfile::tempdir().unwrap();
    let sc = scenario(dir.path(), COHERENT);
    let run = |name: &str, threads: Option<&str>| {
        let out = dir.path().join(name);
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_wigner"));
        cmd.args([
            "cascade",
            "--scenario",
            s(&sc),
            "--reconstruct",
            "superposition",
            "--seed",
            "11",
            "--grid",
            SMALL_GRID,
            "--out-dir",
            s(&out),
        ]);
        match threads {
            Some(t) => cmd.env("WIGNER_THREADS", t),
            None => cmd.env_remove("WIGNER_THREADS"),
        };
        assert!(cmd.status().unwrap().success());
        data_files(&out)
    };
    let a = run("a", None);
    assert_eq!(a, run("b", None));
    assert_eq!(a, run("c", Some("1")));
    assert_eq!(a, run("d", Some("3")));
}

#[test]
fn thread_settings_are_validated() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let o = Command::new(env!("CARGO_BIN_EXE_wigner"))
        .args(["state", "fock:1", "--out", s(&out)])
        .env("WIGNER_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("WIGNER_THREADS"));
    assert_eq!(
        code(&wigner(&["--threads", "2", "state", "fock:1", "--out", s(&out)])),
        0
    );
}

#[test]
fn config_file_supplies_defaults_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("wigner.toml");
    let from_cfg = dir.path().join("cfg.json");
    std::fs::write(
        &cfg,
        format!("threads = 1\n[state]\ndim = 7\nout = \"{}\"\n", s(&from_cfg)),
    )
    .unwrap();
    assert_eq!(code(&wigner(&["--config", s(&cfg), "state", "fock:1"])), 0);
    assert_eq!(read_json(&from_cfg)["dim"], 7);

    let from_flag = dir.path().join("flag.json");
    assert_eq!(
        code(&wigner(&[
            "--config",
            s(&cfg),
            "state",
            "fock:1",
            "--dim",
            "3",
            "--out",
            s(&from_flag)
        ])),
        0
    );
    assert_eq!(read_json(&from_flag)["dim"], 3);

    std::fs::write(&cfg, "[state]\ndimension = 7\n").unwrap();
    assert_eq!(
        code(&wigner(&[
            "--config",
            s(&cfg),
            "state",
            "fock:1",
            "--out",
            s(&from_flag)
        ])),
        2
    );
}

#[test]
fn quick_verification_passes() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.json");
    let o = wigner(&["verify", "quick", "--report", s(&report)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let r = read_json(&report);
    assert_eq!(r["level"], "quick");
    assert!(r["checks"].as_array().unwrap().iter().all(|c| c["passed"] == true));
}

#[test]
fn injected_fault_is_named() {
    let o = wigner(&["verify", "quick", "--inject-fault", "2,1"]);
    assert_eq!(code(&o), 1);
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(
        stdout.lines().any(|l| l.starts_with("FAIL coefficient W_2^1")),
        "{stdout}"
    );
    assert!(String::from_utf8_lossy(&o.stderr).contains("W_2^1"));
}
