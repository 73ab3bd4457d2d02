use serde_json::Value;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn nakao(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nakao"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn region_reports() {
    let out = nakao(&["region", "--p", "2", "--q", "2", "--n", "1"]);
    assert!(out.status.success());
    let v = stdout_json(&out);
    assert_eq!(v["blowup_condition_holds"], true);
    assert_eq!(v["lifespan_exponent"], 3.0);
    assert_eq!(v["glassey"], "infinity");

    let v = stdout_json(&nakao(&["region", "--p", "2", "--q", "2", "--n", "2"]));
    assert_eq!(v["blowup_condition_holds"], false);
    assert!(v["lifespan_exponent"].is_null());
}

#[test]
fn region_rejects_small_p() {
    let out = nakao(&["region", "--p", "0.5", "--q", "2", "--n", "2"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("p must exceed 1"));
}

#[test]
fn region_margin_flag() {
    // pq = 2.9 < 3 but not by 0.2
    let v = stdout_json(&nakao(&["region", "--p", "1.45", "--q", "2", "--n", "2"]));
    assert_eq!(v["blowup_condition_holds"], true);
    let v = stdout_json(&nakao(&[
        "region", "--p", "1.45", "--q", "2", "--n", "2", "--margin", "0.2",
    ]));
    assert_eq!(v["blowup_condition_holds"], false);
}

#[test]
fn iterate_writes_sequence_and_constants() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let out = nakao(&[
        "iterate", "--p", "2", "--q", "2", "--n", "1", "--eps", "0.001", "--j-max", "9", "--out", d,
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );

    let csv = fs::read_to_string(dir.path().join("iterate.csv")).unwrap();
    assert!(csv.starts_with("# nakao "));
    let mut lines = csv.lines().filter(|l| !l.starts_with('#'));
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(
        &header[..8],
        ["j", "alpha_j", "a_j", "beta_j", "b_j", "logD_j", "logQ_j", "L_j"]
    );
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 9);
    for (k, row) in rows.iter().enumerate() {
        assert_eq!(row[0], (k + 1) as f64);
        for c in 0..4 {
            let (rec, cf) = (row[1 + c], row[8 + c]);
            assert!(
                (rec - cf).abs() <= 1e-10 * rec.abs().max(1.0),
                "row {k} col {c}: {rec} vs {cf}"
            );
        }
    }

    let v: Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("constants.json")).unwrap())
            .unwrap();
    assert!(v["constants"]["j0"].is_i64() && v["constants"]["j1"].is_i64());
    assert!(v["constants"]["l"].as_f64().unwrap().is_finite());
    assert!(v["predicted_blowup_time"].as_f64().unwrap() > 0.0);
    assert!(v["note"].is_null());
    assert_eq!(v["config"]["params"]["eps"], 0.001);
    assert!(v["version"].as_str().unwrap().starts_with("nakao "));
}

#[test]
fn iterate_omits_prediction_above_eps0() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let out = nakao(&[
        "iterate", "--p", "2", "--q", "2", "--n", "1", "--eps", "1000", "--out", d,
    ]);
    assert!(out.status.success());
    let v = stdout_json(&out);
    assert!(v["predicted_blowup_time"].is_null());
    assert!(v["note"]
        .as_str()
        .unwrap()
        .contains("exceeds the smallness threshold"));
}

#[test]
fn iterate_refuses_outside_region() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let out = nakao(&[
        "iterate", "--p", "2", "--q", "2", "--n", "2", "--eps", "0.1", "--out", d,
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn phi_and_verify_testfn() {
    let v = stdout_json(&nakao(&["phi", "--n", "3", "--r", "0,2"]));
    // Φ(0) = |S²| = 4π and Φ(r) = 4π sinh(r)/r
    let pi4 = 4.0 * std::f64::consts::PI;
    assert!((v[0]["phi"].as_f64().unwrap() - pi4).abs() < 1e-10);
    assert!((v[1]["phi"].as_f64().unwrap() - pi4 * 2f64.sinh() / 2.0).abs() < 1e-9);

    let v = stdout_json(&nakao(&["verify-testfn", "--n", "1"]));
    assert!(v["max_eigen_residual"].as_f64().unwrap() < 1e-4);
    assert!(v["c1"].as_f64().unwrap() > 0.0);
    assert!(v["asymptotic_flatness"].is_object());
}

const SIM: &str = r#"{"simulation": {"params": {"p": 2, "q": 2, "n": 1, "R": 1, "eps": 0.5}, "nx": 512, "t_max": 20MODE}}"#;

#[test]
fn simulate_full_mode_reports_blowup() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.json", &SIM.replace("MODE", ""));
    let out_dir = dir.path().join("out");
    let out = nakao(&[
        "simulate",
        "--config",
        &cfg,
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let v: Value =
        serde_json::from_str(&fs::read_to_string(out_dir.join("verdict.json")).unwrap()).unwrap();
    assert_eq!(v["blown_up"], true);
    assert!(v["T_num"].as_f64().unwrap() > 0.0);
    assert!(["sup_ut", "sup_vt"].contains(&v["trigger"].as_str().unwrap()));
    assert_eq!(v["threshold"], 1e8);
    assert_eq!(v["threshold_robust"], 1e10);
    // defaults are written out
    assert_eq!(v["config"]["simulation"]["cfl"], 0.4);

    let trace = fs::read_to_string(out_dir.join("trace.csv")).unwrap();
    assert!(trace
        .lines()
        .any(|l| l == "t,F1,F2,sup_ut,sup_vt,support_radius"));
}

#[test]
fn simulate_linear_free_reports_energy_drift() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "c.json",
        &SIM.replace("MODE", r#", "mode": "linear_free""#),
    );
    let out = nakao(&[
        "simulate",
        "--config",
        &cfg,
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let v = stdout_json(&out);
    assert_eq!(v["blown_up"], false);
    assert!(v["energy_drift"]["u"].as_f64().unwrap() < 1e-3);
    assert!(v["energy_drift"]["v"].as_f64().unwrap() < 1e-3);
}

#[test]
fn malformed_config_names_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "c.json",
        &SIM.replace("MODE", r#", "cfll": 0.3"#),
    );
    let out = nakao(&[
        "simulate",
        "--config",
        &cfg,
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("cfll"));
}

#[test]
fn cfl_violation_is_numerical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "c.json",
        &SIM.replace("MODE", r#", "cfl": 0.9"#),
    );
    let out = nakao(&[
        "simulate",
        "--config",
        &cfg,
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3));
}

const SWEEP: &str = r#"{"sweep": {
  "base": {"params": {"p": 2, "q": 2, "n": 1, "R": 1, "eps": 1}, "nx": 512, "t_max": T_MAX},
  "eps_values": {"count": 5, "min": EPS_MIN, "max": EPS_MAX}
}}"#;

fn sweep_config(dir: &Path, t_max: &str, min: &str, max: &str) -> String {
    let text = SWEEP
        .replace("T_MAX", t_max)
        .replace("EPS_MIN", min)
        .replace("EPS_MAX", max);
    write(dir, "sweep.json", &text)
}

#[test]
fn sweep_is_deterministic_and_fits() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = sweep_config(dir.path(), "8", "0.5", "1.0");
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for d in [&a, &b] {
        let out = nakao(&["sweep", "--config", &cfg, "--out", d.to_str().unwrap()]);
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
    for f in ["sweep.csv", "plot.dat"] {
        assert_eq!(
            fs::read(a.join(f)).unwrap(),
            fs::read(b.join(f)).unwrap(),
            "{f}"
        );
    }
    let csv = fs::read_to_string(a.join("sweep.csv")).unwrap();
    assert!(csv
        .lines()
        .any(|l| l == "eps,T_num,blown_up,robust,censored"));
    let v: Value = serde_json::from_str(&fs::read_to_string(a.join("fit.json")).unwrap()).unwrap();
    assert_eq!(v["theoretical_exponent"], 3.0);
    assert_eq!(v["points_used"], 5);
    assert!(v["slope"].as_f64().unwrap() > 0.0);
    assert!(v["consistent"].is_boolean());
    assert_eq!(v["config"]["sweep"]["repeats_per_eps"], 2);
}

#[test]
fn all_censored_sweep_exits_zero_with_reason() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = sweep_config(dir.path(), "2", "0.01", "0.05");
    let out = nakao(&[
        "sweep",
        "--config",
        &cfg,
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let v = stdout_json(&out);
    assert!(v["consistent"].is_null());
    assert!(v["slope"].is_null());
    assert!(v["reason"].as_str().unwrap().contains("0 of 5"));
}
