use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn blowuplab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_blowuplab"))
        .args(args)
        .env_remove("BLOWUPLAB_PARALLELISM")
        .output()
        .expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn short_run_config(dir: &Path) -> std::path::PathBuf {
    let path = dir.join("run.cfg");
    std::fs::write(
        &path,
        "# short coarse run\nproblem.eps = 1.0\ngrid.dr = 0.02\ngrid.t_max = 30\n",
    )
    .unwrap();
    path
}

#[test]
fn exponents_admissible_case() {
    let out = blowuplab(&["exponents", "--n", "3", "--mu", "0.5", "--p", "1.8"]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert_eq!(v["admissible"], true);
    assert!((v["lifespan_exp"].as_f64().unwrap() + 2.25).abs() < 1e-12);
    for key in [
        "n",
        "mu",
        "beta",
        "p",
        "fujita",
        "strauss_shifted",
        "gamma_value",
        "mu0",
        "regime",
    ] {
        assert!(v.get(key).is_some(), "{key}");
    }
}

#[test]
fn exponents_negative_answer_is_success() {
    let out = blowuplab(&["exponents", "--n", "2", "--mu", "1.0", "--p", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert_eq!(v["admissible"], false);
    assert!(v["lifespan_exp"].is_null());
}

#[test]
fn exponents_domain_error_exits_one() {
    let out = blowuplab(&["exponents", "--n", "3", "--mu", "0.5", "--p", "0.5"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("domain error"), "{}", stderr(&out));
}

#[test]
fn usage_errors_exit_one_and_help_exits_zero() {
    assert_eq!(blowuplab(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(blowuplab(&["exponents", "--n", "3"]).status.code(), Some(1));
    assert_eq!(blowuplab(&["--help"]).status.code(), Some(0));
}

#[test]
fn missing_config_names_the_path() {
    let out = blowuplab(&["simulate", "--config", "/no/such/run.cfg", "--out", "/tmp/unused.csv"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("/no/such/run.cfg"), "{}", stderr(&out));
}

#[test]
fn unknown_config_key_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "problem.n = 3\ngrid.dt = 0.01\n").unwrap();
    let out = blowuplab(&["simulate", "--config", cfg.to_str().unwrap(), "--out", "x.csv"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("grid.dt"), "{}", stderr(&out));
}

#[test]
fn simulate_writes_trace_and_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = short_run_config(dir.path());
    let csv_path = dir.path().join("out/trace.csv");
    let out = blowuplab(&[
        "simulate",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        csv_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));

    let csv = std::fs::read_to_string(&csv_path).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("t,F0,F0p,F1,sup,supp_r,src_int"));
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    assert!(rows.len() > 100);
    assert!(rows.iter().all(|r| r.len() == 7));
    assert!(!csv.contains('\r'));

    let side: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("out/trace.json")).unwrap()).unwrap();
    let t = side["blowup"]["time_estimate"].as_f64().unwrap();
    assert!(t > rows.last().unwrap()[0] - 1.0 && t < 30.0);
    let config = side["config"].as_object().unwrap();
    // defaults are echoed alongside the overrides
    assert_eq!(config["problem.eps"], "1.0");
    assert_eq!(config["problem.n"], "3");
    assert_eq!(config["grid.dr"], "0.02");
    assert_eq!(config.len(), 25);
}

#[test]
fn simulate_rerun_from_sidecar_is_bit_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = short_run_config(dir.path());
    let first = dir.path().join("a/trace.csv");
    let second = dir.path().join("b/trace.csv");
    assert!(blowuplab(&[
        "simulate",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        first.to_str().unwrap()
    ])
    .status
    .success());
    let sidecar = dir.path().join("a/trace.json");
    assert!(blowuplab(&[
        "simulate",
        "--config",
        sidecar.to_str().unwrap(),
        "--out",
        second.to_str().unwrap()
    ])
    .status
    .success());
    assert_eq!(std::fs::read(&first).unwrap(), std::fs::read(&second).unwrap());
    assert_eq!(
        std::fs::read(&sidecar).unwrap(),
        std::fs::read(dir.path().join("b/trace.json")).unwrap()
    );
}

#[test]
fn ode_kato_reports_the_bound() {
    let out = blowuplab(&["ode", "--mode", "kato", "--p", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    // F'' = F^3 from F = F' = 1: T = ∫_0^1 √2/√(1+s⁴) ds ≈ 1.3110
    let t = v["blowup_time"].as_f64().unwrap();
    assert!((t - 1.3110).abs() < 1e-3, "{t}");
    assert_eq!(v["bound"].as_f64().unwrap(), 2.0);
    assert_eq!(v["satisfied"], true);
    assert_eq!(v["inputs"]["params"]["p"], 3.0);
}

#[test]
fn ode_separable_closed_form() {
    // F' = F²: T = T1 + 1/F(T1)
    let out = blowuplab(&[
        "ode",
        "--mode",
        "separable",
        "--p",
        "3",
        "--f-t1",
        "0.5",
        "--t1",
        "1",
        "--bound",
        "3.5",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert!((v["blowup_time"].as_f64().unwrap() - 3.0).abs() < 1e-12);
    assert_eq!(v["satisfied"], true);
}

#[test]
fn ode_numerical_failure_exits_two() {
    let out = blowuplab(&[
        "ode",
        "--mode",
        "separable",
        "--p",
        "3",
        "--k",
        "2",
        "--c",
        "0.01",
        "--f-t1",
        "0.1",
    ]);
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));
    assert!(stderr(&out).contains("no blow-up"));
}

#[test]
fn ode_f0_constant_source() {
    let out = blowuplab(&[
        "ode",
        "--mode",
        "f0",
        "--source-const",
        "1",
        "--steps",
        "11",
        "--dt",
        "0.1",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert_eq!(v["trace"]["f0p"].as_array().unwrap().len(), 11);
    assert_eq!(v["satisfied"], true);
    assert!(blowuplab(&["ode", "--mode", "f0"]).status.code() == Some(1));
}

#[test]
fn testfuncs_dump_csv() {
    let out = blowuplab(&["testfuncs", "dump", "--n", "1", "--r-max", "2", "--points", "5"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("r,phi1"));
    for line in lines {
        let (r, v) = line.split_once(',').unwrap();
        let (r, v): (f64, f64) = (r.parse().unwrap(), v.parse().unwrap());
        // n = 1: φ₁(r) = 2 cosh r
        assert!((v - 2.0 * r.cosh()).abs() < 1e-10 * v, "{r}: {v}");
    }
}

#[test]
fn sweep_rejects_a_short_eps_range_before_running() {
    let dir = tempfile::tempdir().unwrap();
    let out = blowuplab(&[
        "sweep",
        "--eps-min",
        "0.4",
        "--eps-max",
        "0.8",
        "--points",
        "4",
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("domain error"), "{}", stderr(&out));
}

#[test]
fn sweep_and_report_round_trip() {
    // ODE-limit problem: cheap, and every eps blows up
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sweep.cfg");
    std::fs::write(
        &cfg,
        "problem.data = flat\n\
         grid.laplacian = false\ngrid.dr = 0.05\ngrid.t_max = 200\n",
    )
    .unwrap();
    let out_dir = dir.path().join("sweep");
    let out = blowuplab(&[
        "sweep",
        "--config",
        cfg.to_str().unwrap(),
        "--eps-min",
        "0.1",
        "--eps-max",
        "1",
        "--points",
        "4",
        "--out-dir",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let json: Value = serde_json::from_str(&std::fs::read_to_string(out_dir.join("sweep.json")).unwrap()).unwrap();
    assert_eq!(json["T_values"].as_array().unwrap().len(), 4);
    assert_eq!(json["config"]["sweep.points"], "4");
    assert_eq!(json["config"]["problem.data"], "flat");
    let csv = std::fs::read_to_string(out_dir.join("sweep.csv")).unwrap();
    assert!(csv.contains("# sweep.eps_min = 0.1"));

    let regen = dir.path().join("regen");
    let out = blowuplab(&[
        "report",
        "--input",
        out_dir.join("sweep.json").to_str().unwrap(),
        "--out-dir",
        regen.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    for f in ["sweep.json", "sweep.csv", "sweep_plot.dat"] {
        assert_eq!(
            std::fs::read(out_dir.join(f)).unwrap(),
            std::fs::read(regen.join(f)).unwrap(),
            "{f}"
        );
    }

    let missing = blowuplab(&["report", "--input", "/no/such/sweep.json"]);
    assert_eq!(missing.status.code(), Some(1));
    assert!(stderr(&missing).contains("/no/such/sweep.json"));
}
