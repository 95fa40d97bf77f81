use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use fowler_cli::output::sha256_hex;
use fowler_cli::RunManifest;
use serde_json::Value;
use tempfile::TempDir;

fn fowler(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fowler"))
        .args(args)
        .env(fowler_cli::OUTPUT_DIR_ENV, dir)
        .env("RUST_LOG", "error")
        .output()
        .expect("binary runs")
}

fn manifest(out: &Output) -> RunManifest {
    assert!(
        out.status.success(),
        "status {:?}, stderr {}",
        out.status,
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("manifest on stdout")
}

fn error_json(out: &Output) -> Value {
    let text = String::from_utf8_lossy(&out.stderr);
    let last = text.lines().last().expect("error line");
    serde_json::from_str(last).expect("error is JSON")
}

fn check_digests(dir: &Path, m: &RunManifest) {
    assert!(!m.outputs.is_empty());
    for f in &m.outputs {
        let bytes = fs::read(dir.join(&f.path)).unwrap();
        assert_eq!(bytes.len() as u64, f.bytes, "{}", f.path);
        assert_eq!(sha256_hex(&bytes), f.sha256, "{}", f.path);
    }
}

fn write_json(dir: &Path, name: &str, v: &Value) -> String {
    let p = dir.join(name);
    fs::write(&p, v.to_string()).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn symbol_at_zero_is_zero() {
    let dir = TempDir::new().unwrap();
    let m = manifest(&fowler(dir.path(), &["symbol", "--xi", "0"]));
    check_digests(dir.path(), &m);
    assert_eq!(m.constants.name, "fourier-2pi");
    let csv = fs::read_to_string(dir.path().join("symbol.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "xi,re_psi,im_psi,oracle_re,oracle_im,abs_diff");
    let row: Vec<f64> = lines.next().unwrap().split(',').map(|v| v.parse().unwrap()).collect();
    assert_eq!(row, vec![0.0; 6]);
}

#[test]
fn symbol_matches_oracle_on_negative_frequencies() {
    let dir = TempDir::new().unwrap();
    let m = manifest(&fowler(
        dir.path(),
        &["symbol", "--xi", "-3,-0.25,0.25,3", "--viscosity", "0.1"],
    ));
    assert!(m.results["max_abs_diff"].as_f64().unwrap() < 1e-8);
}

#[test]
fn outputs_are_deterministic_and_replayable() {
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    let cfg = serde_json::json!({
        "grid": {"length": 30.0, "points": 256},
        "t_end": 0.05,
        "dt": 1e-3,
        "snapshot_stride": 10,
    });
    let path = write_json(a.path(), "cfg.json", &cfg);
    let first = manifest(&fowler(
        a.path(),
        &["simulate", "--scheme", "spectral", "--config", &path],
    ));
    check_digests(a.path(), &first);
    assert_eq!(first.outputs.len(), 7);

    let echoed = a.path().join("simulate_spectral.manifest.json");
    let second = manifest(&fowler(
        b.path(),
        &["simulate", "--scheme", "spectral", "--config", echoed.to_str().unwrap()],
    ));
    assert_eq!(first.outputs, second.outputs);
    assert_eq!(first.config, second.config);
}

#[test]
fn manifest_from_other_subcommand_rejected() {
    let dir = TempDir::new().unwrap();
    manifest(&fowler(dir.path(), &["symbol", "--xi", "1"]));
    let path = dir.path().join("symbol.manifest.json");
    let out = fowler(dir.path(), &["kernel", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_json(&out)["error"]["key"], "subcommand");
}

#[test]
fn config_errors_exit_two_and_name_the_key() {
    let dir = TempDir::new().unwrap();
    let bad = write_json(dir.path(), "bad.json", &serde_json::json!({"modle": "burgers"}));
    let out = fowler(dir.path(), &["simulate", "--scheme", "fd", "--config", &bad]);
    assert_eq!(out.status.code(), Some(2));
    let e = error_json(&out);
    assert_eq!(e["error"]["kind"], "config");
    assert_eq!(e["error"]["key"], "modle");

    let neg = write_json(dir.path(), "neg.json", &serde_json::json!({"viscosity": -1.0}));
    let out = fowler(dir.path(), &["simulate", "--scheme", "fd", "--config", &neg]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_json(&out)["error"]["key"], "viscosity");

    let out = fowler(dir.path(), &["compare", "--preset", "ripple"]);
    assert_eq!(out.status.code(), Some(2));
    let msg = error_json(&out)["error"]["message"].as_str().unwrap().to_string();
    assert!(msg.contains("dune") && msg.contains("traveling-wave"), "{msg}");

    let out = fowler(dir.path(), &["frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_json(&out)["error"]["kind"], "config");

    let out = fowler(
        dir.path(),
        &[
            "simulate",
            "--scheme",
            "fd",
            "--model",
            "fowler",
            "--preset",
            "traveling-wave",
        ],
    );
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_json(&out)["error"]["key"], "boundary");
}

#[test]
fn blow_up_exits_three_and_keeps_last_state() {
    let dir = TempDir::new().unwrap();
    let cfg = write_json(
        dir.path(),
        "cfg.json",
        &serde_json::json!({"model": "burgers", "points": 101, "dt": 10.0, "t_end": 1000.0, "snapshot_interval": 1000.0}),
    );
    let out = fowler(dir.path(), &["simulate", "--scheme", "fd", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(3));
    let e = error_json(&out);
    assert_eq!(e["error"]["kind"], "numerical");
    let path = e["error"]["manifest"].as_str().unwrap();
    let m: RunManifest = serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap();
    assert_eq!(m.status, "numerical-failure");
    check_digests(dir.path(), &m);
    let times = m.results["snapshot_times"].as_array().unwrap();
    assert!(times.len() >= 2, "last finite state stored: {times:?}");
}

#[test]
fn traveling_wave_error_in_manifest() {
    let dir = TempDir::new().unwrap();
    let m = manifest(&fowler(
        dir.path(),
        &[
            "simulate",
            "--scheme",
            "fd",
            "--model",
            "burgers",
            "--preset",
            "traveling-wave",
        ],
    ));
    let err = m.results["traveling_wave_error"].as_f64().unwrap();
    assert!(err > 0.0 && err <= 5e-4, "{err}");
    check_digests(dir.path(), &m);
}

#[test]
fn compare_shows_erosion_only_for_fowler() {
    let dir = TempDir::new().unwrap();
    let cfg = write_json(
        dir.path(),
        "cfg.json",
        &serde_json::json!({"points": 801, "t_end": 0.5}),
    );
    let m = manifest(&fowler(dir.path(), &["compare", "--config", &cfg]));
    check_digests(dir.path(), &m);
    assert!(m.results["burgers"]["min_u"].as_f64().unwrap() >= 0.0);
    assert!(m.results["fowler"]["min_u"].as_f64().unwrap() < 0.0);
    assert_eq!(m.results["erosion_observed"], true);
    let summary: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("compare.json")).unwrap()).unwrap();
    assert_eq!(summary, m.results);
}

#[test]
fn kernel_table_and_diagnostics() {
    let dir = TempDir::new().unwrap();
    let m = manifest(&fowler(dir.path(), &["kernel", "--t", "0.05,0.5", "--grid", "1024,30"]));
    check_digests(dir.path(), &m);
    let csv = fs::read_to_string(dir.path().join("kernel.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "x,K(t=0.05),K(t=0.5)");
    assert_eq!(csv.lines().count(), 1025);
    for k in m.results["kernels"].as_array().unwrap() {
        assert!((k["mass"].as_f64().unwrap() - 1.0).abs() < 1e-10);
        assert!(k["min"].as_f64().unwrap() < 0.0);
    }
}

#[test]
fn nonlocal_routes_agree() {
    let dir = TempDir::new().unwrap();
    let m = manifest(&fowler(
        dir.path(),
        &[
            "nonlocal",
            "--profile",
            "gaussian",
            "--route",
            "all",
            "--grid",
            "512,30",
        ],
    ));
    let diffs = &m.results["max_abs_diff"];
    assert!(diffs["def-formula"].as_f64().unwrap() < 1e-6);
    // The periodic route also sees the wrapped |z|^{-7/3} tail, a few 1e-3 at L = 30.
    assert!(diffs["formula-spectral"].as_f64().unwrap() < 5e-3);
    let csv = fs::read_to_string(dir.path().join("nonlocal.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "x,def,formula,spectral");
}

#[test]
fn erosion_report_written() {
    let dir = TempDir::new().unwrap();
    let cfg = write_json(
        dir.path(),
        "cfg.json",
        &serde_json::json!({
            "sim": {"grid": {"length": 30.0, "points": 1024}, "t_end": 0.02, "dt": 1e-4, "snapshot_stride": 100},
            "x_star": 17.0,
        }),
    );
    let m = manifest(&fowler(dir.path(), &["erosion", "--config", &cfg]));
    check_digests(dir.path(), &m);
    assert!(m.results["measured_rate"].as_f64().unwrap() < 0.0);
    assert!(m.results["relative_error"].as_f64().unwrap() < 0.1);
    assert!(dir.path().join("erosion_report.json").exists());
    assert!(dir.path().join("erosion_0002.csv").exists());
}

#[test]
fn help_exits_zero() {
    let dir = TempDir::new().unwrap();
    let out = fowler(dir.path(), &["--help"]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("simulate"));
}
