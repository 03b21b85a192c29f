use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use nqr_holonomy::lab::table::{DRMS_BIAS_COLUMNS, DRMS_COLUMNS};
use nqr_holonomy::lab::ResultTable;
use serde_json::Value;

fn lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nqr-lab"))
        .args(args)
        .output()
        .expect("spawn nqr-lab")
}

fn configs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs")
}

fn write_config(dir: &Path, text: &str) -> String {
    let p = dir.join("cfg.json");
    fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

const SMALL_SWEEP: &str = r#"{"experiment": "drms-sweep", "modes": [1, 2], "eps": 1e-3,
    "realizations": 40, "seed": 9, "middle_steps": 400, "theta0": {"points": 3, "margin": 0.1}}"#;

#[test]
fn version_prints_package_version() {
    let out = lab(&["version"]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains(env!("CARGO_PKG_VERSION")));
}

#[test]
fn shipped_configs_validate() {
    let mut n = 0;
    for entry in fs::read_dir(configs_dir()).unwrap() {
        let p = entry.unwrap().path();
        let out = lab(&["validate-config", "--config", p.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0), "{}: {}", p.display(), String::from_utf8_lossy(&out.stderr));
        n += 1;
    }
    assert!(n >= 5);
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        r#"{"experiment": "drms-sweep", "modes": [1], "bogus": 1}"#,
        r#"{"experiment": "drms-sweep"}"#,
        r#"{"experiment": "convergence", "modes": [1], "eps_list": [1e-3, 2e-3, 5e-3]}"#,
        r#"{"experiment": "drms-sweep", "modes": [1], "theta0": [0.0, 1.0]}"#,
        "not json",
    ];
    for text in cases {
        let cfg = write_config(dir.path(), text);
        let out = lab(&["validate-config", "--config", &cfg]);
        assert_eq!(out.status.code(), Some(2), "{text}");
        assert!(!out.stderr.is_empty());
    }
    assert_eq!(lab(&["validate-config", "--config", "/nonexistent.json"]).status.code(), Some(2));
    assert_eq!(lab(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn runs_are_reproducible_and_thread_independent() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL_SWEEP);
    let mut csvs = Vec::new();
    for (k, threads) in ["1", "4", "4"].iter().enumerate() {
        let out_dir = dir.path().join(format!("run{k}"));
        let out = lab(&["run", "--config", &cfg, "--out", out_dir.to_str().unwrap(), "--threads", threads]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        csvs.push((
            fs::read(out_dir.join("drms-sweep_drms.csv")).unwrap(),
            fs::read(out_dir.join("drms-sweep_bias.csv")).unwrap(),
        ));
    }
    assert_eq!(csvs[0], csvs[1]);
    assert_eq!(csvs[1], csvs[2]);
}

#[test]
fn sweep_outputs_follow_schema() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL_SWEEP);
    let out_dir = dir.path().join("out");
    let out = lab(&["run", "--config", &cfg, "--out", out_dir.to_str().unwrap(), "--seed", "10"]);
    assert!(out.status.success());

    let t = ResultTable::read_csv(&out_dir.join("drms-sweep_drms.csv")).unwrap();
    assert_eq!(t.columns, DRMS_COLUMNS.map(String::from).to_vec());
    assert_eq!(t.rows.len(), 6);
    for se in t.column("mc_stderr").unwrap() {
        assert!(se.is_finite() && se >= 0.0);
    }
    let b = ResultTable::read_csv(&out_dir.join("drms-sweep_bias.csv")).unwrap();
    assert_eq!(b.columns, DRMS_BIAS_COLUMNS.map(String::from).to_vec());

    let meta: Value = serde_json::from_str(&fs::read_to_string(out_dir.join("drms-sweep.json")).unwrap()).unwrap();
    assert_eq!(meta["status"], "complete");
    assert_eq!(meta["seed"], 10);
    assert_eq!(meta["config"]["realizations"], 40);
    assert_eq!(meta["tables"].as_array().unwrap().len(), 2);
}

#[test]
fn numerical_failure_exits_3_with_partial_output() {
    let dir = tempfile::tempdir().unwrap();
    // the second point is so close to the pole that the noise leaves the chart
    let cfg = write_config(
        dir.path(),
        r#"{"experiment": "drms-sweep", "modes": [1], "eps": 0.05, "realizations": 20,
            "middle_steps": 200, "theta0": [1.5, 0.001]}"#,
    );
    let out_dir = dir.path().join("out");
    let out = lab(&["run", "--config", &cfg, "--out", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
    let meta: Value = serde_json::from_str(&fs::read_to_string(out_dir.join("drms-sweep.json")).unwrap()).unwrap();
    assert_eq!(meta["status"], "partial");
    assert!(meta["error"].as_str().unwrap().contains("chart"));
    let t = ResultTable::read_csv(&out_dir.join("drms-sweep_drms.csv")).unwrap();
    assert_eq!(t.rows.len(), 1);
}

#[test]
fn figure_three_data() {
    let dir = tempfile::tempdir().unwrap();
    let out = lab(&["figures-data", "--figure", "3", "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success());
    let t = ResultTable::read_csv(&dir.path().join("fig3.csv")).unwrap();
    assert_eq!(t.columns, ["theta0", "m", "drms_analytic_over_eps_sigma"]);
    let (th, m, d) = (t.column("theta0").unwrap(), t.column("m").unwrap(), t.column("drms_analytic_over_eps_sigma").unwrap());
    let half_pi = std::f64::consts::FRAC_PI_2;
    for i in 0..th.len() {
        if m[i] != 2.0 && (th[i] == 0.0 || (th[i] - half_pi).abs() < 1e-12) {
            assert!(d[i].abs() < 1e-9, "m = {} theta0 = {}: {}", m[i], th[i], d[i]);
        }
    }
    let again = tempfile::tempdir().unwrap();
    lab(&["figures-data", "--figure", "3", "--out", again.path().to_str().unwrap()]);
    assert_eq!(fs::read(dir.path().join("fig3.csv")).unwrap(), fs::read(again.path().join("fig3.csv")).unwrap());
}

#[test]
fn every_figure_writes_files() {
    let dir = tempfile::tempdir().unwrap();
    for fig in ["1", "4", "5", "6", "7", "8"] {
        let out = lab(&["figures-data", "--figure", fig, "--out", dir.path().to_str().unwrap()]);
        assert!(out.status.success(), "figure {fig}");
    }
    let names: Vec<String> = fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    for want in ["fig1.csv", "fig4_omega.csv", "fig5_contours.csv", "fig6.csv", "fig7.csv", "fig8_semiaxes.csv"] {
        assert!(names.iter().any(|n| n == want), "missing {want} in {names:?}");
    }
    assert_eq!(lab(&["figures-data", "--figure", "2"]).status.code(), Some(2));
}
