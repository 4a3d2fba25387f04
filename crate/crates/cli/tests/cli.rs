use std::collections::BTreeMap;
use std::path::Path;
use std::process::{Command, Output};

use implicit_online::learners::run;
use implicit_online::Algorithm;
use implicit_online_cli::experiments::{learner_config, load_dataset, sweep_rows};
use implicit_online_cli::{cmd_sweep, BetaGrid, ExperimentConfig};
use tempfile::TempDir;

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_implicit-online")).args(args).output().expect("binary runs")
}

fn csv_rows(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(str::to_string).collect();
    let rows = r.records().map(|rec| rec.unwrap().iter().map(str::to_string).collect()).collect();
    (header, rows)
}

#[test]
fn synthetic_writes_one_row_per_round_and_algorithm() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = bin(&["synthetic", "--T", "10", "--out", out]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let (header, rows) = csv_rows(&dir.path().join("synthetic.csv"));
    assert_eq!(header, ["t", "algorithm", "cumulative_loss"]);
    assert_eq!(rows.len(), 40);

    let mut per_algo: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for row in &rows {
        per_algo.entry(row[1].clone()).or_default().push(row[2].parse().unwrap());
    }
    assert_eq!(per_algo.len(), 4);
    for (name, series) in &per_algo {
        assert_eq!(series.len(), 10, "{name}");
        assert!(series[0] >= 0.0);
        assert!(series.windows(2).all(|w| w[1] >= w[0]), "{name} not cumulative");
    }
    assert!(dir.path().join("plot_synthetic.py").exists());
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("synthetic_report.json")).unwrap()).unwrap();
    assert_eq!(report["command"], "synthetic");
    assert_eq!(report["seed"], 42);
}

#[test]
fn synthetic_defaults_cover_the_full_horizon() {
    let dir = TempDir::new().unwrap();
    let o = bin(&["synthetic", "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success());
    let (_, rows) = csv_rows(&dir.path().join("synthetic.csv"));
    assert_eq!(rows.len(), 4 * 2000);
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("adaimplicit"));
}

#[test]
fn theory_beta_adds_a_run() {
    let dir = TempDir::new().unwrap();
    let o = bin(&["synthetic", "--T", "5", "--theory-beta", "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success());
    let (_, rows) = csv_rows(&dir.path().join("synthetic.csv"));
    assert_eq!(rows.len(), 5 * 5);
    assert!(rows.iter().any(|r| r[1] == "adaimplicit-theory"));
}

#[test]
fn sweep_small_grid() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = bin(&["sweep", "--grid-points", "5", "--repeats", "2", "--algo", "ogd,adaimplicit", "--out", out]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let (header, rows) = csv_rows(&dir.path().join("sweep.csv"));
    assert_eq!(header, ["algorithm", "beta", "repeat", "avg_cumulative_loss"]);
    assert_eq!(rows.len(), 2 * 5 * 2);
    for algo in ["ogd", "adaimplicit"] {
        assert_eq!(rows.iter().filter(|r| r[0] == algo).count(), 10);
    }
    let betas: Vec<f64> = rows.iter().filter(|r| r[0] == "ogd" && r[2] == "0").map(|r| r[1].parse().unwrap()).collect();
    assert_eq!(betas, [2f64.powi(-20), 2f64.powi(-10), 1.0, 2f64.powi(10), 2f64.powi(20)]);

    let (sheader, summary) = csv_rows(&dir.path().join("sweep_summary.csv"));
    assert_eq!(sheader, ["algorithm", "beta", "mean", "std"]);
    assert_eq!(summary.len(), 10);
}

#[test]
fn sweep_is_byte_identical_across_runs_and_thread_counts() {
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    let args = |d: &TempDir| {
        vec!["sweep".to_string(), "--grid-points".into(), "3".into(), "--repeats".into(), "3".into(), "--out".into(), d.path().to_str().unwrap().into()]
    };
    let oa = Command::new(env!("CARGO_BIN_EXE_implicit-online")).args(args(&a)).env("IMPLICIT_ONLINE_THREADS", "1").output().unwrap();
    let ob = Command::new(env!("CARGO_BIN_EXE_implicit-online")).args(args(&b)).env("IMPLICIT_ONLINE_THREADS", "4").output().unwrap();
    assert!(oa.status.success() && ob.status.success());
    for name in ["sweep.csv", "sweep_summary.csv"] {
        assert_eq!(std::fs::read(a.path().join(name)).unwrap(), std::fs::read(b.path().join(name)).unwrap(), "{name}");
    }
}

#[test]
fn bad_thread_count_is_rejected() {
    let dir = TempDir::new().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_implicit-online"))
        .args(["sweep", "--grid-points", "1", "--repeats", "1", "--out", dir.path().to_str().unwrap()])
        .env("IMPLICIT_ONLINE_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("IMPLICIT_ONLINE_THREADS"));
}

#[test]
fn sweep_average_matches_a_direct_run() {
    let mut cfg = ExperimentConfig::sweep_defaults();
    cfg.beta_grid = BetaGrid { lo_exp: -2, hi_exp: 2, points: 3 };
    cfg.repeats = 2;
    cfg.algorithms = vec![Algorithm::AdaImplicit, Algorithm::Ogd];
    let ds = load_dataset(&cfg).unwrap();
    let rows = sweep_rows(&cfg, &ds).unwrap();
    assert_eq!(rows.len(), 2 * 3 * 2);
    let setup = implicit_online::MirrorSetup::unconstrained();
    for row in &rows {
        let losses = ds.shuffled_losses(cfg.seed, row.repeat as u64).unwrap();
        let lc = learner_config(row.algorithm, row.beta, vec![0.0; ds.d], &setup, &losses).unwrap();
        let expected = run(&lc, &losses).unwrap().cumulative_loss() / ds.n() as f64;
        assert!((row.avg_cumulative_loss - expected).abs() <= 1e-12 * expected.abs().max(1.0));
    }
}

#[test]
fn regression_task_uses_bundled_regression_data() {
    let dir = TempDir::new().unwrap();
    let mut cfg = ExperimentConfig::sweep_defaults();
    cfg.task = implicit_online::Task::Regression;
    cfg.loss_family = implicit_online_cli::LossFamily::Absolute;
    cfg.beta_grid = BetaGrid { lo_exp: 0, hi_exp: 0, points: 1 };
    cfg.repeats = 1;
    cfg.out = dir.path().to_path_buf();
    let report = cmd_sweep(&cfg).unwrap();
    assert_eq!(report.summary.len(), cfg.algorithms.len());
    assert!(report.summary.iter().all(|s| s.mean.is_finite() && s.mean >= 0.0 && s.std == 0.0));
}

#[test]
fn parse_errors_name_file_and_line() {
    let dir = TempDir::new().unwrap();
    let data = dir.path().join("bad.libsvm");
    std::fs::write(&data, "+1 1:0.5 2:1\n-1 3:0.2 2:0.1\n").unwrap();
    let o = bin(&["sweep", "--dataset", data.to_str().unwrap(), "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("bad.libsvm:2"), "{err}");
}

#[test]
fn missing_dataset_is_an_io_error() {
    let o = bin(&["sweep", "--dataset", "/nonexistent/data.libsvm"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("/nonexistent/data.libsvm"));
}

#[test]
fn unknown_algorithm_is_rejected() {
    let o = bin(&["synthetic", "--algo", "sgd"]);
    assert!(!o.status.success());
}

#[test]
fn flags_override_config_file() {
    let dir = TempDir::new().unwrap();
    let cfg_path = dir.path().join("run.toml");
    let out = dir.path().join("out");
    std::fs::write(&cfg_path, format!("T = 7\nalgorithms = [\"ogd\"]\nout = {:?}\n", out.to_str().unwrap())).unwrap();
    let o = bin(&["synthetic", "--config", cfg_path.to_str().unwrap(), "--T", "3"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let (_, rows) = csv_rows(&out.join("synthetic.csv"));
    assert_eq!(rows.len(), 3);
    assert!(rows.iter().all(|r| r[1] == "ogd"));
}

#[test]
fn unknown_config_keys_are_rejected() {
    let dir = TempDir::new().unwrap();
    let cfg_path = dir.path().join("run.toml");
    std::fs::write(&cfg_path, "horizon = 7\n").unwrap();
    let o = bin(&["synthetic", "--config", cfg_path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn quick_check_passes_except_known_doubling_cases() {
    let dir = TempDir::new().unwrap();
    let json = dir.path().join("check.json");
    let o = bin(&["check", "--quick", "--out", json.to_str().unwrap()]);
    let stdout = String::from_utf8_lossy(&o.stdout);
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    let failed: Vec<&str> = report["outcomes"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|o| !o["passed"].as_bool().unwrap())
        .map(|o| o["name"].as_str().unwrap())
        .collect();
    assert!(failed.iter().all(|n| n.starts_with("doubling-fixed")), "{stdout}");
    assert_eq!(o.status.code(), Some(if failed.is_empty() { 0 } else { 1 }));
}

#[test]
fn injected_fault_is_caught() {
    let o = bin(&["check", "--quick", "--inject-fault", "delta-sign"]);
    assert_eq!(o.status.code(), Some(1));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("FAIL step-delta-nonnegative"), "{stdout}");
}
