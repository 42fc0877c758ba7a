use std::f64::consts::PI;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn regvort(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_regvort")).args(args).output().unwrap()
}

fn out_arg(dir: &Path) -> String {
    format!("--output={}", dir.display())
}

fn rows(csv: &str) -> Vec<(f64, usize, f64, f64)> {
    csv.lines()
        .skip(1)
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[0].parse().unwrap(), f[1].parse().unwrap(), f[2].parse().unwrap(), f[3].parse().unwrap())
        })
        .collect()
}

#[test]
fn kernel_verify_reports_decay_limit() {
    let dir = tempfile::tempdir().unwrap();
    let out = regvort(&["kernel-verify", &out_arg(dir.path()), "--experiment.pairs=2000"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("kernel_report.json")).unwrap()).unwrap();
    assert!((report["decay_limit"].as_f64().unwrap() - 0.5 / PI).abs() < 1e-15);
    assert_eq!(report["origin_value"], serde_json::json!({"x": 0.0, "y": 0.0}));
    assert!(dir.path().join("manifest.json").exists());
}

#[test]
fn simulate_pair_returns_after_one_period() {
    let dir = tempfile::tempdir().unwrap();
    let period = format!("--time.t_end={}", 1.25 * PI);
    let out = regvort(&["simulate", &out_arg(dir.path()), &period, "--time.sample_every=500"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = rows(&std::fs::read_to_string(dir.path().join("trajectory.csv")).unwrap());
    let (first, last) = (&rows[..2], &rows[rows.len() - 2..]);
    assert_eq!(first[0].0, 0.0);
    assert!((last[0].0 - 1.25 * PI).abs() < 1e-12);
    for (a, b) in first.iter().zip(last) {
        assert_eq!(a.1, b.1);
        assert!((a.2 - b.2).hypot(a.3 - b.3) < 1e-6, "{a:?} vs {b:?}");
    }
    let diagnostics = std::fs::read_to_string(dir.path().join("diagnostics.jsonl")).unwrap();
    assert_eq!(diagnostics.lines().count(), rows.len() / 2);
}

#[test]
fn zero_time_step_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = regvort(&["simulate", &out_arg(dir.path()), "--time.dt=0"]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    let record: Value = serde_json::from_str(stderr.trim()).unwrap();
    assert_eq!(record["status"], "error");
    assert_eq!(record["field"], "time.dt");
    assert!(!dir.path().join("trajectory.csv").exists());
}

#[test]
fn unknown_key_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.toml");
    std::fs::write(&config, "[time]\nt_end = 1.0\nstep = 0.1\n").unwrap();
    let out = regvort(&["simulate", "--config", config.to_str().unwrap(), &out_arg(dir.path())]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("step"));
}

#[test]
fn manifest_reproduces_run() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let config = dir.path().join("run.toml");
    std::fs::write(
        &config,
        "seed = 7\n[kernel]\nname = \"alpha\"\nepsilon = 0.3\n[time]\nt_end = 0.5\ndt = 0.01\nsample_every = 5\n\
         [initial_data]\nkind = \"patch\"\ncenter = [0.0, 0.0]\nradius = 0.5\nomega = 1.0\nspacing = 0.2\n",
    )
    .unwrap();
    let out = regvort(&["simulate", "--config", config.to_str().unwrap(), &out_arg(&a)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let manifest = a.join("manifest.json");
    let out = regvort(&["simulate", "--config", manifest.to_str().unwrap(), &out_arg(&b)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for f in ["initial.csv", "trajectory.csv", "diagnostics.jsonl"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap(), "{f}");
    }

    // A manifest records its command.
    let out = regvort(&["picard", "--config", manifest.to_str().unwrap(), &out_arg(&b)]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn thread_count_does_not_change_output() {
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for threads in ["1", "2", "8"] {
        let d = dir.path().join(threads);
        let out = regvort(&[
            "converge",
            "--threads",
            threads,
            &out_arg(&d),
            "--initial_data.kind=patch",
            "--initial_data.center=[0.0, 0.0]",
            "--initial_data.radius=1.0",
            "--initial_data.omega=1.0",
            "--initial_data.spacing=0.25",
            "--time.dt=0.05",
            "--experiment.tracers.count=4",
        ]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        outputs.push(std::fs::read(d.join("convergence.csv")).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
    assert_eq!(outputs[0], outputs[2]);
}

#[test]
fn l1_distance_matches_half_pi() {
    let dir = tempfile::tempdir().unwrap();
    let out = regvort(&["l1-distance", &out_arg(dir.path()), "--kernel.epsilon=1.0", "--experiment.eps_list=[0.5]"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("l1_report.json")).unwrap()).unwrap();
    let values: Vec<f64> = report.as_array().unwrap().iter().map(|r| r["value"].as_f64().unwrap()).collect();
    assert_eq!(values.len(), 2);
    assert!((values[0] - 0.5 * PI).abs() < 1e-6 * PI);
    assert!((values[1] - 0.25 * PI).abs() < 1e-6 * PI);
}

#[test]
fn picard_writes_cauchy_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = regvort(&["picard", &out_arg(dir.path()), "--time.t_end=0.5", "--time.dt=0.01"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("picard.json")).unwrap()).unwrap();
    assert_eq!(report["converged"], true);
    assert!(report["iterations"].as_array().unwrap().len() <= 20);
    assert!(dir.path().join("picard_trajectory.csv").exists());
}
