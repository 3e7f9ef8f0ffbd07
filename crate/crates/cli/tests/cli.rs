use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_seqemp"));
    c.env_remove("SEQEMP_OUT_DIR");
    c
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("seqemp-cli-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn write_config(dir: &Path, body: &str) -> PathBuf {
    let path = dir.join("config.json");
    std::fs::write(&path, body).unwrap();
    path
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn files_with_suffix(dir: &Path, suffix: &str) -> Vec<PathBuf> {
    let mut v: Vec<PathBuf> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.to_string_lossy().ends_with(suffix))
        .collect();
    v.sort();
    v
}

const FGN: &str = r#""model": { "p": 1, "D": 0.4, "kind": "fgn", "cross": [[1.0]] }"#;

#[test]
fn simulate_univariate_csv() {
    let dir = scratch("sim1");
    let cfg = write_config(&dir, &format!(r#"{{ "schema": 1, {FGN}, "length": 16, "seed": 1 }}"#));
    let out = dir.join("path.csv");
    let o = run(&["simulate", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "j,x1");
    assert_eq!(lines.len(), 17);
    assert!(!text.contains('\r'));
}

#[test]
fn simulate_with_subordinator() {
    let dir = scratch("sim2");
    let cfg = write_config(
        &dir,
        r#"{ "schema": 1,
             "model": { "p": 2, "D": 0.4, "kind": "fgn", "cross": [[1.0, 0.4], [0.4, 1.0]] },
             "subordinator": { "p": 2, "components": [
                 { "kind": "square", "input": 1 },
                 { "kind": "linear", "weights": [0.6, 0.8] } ] },
             "length": 8, "seed": 5 }"#,
    );
    let o = run(&["simulate", "--config", cfg.to_str().unwrap()]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.starts_with("j,x1,x2,y1,y2\n"));
    let row: Vec<f64> = text.lines().nth(1).unwrap().split(',').map(|v| v.parse().unwrap()).collect();
    assert!((row[3] - row[1] * row[1]).abs() < 1e-12);
    assert!((row[4] - 0.6 * row[1] - 0.8 * row[2]).abs() < 1e-12);
}

#[test]
fn invalid_d_is_a_config_error() {
    let dir = scratch("badd");
    let cfg = write_config(
        &dir,
        r#"{ "schema": 1, "model": { "p": 1, "D": 1.5, "kind": "fgn", "cross": [[1.0]] }, "length": 4 }"#,
    );
    let o = run(&["simulate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("model.D"));
}

#[test]
fn unknown_field_names_path() {
    let dir = scratch("unknown");
    let cfg = write_config(&dir, &format!(r#"{{ "schema": 1, {FGN}, "grid": {{ "points": 3 }} }}"#));
    let o = run(&["rank", "--config", cfg.to_str().unwrap(), "--out", dir.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("grid") && err.contains("line"), "{err}");
}

#[test]
fn rank_of_identity_and_square() {
    let dir = scratch("rank");
    let cfg = write_config(&dir, &format!(r#"{{ "schema": 1, {FGN}, "grid": {{ "points_per_axis": 9 }} }}"#));
    let o = run(&["rank", "--config", cfg.to_str().unwrap(), "--out", dir.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stdout).contains("family rank  1"));
    assert_eq!(files_with_suffix(&dir, ".json").len(), 2);

    let cfg = write_config(
        &dir,
        &format!(
            r#"{{ "schema": 1, {FGN}, "grid": {{ "points_per_axis": 9 }},
                 "subordinator": {{ "p": 1, "components": [{{ "kind": "square", "input": 1 }}] }} }}"#
        ),
    );
    let o = run(&["rank", "--config", cfg.to_str().unwrap(), "--out", dir.to_str().unwrap()]);
    assert!(String::from_utf8_lossy(&o.stdout).contains("family rank  2"));
}

#[test]
fn limit_refuses_inadmissible_d() {
    let dir = scratch("gate");
    let cfg = write_config(
        &dir,
        r#"{ "schema": 1, "model": { "p": 1, "D": 0.6, "kind": "fgn", "cross": [[1.0]] },
             "subordinator": { "p": 1, "components": [{ "kind": "square", "input": 1 }] },
             "grid": { "points_per_axis": 9 }, "n_ladder": [64, 128], "replications": 50 }"#,
    );
    let o = run(&["experiment", "limit", "--config", cfg.to_str().unwrap(), "--out", dir.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("rank condition"));
}

#[test]
fn partition_check_reports_counts() {
    let dir = scratch("partition");
    let cfg = write_config(
        &dir,
        &format!(
            r#"{{ "schema": 1, {FGN}, "grid": {{ "points_per_axis": 9 }}, "partition": {{ "quality": 5, "random_points": 10 }} }}"#
        ),
    );
    let o = run(&["experiment", "partition-check", "--config", cfg.to_str().unwrap(), "--out", dir.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let report = files_with_suffix(&dir, ".json")
        .into_iter()
        .find(|p| !p.to_string_lossy().contains("manifest") && !p.ends_with("config.json"))
        .unwrap();
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(report).unwrap()).unwrap();
    let counts: Vec<(u64, u64)> = v["summary"]
        .as_array()
        .unwrap()
        .iter()
        .map(|s| (s["count"].as_u64().unwrap(), s["extra"]["expected"].as_f64().unwrap() as u64))
        .collect();
    assert_eq!(counts.len(), 5);
    assert!(counts.iter().all(|(a, b)| a == b && *a == 1));
    assert_eq!(v["passed"], true);
}

#[test]
fn manifest_round_trip_reproduces_csv() {
    let dir = scratch("roundtrip");
    let cfg = write_config(
        &dir,
        &format!(
            r#"{{ "schema": 1, {FGN}, "subordinator": {{ "p": 1, "components": [{{ "kind": "square", "input": 1 }}] }},
                 "grid": {{ "points_per_axis": 9 }}, "n_ladder": [32, 64], "replications": 50, "epsilons": [0.1], "seed": 9 }}"#
        ),
    );
    let first = dir.join("first");
    let o = run(&["experiment", "reduction", "--config", cfg.to_str().unwrap(), "--out", first.to_str().unwrap(), "--jobs", "2"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let manifest = files_with_suffix(&first, ".manifest.json").remove(0);
    let second = dir.join("second");
    let o = run(&["experiment", "reduction", "--config", manifest.to_str().unwrap(), "--out", second.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for suffix in [".csv", "_plot.csv"] {
        let a = files_with_suffix(&first, suffix);
        let b = files_with_suffix(&second, suffix);
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.file_name(), y.file_name());
            assert_eq!(std::fs::read(x).unwrap(), std::fs::read(y).unwrap());
        }
    }
    let raw = files_with_suffix(&first, ".csv")
        .into_iter()
        .find(|p| !p.to_string_lossy().ends_with("_plot.csv"))
        .unwrap();
    assert!(std::fs::read_to_string(raw).unwrap().starts_with("n,replication,label,value\n"));
}

#[test]
fn seed_flag_changes_output_name() {
    let dir = scratch("seed");
    let cfg = write_config(&dir, &format!(r#"{{ "schema": 1, {FGN}, "length": 4, "seed": 1 }}"#));
    let a = run(&["simulate", "--config", cfg.to_str().unwrap()]);
    let b = run(&["simulate", "--config", cfg.to_str().unwrap(), "--seed", "2"]);
    assert_ne!(a.stdout, b.stdout);
    let out = bin()
        .args(["simulate", "--config", cfg.to_str().unwrap()])
        .env("SEQEMP_OUT_DIR", dir.join("env"))
        .output()
        .unwrap();
    assert!(out.status.success());
    assert_eq!(files_with_suffix(&dir.join("env"), ".csv").len(), 1);
}
