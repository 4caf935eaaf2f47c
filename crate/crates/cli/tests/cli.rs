use std::path::Path;
use std::process::Command;

use serde_json::{json, Value};
use tempfile::TempDir;
use tnkernel::mps::product_weights;
use tnkernel::pqc::random_encoding_circuit;
use tnkernel::FrequencyLattice;
use tnkernel_cli::{validate, RunConfig};

fn write(dir: &Path, name: &str, text: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

/// Runs the binary on `config`; returns exit code and parsed report.
fn run_cli(dir: &Path, config: &Value, extra: &[&str]) -> (i32, Option<Value>, String) {
    let cfg = write(dir, "config.json", &config.to_string());
    let out = dir.join("out");
    let o = Command::new(env!("CARGO_BIN_EXE_tnkernel"))
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .args(extra)
        .output()
        .unwrap();
    let report = std::fs::read_to_string(out.join("report.json"))
        .ok()
        .map(|s| serde_json::from_str(&s).unwrap());
    (o.status.code().unwrap(), report, String::from_utf8_lossy(&o.stderr).into_owned())
}

fn small_lattice() -> Value {
    json!({ "axes": [{ "integer_M": 1 }, { "integer_M": 2 }, { "integer_M": 1 }] })
}

fn dataset(dir: &Path, name: &str, n: usize, offset: f64) -> String {
    let mut s = String::from("x_1,x_2,x_3,y\n");
    for i in 0..n {
        let t = i as f64 * 0.37 + offset;
        let x = [t.sin() * 3.0, (1.7 * t).cos() * 3.0, (0.3 * t).sin() * 3.0];
        let y = x[0].cos() + 0.5 * (x[1] - x[2]).sin();
        s.push_str(&format!("{},{},{},{}\n", x[0], x[1], x[2], y));
    }
    write(dir, name, &s);
    name.to_string()
}

#[test]
fn verify_default_suite_passes() {
    let dir = TempDir::new().unwrap();
    let (code, report, err) = run_cli(dir.path(), &json!({ "task": { "kind": "verify" } }), &[]);
    assert_eq!(code, 0, "{err}");
    let r = report.unwrap();
    assert_eq!(r["result"]["configs"], 50);
    assert!(r["result"]["max_err_dense"].as_f64().unwrap() <= 1e-9);
    assert!(r["result"]["max_err_etk"].as_f64().unwrap() <= 1e-9);
    assert_eq!(r["result"]["passed"], true);
    let csv = std::fs::read_to_string(dir.path().join("out/verify.csv")).unwrap();
    assert!(csv.starts_with("config,d,m,bond_dim,"));
    assert_eq!(csv.lines().count(), 51);
}

#[test]
fn kernel_eval_on_the_diagonal_is_one() {
    let dir = TempDir::new().unwrap();
    let cfg = json!({
        "lattice": small_lattice(),
        "weighting": { "kind": "random", "bond_dim": 3, "seed": 4 },
        "task": { "kind": "kernel-eval", "pairs": [[[0.3, -1.0, 2.0], [0.3, -1.0, 2.0]], [[0.0, 0.0, 0.0], [1.0, 1.0, 1.0]]] },
    });
    let (code, report, err) = run_cli(dir.path(), &cfg, &[]);
    assert_eq!(code, 0, "{err}");
    let r = report.unwrap();
    let k0 = r["result"]["values"][0].as_f64().unwrap();
    assert!((k0 - 1.0).abs() <= 1e-12);
    assert_eq!(r["tool"]["version"], tnkernel::VERSION);
    assert_eq!(r["config"]["weighting"]["seed"], 4);
    assert_eq!(r["seeds"]["weighting"], 4);
    let csv = std::fs::read_to_string(dir.path().join("out/kernel.csv")).unwrap();
    assert!(csv.starts_with("x_1,x_2,x_3,xp_1,xp_2,xp_3,k\n"));
}

#[test]
fn bench_scales_linearly() {
    let dir = TempDir::new().unwrap();
    let cfg = json!({ "task": { "kind": "bench", "dims": [25, 50, 100], "bond_dim": 4, "m": 1, "evals": 100, "repeats": 5 } });
    let (code, report, err) = run_cli(dir.path(), &cfg, &[]);
    assert_eq!(code, 0, "{err}");
    let r = report.unwrap();
    let ratio = r["timings"]["bench_ratios"]["t100_over_t50"].as_f64().unwrap();
    assert!(ratio <= 3.0, "t(100)/t(50) = {ratio}");
    let csv = std::fs::read_to_string(dir.path().join("out/bench.csv")).unwrap();
    assert!(csv.starts_with("d,bond_dim,engine_bond_dim,m,evals,secs_per_eval\n"));
    assert_eq!(csv.lines().count(), 4);
}

#[test]
fn krr_and_rff_runs_are_deterministic() {
    for task in [
        json!({ "kind": "krr", "train": "train.csv", "test": "test.csv", "lambda": 1e-6 }),
        json!({ "kind": "rff", "train": "train.csv", "test": "test.csv", "lambda": 1e-6, "features": 64, "seed": 9 }),
    ] {
        let mut reports = Vec::new();
        let mut csvs = Vec::new();
        for _ in 0..2 {
            let dir = TempDir::new().unwrap();
            dataset(dir.path(), "train.csv", 40, 0.0);
            dataset(dir.path(), "test.csv", 10, 100.0);
            let cfg = json!({
                "lattice": small_lattice(),
                "weighting": { "kind": "random", "bond_dim": 2, "seed": 3 },
                "task": task,
            });
            let (code, report, err) = run_cli(dir.path(), &cfg, &[]);
            assert_eq!(code, 0, "{err}");
            let r = report.unwrap();
            reports.push(r["result"].clone());
            csvs.push(std::fs::read(dir.path().join("out/test_predictions.csv")).unwrap());
            assert!(r["result"]["test_mse"].as_f64().unwrap().is_finite());
        }
        assert_eq!(reports[0], reports[1]);
        assert_eq!(csvs[0], csvs[1]);
    }
}

#[test]
fn krr_reports_small_train_residual() {
    let dir = TempDir::new().unwrap();
    dataset(dir.path(), "train.csv", 30, 0.0);
    let cfg = json!({
        "lattice": small_lattice(),
        "weighting": { "kind": "uniform" },
        "task": { "kind": "krr", "train": "train.csv", "lambda": 1e-3 },
    });
    let (code, report, err) = run_cli(dir.path(), &cfg, &[]);
    assert_eq!(code, 0, "{err}");
    assert!(report.unwrap()["result"]["train_residual_inf"].as_f64().unwrap() <= 1e-8);
}

#[test]
fn seed_override_replaces_all_seeds() {
    let dir = TempDir::new().unwrap();
    let cfg = json!({
        "lattice": small_lattice(),
        "weighting": { "kind": "random", "bond_dim": 2, "seed": 1 },
        "task": { "kind": "sample", "count": 50, "seed": 2 },
    });
    let (code, report, err) = run_cli(dir.path(), &cfg, &["--seed-override", "77", "--threads", "2"]);
    assert_eq!(code, 0, "{err}");
    let r = report.unwrap();
    assert_eq!(r["seeds"], json!({ "weighting": 77, "task": 77 }));
    let csv = std::fs::read_to_string(dir.path().join("out/samples.csv")).unwrap();
    assert!(csv.starts_with("k_1,k_2,k_3\n"));
    assert_eq!(csv.lines().count(), 51);
}

#[test]
fn gram_from_points_file() {
    let dir = TempDir::new().unwrap();
    dataset(dir.path(), "pts.csv", 5, 0.0);
    let cfg = json!({
        "lattice": small_lattice(),
        "weighting": { "kind": "uniform" },
        "task": { "kind": "gram", "points": "pts.csv" },
    });
    let (code, _, err) = run_cli(dir.path(), &cfg, &[]);
    assert_eq!(code, 0, "{err}");
    let csv = std::fs::read_to_string(dir.path().join("out/gram.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "col_1,col_2,col_3,col_4,col_5");
    let first: Vec<f64> = lines.next().unwrap().split(',').map(|v| v.parse().unwrap()).collect();
    assert_eq!(first[0], 1.0);
}

#[test]
fn pqc_check_reports_a_clean_fit() {
    let dir = TempDir::new().unwrap();
    write(dir.path(), "circuit.json", &random_encoding_circuit(3, 2).to_json().unwrap());
    let cfg = json!({ "task": { "kind": "pqc-check", "circuit": "circuit.json", "seed": 1 } });
    let (code, report, err) = run_cli(dir.path(), &cfg, &[]);
    assert_eq!(code, 0, "{err}");
    let r = report.unwrap();
    assert!(r["result"]["residual"].as_f64().unwrap() <= 1e-8);
    assert!(r["result"]["conjugacy_error"].as_f64().unwrap() <= 1e-10);
    let csv = std::fs::read_to_string(dir.path().join("out/coefficients.csv")).unwrap();
    assert!(csv.starts_with("k_1,k_2,omega_1,omega_2,re,im\n"));
    assert_eq!(csv.lines().count(), 26);
}

#[test]
fn config_errors_exit_with_two() {
    let dir = TempDir::new().unwrap();
    let cfg = json!({ "lattice": small_lattice(), "weighting": { "kind": "uniform" }, "task": { "kind": "krr", "lambda": 0.1 } });
    let (code, _, err) = run_cli(dir.path(), &cfg, &[]);
    assert_eq!(code, 2);
    assert!(err.contains("task.train"), "{err}");
    let (code, _, _) = run_cli(dir.path(), &json!({ "task": { "kind": "nope" } }), &[]);
    assert_eq!(code, 2);
}

#[test]
fn numeric_failures_exit_with_three() {
    let dir = TempDir::new().unwrap();
    let lat = FrequencyLattice::integer(1, 1).unwrap();
    let w = product_weights(&lat, &[vec![1.0, 1.0, 3.0]]).unwrap();
    let lie = w.to_json().unwrap().replace("\"symmetric\": false", "\"symmetric\": true");
    write(dir.path(), "w.json", &lie);
    let cfg = json!({
        "lattice": { "axes": [{ "integer_M": 1 }] },
        "weighting": { "kind": "file", "path": "w.json" },
        "task": { "kind": "kernel-eval", "pairs": [[[0.0], [1.0]]] },
    });
    let (code, _, err) = run_cli(dir.path(), &cfg, &[]);
    assert_eq!(code, 3, "{err}");
}

fn parse(v: Value) -> RunConfig {
    serde_json::from_value(v).unwrap()
}

#[test]
fn validate_diagnostics() {
    let valid = parse(json!({
        "lattice": { "axes": [{ "integer_M": 1 }] },
        "weighting": { "kind": "uniform" },
        "task": { "kind": "kernel-eval", "pairs": [[[0.0], [0.0]]] },
    }));
    assert!(validate(&valid).is_empty());
    assert!(validate(&parse(json!({ "task": { "kind": "verify" } }))).is_empty());

    let krr = parse(json!({
        "lattice": { "axes": [{ "integer_M": 1 }] },
        "weighting": { "kind": "uniform" },
        "task": { "kind": "krr", "lambda": 0.1 },
    }));
    let d = validate(&krr);
    assert_eq!(d.len(), 1);
    assert_eq!(d[0].field, "task.train");

    let rff = parse(json!({
        "lattice": { "axes": [{ "integer_M": 1 }] },
        "weighting": { "kind": "uniform" },
        "task": { "kind": "rff", "train": "t.csv", "lambda": 0.1, "features": 0, "seed": 1 },
    }));
    assert!(validate(&rff).iter().any(|d| d.field == "task.features"));

    let zero = parse(json!({
        "lattice": { "axes": [{ "integer_M": 1 }] },
        "weighting": { "kind": "product", "vectors": [[0.0, 0.0, 0.0]] },
        "task": { "kind": "sample", "count": 10, "seed": 1 },
    }));
    assert!(validate(&zero).iter().any(|d| d.field == "weighting"));

    let missing = parse(json!({ "task": { "kind": "sample", "count": 10, "seed": 1 } }));
    let fields: Vec<String> = validate(&missing).into_iter().map(|d| d.field).collect();
    assert_eq!(fields, ["lattice", "weighting"]);

    let dims = parse(json!({
        "lattice": { "axes": [{ "integer_M": 1 }] },
        "weighting": { "kind": "random", "bond_dim": 0, "seed": 1 },
        "task": { "kind": "kernel-eval", "pairs": [[[0.0, 1.0], [0.0]]] },
    }));
    let fields: Vec<String> = validate(&dims).into_iter().map(|d| d.field).collect();
    assert_eq!(fields, ["weighting.bond_dim", "task.pairs[0]"]);
}

#[test]
fn schema_file_parses() {
    let text = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/../../config.schema.json")).unwrap();
    let v: Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["required"], json!(["task"]));
}
