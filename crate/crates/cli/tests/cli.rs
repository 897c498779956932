use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use hypersieve::container::{self, Container};
use serde_json::{json, Value};
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_hypersieve"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn write_config(dir: &TempDir, name: &str, value: &Value) -> PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, serde_json::to_vec(value).unwrap()).unwrap();
    path
}

fn run_config(cmd: &str, config: &Path, extra: &[&str]) -> Output {
    let mut args = vec![cmd, "--config", config.to_str().unwrap()];
    args.extend_from_slice(extra);
    run(&args)
}

/// Numeric rows of a CSV table.
fn csv_rows(text: &str) -> Vec<Vec<f64>> {
    text.lines().skip(1).map(|l| l.split(',').map(|c| c.parse().unwrap()).collect()).collect()
}

fn small_grid() -> Value {
    json!({"x_min": -8.0, "x_max": 8.0, "nx": 512, "s_min": 0.0625, "s_max": 16.0, "ns": 256})
}

#[test]
fn bounds_prints_sharp_concentration() {
    let measure = (4.0 * PI / 3.0).to_string();
    let out = run(&["bounds", "--alpha", "2", "--p", "2", "--measure", &measure]);
    assert_eq!(code(&out), 0);
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((report["ramos_tilli"].as_f64().unwrap() - 0.4375).abs() < 1e-12);
    assert!((report["lieb"].as_f64().unwrap() - 2.0 * PI).abs() < 1e-12);
    assert!(String::from_utf8_lossy(&out.stderr).contains("ramos_tilli"));
}

#[test]
fn bounds_rejects_invalid_parameters() {
    assert_eq!(code(&run(&["bounds", "--alpha", "-1", "--p", "2", "--measure", "1"])), 2);
    assert_eq!(code(&run(&["bounds", "--alpha", "2", "--p", "2"])), 2);
}

#[test]
fn malformed_and_unknown_configs_exit_two() {
    let dir = TempDir::new().unwrap();
    let broken = dir.path().join("broken.json");
    std::fs::write(&broken, b"{ not json").unwrap();
    let unknown = write_config(&dir, "unknown.json", &json!({"surprise": 1}));
    for cmd in ["coeff", "kernel", "cwt", "sieve-cert", "orth-check", "recover", "selftest"] {
        let out = dir.path().join("out");
        let out = out.to_str().unwrap();
        assert_eq!(code(&run_config(cmd, &broken, &["--out", out])), 2, "{cmd} malformed");
        assert_eq!(code(&run_config(cmd, &unknown, &["--out", out])), 2, "{cmd} unknown key");
    }
    assert_eq!(code(&run(&["coeff"])), 2);
}

#[test]
fn kernel_diagonal_is_constant() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        &dir,
        "k.json",
        &json!({"n": 2, "alpha": 3.0, "points": [{"x": 0.0, "s": 1.0}, {"x": -3.0, "s": 0.2}, {"x": 7.5, "s": 40.0}]}),
    );
    let out = run_config("kernel", &cfg, &[]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("n,m,alpha,"));
    for row in csv_rows(&text) {
        assert!((row[7] - 3.0 / (4.0 * PI)).abs() < 1e-13, "{row:?}");
        assert!(row[8].abs() < 1e-13);
    }
}

#[test]
fn coeff_at_identity_is_kronecker_and_rerun_is_identical() {
    let dir = TempDir::new().unwrap();
    let mut tables = Vec::new();
    for (n, m) in [(1, 1), (1, 3), (0, 2)] {
        let cfg = write_config(&dir, "c.json", &json!({"n": n, "m": m, "alpha": 2.5, "points": [{"x": 0.0, "s": 1.0}]}));
        let path = dir.path().join(format!("c{n}{m}.csv"));
        let out = run_config("coeff", &cfg, &["--out", path.to_str().unwrap()]);
        assert_eq!(code(&out), 0);
        let text = std::fs::read_to_string(&path).unwrap();
        let row = &csv_rows(&text)[0];
        let want = if n == m { 1.0 } else { 0.0 };
        assert!((row[5] - want).abs() < 1e-13 && row[6].abs() < 1e-13, "{row:?}");
        tables.push((cfg, text));
    }
    let (cfg, first) = &tables[2];
    let again = run_config("coeff", cfg, &[]);
    assert_eq!(&String::from_utf8(again.stdout).unwrap(), first);
}

#[test]
fn cwt_of_atom_matches_coeff_table_and_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        &dir,
        "cwt.json",
        &json!({"signal": {"atom": {"m": 1, "alpha": 2.0, "at": {"x": 0.0, "s": 1.0}}}, "n": 0, "alpha": 2.0, "grid": small_grid()}),
    );
    let first = dir.path().join("a.bin");
    let second = dir.path().join("b.bin");
    assert_eq!(code(&run_config("cwt", &cfg, &["--out", first.to_str().unwrap()])), 0);
    assert_eq!(code(&run_config("cwt", &cfg, &["--out", second.to_str().unwrap()])), 0);
    assert_eq!(std::fs::read(&first).unwrap(), std::fs::read(&second).unwrap());

    let Container::Field(field) = container::read_path(&first).unwrap() else {
        panic!("expected a field container");
    };
    let grid = field.grid();
    let cells: Vec<usize> = (0..grid.len()).step_by(9973).collect();
    let points: Vec<Value> = cells
        .iter()
        .map(|&i| {
            let z = grid.center(i);
            json!({"x": z.x(), "s": z.s()})
        })
        .collect();
    let coeff_cfg = write_config(&dir, "coeff.json", &json!({"n": 0, "m": 1, "alpha": 2.0, "points": points}));
    let out = run_config("coeff", &coeff_cfg, &[]);
    assert_eq!(code(&out), 0);
    let rows = csv_rows(&String::from_utf8(out.stdout).unwrap());
    for (&i, row) in cells.iter().zip(&rows) {
        let v = field.values()[i];
        assert!((v.re - row[5]).abs() <= 1e-5 && (v.im - row[6]).abs() <= 1e-5, "cell {i}: {v} vs {row:?}");
    }
}

#[test]
fn cwt_on_under_resolved_grid_names_the_scale() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        &dir,
        "cwt.json",
        &json!({
            "signal": {"atom": {"m": 0, "alpha": 2.0, "at": {"x": 0.0, "s": 1.0}}},
            "n": 0,
            "alpha": 2.0,
            "grid": {"x_min": -8.0, "x_max": 8.0, "nx": 64, "s_min": 1.0, "s_max": 1.0e6, "ns": 32}
        }),
    );
    let out = run_config("cwt", &cfg, &["--out", dir.path().join("f.bin").to_str().unwrap()]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("scale s ="));
    assert_eq!(code(&run_config("cwt", &cfg, &[])), 2);
}

#[test]
fn sieve_cert_reports_every_scanned_radius() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        &dir,
        "cert.json",
        &json!({
            "grid": {"x_min": -2.0, "x_max": 2.0, "nx": 512, "s_min": 0.25, "s_max": 4.0, "ns": 256},
            "primitives": [{"kind": "disk", "center": {"x": 0.0, "s": 1.0}, "radius": 0.3}],
            "n": 0,
            "alpha": 2.0,
            "p": 2.0,
            "r_scan": [0.5, 0.7]
        }),
    );
    let out = run_config("sieve-cert", &cfg, &[]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let cert: Value = serde_json::from_slice(&out.stdout).unwrap();
    let bound = cert["bound"].as_f64().unwrap();
    assert!(bound > 0.0 && bound <= 1.0);
    assert!(cert["scan"].as_array().unwrap().len() >= 2);
    assert!(cert["region"]["measure_h"].as_f64().unwrap() > 0.0);
}

#[test]
fn orth_check_passes_and_fails_on_tolerance() {
    let dir = TempDir::new().unwrap();
    let sweep = json!({"n": [0, 1], "m": [0, 2], "k": [0, 2], "alpha": [1.5], "r": [0.6]});
    let cfg = write_config(&dir, "o.json", &json!({"double": sweep}));
    let out = run_config("orth-check", &cfg, &[]);
    assert_eq!(code(&out), 0);
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["double"].as_array().unwrap().len(), 8);
    assert!(report["passed"].as_bool().unwrap());

    let strict = write_config(&dir, "s.json", &json!({"double": {"n": [1], "m": [1], "k": [1], "alpha": [1.5], "r": [0.6], "tolerance": 1e-30}}));
    let out = run_config("orth-check", &strict, &[]);
    assert_eq!(code(&out), 1);
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["failures"].as_u64(), Some(1));
    assert_eq!(code(&run_config("orth-check", &write_config(&dir, "e.json", &json!({})), &[])), 2);
}

#[test]
fn recover_reproduces_truth_and_writes_the_field() {
    let dir = TempDir::new().unwrap();
    let grid = json!({"x_min": -2.0, "x_max": 2.0, "nx": 128, "s_min": 0.25, "s_max": 4.0, "ns": 64});
    let atoms = json!([
        {"location": {"x": 0.0, "s": 1.0}, "m": 0},
        {"location": {"x": 0.5, "s": 0.7}, "m": 0},
        {"location": {"x": -0.6, "s": 1.3}, "m": 1}
    ]);
    let hole = json!([{"kind": "disk", "center": {"x": 0.1, "s": 1.1}, "radius": 0.2}]);
    let field_path = dir.path().join("rec.bin");
    let cfg = write_config(
        &dir,
        "r.json",
        &json!({
            "grid": grid, "n": 0, "alpha": 3.0,
            "dictionary": {"atoms": atoms},
            "primitives": hole,
            "truth": [[0.7, -0.2], [0.0, 0.0], [0.3, 0.4]],
            "field_out": field_path
        }),
    );
    let out = run_config("recover", &cfg, &[]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(report["field_error"].as_f64().unwrap() <= 1e-8);
    assert_eq!(report["coeffs"].as_array().unwrap().len(), 3);
    assert!(matches!(container::read_path(&field_path).unwrap(), Container::Field(_)));

    let from_file = write_config(
        &dir,
        "o.json",
        &json!({
            "grid": grid, "n": 0, "alpha": 3.0,
            "dictionary": {"atoms": atoms},
            "primitives": hole,
            "observations": field_path
        }),
    );
    let out = run_config("recover", &from_file, &[]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    let c = report["coeffs"][0].as_array().unwrap();
    assert!((c[0].as_f64().unwrap() - 0.7).abs() < 1e-6 && (c[1].as_f64().unwrap() + 0.2).abs() < 1e-6);

    let both = write_config(
        &dir,
        "b.json",
        &json!({
            "grid": grid, "n": 0, "alpha": 3.0,
            "dictionary": {"atoms": atoms},
            "primitives": hole
        }),
    );
    assert_eq!(code(&run_config("recover", &both, &[])), 2);
}

#[test]
fn selftest_subset_passes_and_strict_scale_fails() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "t.json", &json!({"criteria": [1, 2, 4, 14]}));
    let out = run_config("selftest", &cfg, &[]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let reports: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(reports.as_array().unwrap().len(), 4);
    assert!(String::from_utf8_lossy(&out.stderr).lines().all(|l| l.starts_with("PASS")));

    let one = write_config(&dir, "one.json", &json!({"criteria": [4]}));
    let out = run_config("selftest", &one, &["--tolerance-scale", "1e-10"]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("FAIL"));

    let bad = write_config(&dir, "bad.json", &json!({"criteria": [99]}));
    assert_eq!(code(&run_config("selftest", &bad, &[])), 2);
}
