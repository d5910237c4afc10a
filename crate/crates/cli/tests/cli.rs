use std::fs;
use std::path::Path;
use std::process::{Command, Output};
use std::sync::OnceLock;

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_gabor-zz"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not JSON ({e}); stderr: {}",
            String::from_utf8_lossy(&out.stderr)
        )
    })
}

fn validator() -> &'static jsonschema::Validator {
    static V: OnceLock<jsonschema::Validator> = OnceLock::new();
    V.get_or_init(|| {
        let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("schema/analysis_report.schema.json");
        let schema: Value = serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap();
        jsonschema::validator_for(&schema).unwrap()
    })
}

fn assert_valid(report: &Value) {
    let errors: Vec<String> = validator().iter_errors(report).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "schema errors: {errors:#?}");
}

fn analyze(args: &[&str]) -> (Output, Value) {
    let mut all = vec!["analyze"];
    all.extend_from_slice(args);
    let out = run(&all);
    let report = json(&out);
    assert_valid(&report);
    (out, report)
}

fn claim(report: &Value, which: &str) -> (String, String) {
    let c = &report["verdicts"][which];
    (c["answer"].as_str().unwrap().into(), c["tier"].as_str().unwrap().into())
}

fn pair(a: &str, b: &str) -> (String, String) {
    (a.into(), b.into())
}

#[test]
fn gaussian_critical_density_is_complete_but_not_a_frame() {
    let dir = tempfile::tempdir().unwrap();
    let window = dir.path().join("gaussian.json");
    fs::write(&window, r#"{"variant": "gaussian"}"#).unwrap();
    let (out, r) = analyze(&["--window", window.to_str().unwrap(), "--alpha", "1", "--p", "1", "--q", "1"]);
    assert!(out.status.success());
    assert_eq!(claim(&r, "complete"), pair("yes", "certified"));
    assert_eq!(claim(&r, "frame"), pair("no", "numerical"));
    assert_eq!(r["theta"]["certificate"]["kind"], "witness");
    assert_eq!(r["zibulski"]["fine"]["deficient_fraction"], 0.0);
    assert!(r.get("timing_ms").is_none());
}

#[test]
fn first_hermite_function_is_complete_at_half_density() {
    let dir = tempfile::tempdir().unwrap();
    let window = dir.path().join("hermite1.json");
    fs::write(&window, r#"{"variant": "hermite", "n": 1}"#).unwrap();
    let (out, r) = analyze(&["--window", window.to_str().unwrap(), "--alpha", "1", "--p", "1", "--q", "2"]);
    assert!(out.status.success());
    assert_eq!(claim(&r, "complete"), pair("yes", "certified"));
    let sweep = r["oracle"]["sweep"].as_array().unwrap();
    let residuals: Vec<f64> = sweep.iter().map(|s| s["residual"].as_f64().unwrap()).collect();
    assert!(residuals.windows(2).all(|w| w[1] < w[0]), "{residuals:?}");
}

#[test]
fn bump_with_gaps_is_incomplete() {
    let dir = tempfile::tempdir().unwrap();
    let window = dir.path().join("bump.json");
    fs::write(&window, r#"{"variant": "compact_bump", "support": [0, 1]}"#).unwrap();
    let (out, r) = analyze(&["--window", window.to_str().unwrap(), "--alpha", "2", "--p", "1", "--q", "2"]);
    assert!(out.status.success());
    assert_eq!(claim(&r, "complete"), pair("no", "numerical"));
    assert_eq!(claim(&r, "frame"), pair("no", "numerical"));
    assert_eq!(r["theta"]["certificate"]["reason"], "outside_analytic_class");
    assert!(r["zibulski"]["coarse"]["deficient_fraction"].as_f64().unwrap() >= 0.45);
}

#[test]
fn undersampled_lattice_is_not_certified_incomplete() {
    let (out, r) = analyze(&["--window", "gaussian", "--alpha", "1", "--p", "3", "--q", "2", "--grid", "8x8"]);
    assert!(out.status.success());
    assert_eq!(r["theta"]["certificate"]["kind"], "incomplete_by_density");
    assert_eq!(claim(&r, "complete"), pair("no", "numerical"));
}

#[test]
fn reports_are_reproducible() {
    let args = ["analyze", "--window", "hermite:2", "--alpha", "1", "--p", "2", "--q", "3", "--grid", "8x8"];
    let a = run(&args);
    let b = run(&args);
    let mut single = vec!["--threads", "1"];
    single.extend_from_slice(&args);
    let c = run(&single);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.stdout, c.stdout);
}

#[test]
fn timing_is_opt_in() {
    let (_, r) = analyze(&["--window", "gaussian", "--alpha", "1", "--p", "1", "--q", "2", "--grid", "4x4", "--timing"]);
    let t = r["timing_ms"].as_object().unwrap();
    assert!(t.contains_key("zibulski") && t.contains_key("theta") && t.contains_key("oracle"));
}

#[test]
fn config_file_with_inline_window_and_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    fs::write(
        &cfg,
        r#"{"window": {"variant": "hermite", "n": 2}, "alpha": 1, "p": 1, "q": 2,
            "grid": "8x8", "sizes": [1, 2], "test_function": "narrow-gaussian"}"#,
    )
    .unwrap();
    let (out, r) = analyze(&["--config", cfg.to_str().unwrap(), "--q", "3"]);
    assert!(out.status.success());
    assert_eq!(r["window"]["n"], 2);
    assert_eq!(r["lattice"]["q"], 3);
    assert_eq!(r["grid"]["fine"], serde_json::json!([16, 16]));
    assert_eq!(r["oracle"]["sweep"].as_array().unwrap().len(), 2);
    assert_eq!(r["oracle"]["test_function"]["kind"], "narrow_gaussian");
}

#[test]
fn csv_sidecars() {
    let dir = tempfile::tempdir().unwrap();
    let csv_dir = dir.path().join("csv");
    let out = run(&[
        "analyze", "--window", "gaussian", "--alpha", "1", "--p", "1", "--q", "2", "--grid", "4x6",
        "--csv-dir", csv_dir.to_str().unwrap(), "--out", dir.path().join("r.json").to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let report: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("r.json")).unwrap()).unwrap();
    assert_valid(&report);
    for (name, rows) in [("field_4x6.csv", 24), ("field_8x12.csv", 96)] {
        let text = fs::read_to_string(csv_dir.join(name)).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "x,xi,detA_abs,sigma_min,sigma_max");
        assert_eq!(lines.count(), rows);
    }
    let sweep = fs::read_to_string(csv_dir.join("sweep.csv")).unwrap();
    assert!(sweep.starts_with("size,residual\n2,"));
    assert_eq!(sweep.lines().count(), 4);
}

#[test]
fn numerical_failure_keeps_partial_report() {
    let (out, r) = analyze(&["--window", "gaussian", "--alpha", "1", "--p", "12", "--q", "13", "--grid", "4x4", "--sizes", "1"]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(r["errors"][0]["stage"], "theta");
    assert!(r["theta"].is_null());
    assert!(r["zibulski"].is_object());
    assert_ne!(r["verdicts"]["complete"]["tier"], "certified");
}

#[test]
fn configuration_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad_json = dir.path().join("bad.json");
    fs::write(&bad_json, "{ not json").unwrap();
    let unknown = dir.path().join("unknown.json");
    fs::write(&unknown, r#"{"variant": "gaussian", "colour": 1}"#).unwrap();
    let misplaced = dir.path().join("misplaced.json");
    fs::write(&misplaced, r#"{"variant": "gaussian", "n": 3}"#).unwrap();
    let slow = dir.path().join("slow.json");
    fs::write(&slow, r#"{"variant": "gaussian", "gamma": 1e-12}"#).unwrap();
    let cases: Vec<Vec<&str>> = vec![
        vec!["analyze", "--window", "missing.json", "--alpha", "1", "--p", "1", "--q", "1"],
        vec!["analyze", "--window", bad_json.to_str().unwrap(), "--alpha", "1", "--p", "1", "--q", "1"],
        vec!["analyze", "--window", unknown.to_str().unwrap(), "--alpha", "1", "--p", "1", "--q", "1"],
        vec!["analyze", "--window", misplaced.to_str().unwrap(), "--alpha", "1", "--p", "1", "--q", "1"],
        vec!["analyze", "--window", slow.to_str().unwrap(), "--alpha", "1", "--p", "1", "--q", "1"],
        vec!["analyze", "--window", "gaussian", "--alpha", "1", "--p", "0", "--q", "1"],
        vec!["analyze", "--window", "gaussian", "--alpha", "1", "--p", "1", "--q", "1", "--grid", "1x8"],
        vec!["analyze", "--window", "gaussian", "--alpha", "1", "--p", "1"],
        vec!["analyze", "--window", "hermite:x", "--alpha", "1", "--p", "1", "--q", "1"],
        vec!["scan", "--window", "gaussian", "--alpha", "1", "--lattices", "1:2"],
        vec!["theta", "--window", "gaussian", "--alpha", "1", "--p", "1", "--q", "2", "--cols", "2", "--x", "0", "--n", "0"],
        vec!["theta", "--window", "gaussian", "--alpha", "1", "--p", "1", "--q", "2", "--cols", "0"],
        vec!["reconstruct", "--window", "gaussian", "--alpha", "1", "--p", "1", "--q", "2", "--step", "0.3"],
        vec!["oracle", "--window", "gaussian", "--alpha", "1", "--p", "1", "--q", "1", "--solver", "qr"],
        vec!["--threads", "0", "oracle", "--window", "gaussian", "--alpha", "1", "--p", "1", "--q", "1"],
    ];
    for args in cases {
        let out = run(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        assert!(!out.stderr.is_empty());
    }
}

fn scan(args: &[&str]) -> Vec<Vec<String>> {
    let mut all = vec!["scan"];
    all.extend_from_slice(args);
    let out = run(&all);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let mut reader = csv::Reader::from_reader(out.stdout.as_slice());
    let header: Vec<String> = reader.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(
        header,
        [
            "p", "q", "density", "deficient_fraction", "a_est", "b_est", "witness_found", "certificate", "complete",
            "complete_tier", "frame", "frame_tier", "error"
        ]
    );
    reader
        .records()
        .map(|r| r.unwrap().iter().map(String::from).collect())
        .collect()
}

#[test]
fn scan_gaussian_densities() {
    let rows = scan(&["--window", "gaussian", "--alpha", "1", "--lattices", "1/2,2/3,1/1,3/2", "--grid", "16x16"]);
    assert_eq!(rows.len(), 4);
    for row in &rows[..3] {
        assert_eq!(row[6], "true", "{row:?}");
        assert_eq!(row[8..10], ["yes", "certified"]);
    }
    assert_eq!(rows[3][6], "false");
    assert_eq!(rows[3][7], "incomplete_by_density");
    assert_eq!(rows[3][3], "1");
}

#[test]
fn scan_second_hermite_function() {
    let rows = scan(&["--window", "hermite:2", "--alpha", "1", "--lattices", "1/2,3/4,1/1", "--grid", "16x16"]);
    assert!(rows.iter().all(|r| r[6] == "true" && r[12].is_empty()), "{rows:?}");
}

#[test]
fn scan_records_failed_rows_and_continues() {
    let out = run(&["scan", "--window", "gaussian", "--alpha", "1", "--lattices", "0/1,1/2", "--grid", "4x4"]);
    assert_eq!(out.status.code(), Some(3));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("0,1,0,,") && lines[1].contains("invalid lattice"), "{}", lines[1]);
    assert!(lines[2].contains(",true,witness,"), "{}", lines[2]);
}

#[test]
fn theta_value_and_search() {
    let out = run(&["theta", "--window", "gaussian", "--alpha", "1", "--p", "1", "--q", "1", "--cols", "0", "--x", "0", "--n", "0"]);
    assert!(out.status.success());
    let v = json(&out);
    // Θ_0 at x = 0 is g(0) = 1
    assert!((v["re"].as_f64().unwrap() - 1.0).abs() <= v["error_bound"].as_f64().unwrap());
    let out = run(&["theta", "--window", "hermite:3", "--alpha", "1", "--p", "2", "--q", "3"]);
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["certificate"]["kind"], "witness");
    assert_eq!(v["search"]["eps"], 1e-10);
}

fn reconstruct(args: &[&str]) -> Value {
    let mut all = vec!["reconstruct"];
    all.extend_from_slice(args);
    let out = run(&all);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    json(&out)
}

#[test]
fn reconstruct_window_in_frame_case() {
    let dir = tempfile::tempdir().unwrap();
    let csv_path = dir.path().join("samples.csv");
    let r = reconstruct(&[
        "--window", "gaussian", "--alpha", "1", "--p", "1", "--q", "2", "--csv", csv_path.to_str().unwrap(),
    ]);
    assert!(r["relative_error"].as_f64().unwrap() <= 1e-3);
    assert_eq!(r["unstable"], false);
    assert!(r["cutoff_cells"].as_array().unwrap().is_empty());
    let text = fs::read_to_string(csv_path).unwrap();
    assert!(text.starts_with("t,input_re,input_im,output_re,output_im\n-8,"));
    assert_eq!(text.lines().count(), 1 + r["sampling"]["len"].as_u64().unwrap() as usize);
}

#[test]
fn reconstruct_flags_cells_at_the_zak_zero() {
    let r = reconstruct(&["--window", "gaussian", "--alpha", "1", "--p", "1", "--q", "1"]);
    let cells = r["cutoff_cells"].as_array().unwrap();
    assert!(!cells.is_empty());
    for c in cells {
        let (x, xi) = (c[0].as_f64().unwrap(), c[1].as_f64().unwrap());
        assert!((x - 0.5).abs() <= 0.1 && (xi - 0.5).abs() <= 0.1, "{c}");
    }
    assert!(r["warnings"].as_array().unwrap().iter().any(|w| w.as_str().unwrap().contains("cutoff")));
}

#[test]
fn reconstruct_zero() {
    let r = reconstruct(&["--window", "hermite:1", "--alpha", "1", "--p", "1", "--q", "2", "--signal", "zero"]);
    assert!(r["relative_error"].is_null());
    assert_eq!(r["max_abs_error"], 0.0);
}

#[test]
fn oracle_csv_and_json() {
    let dir = tempfile::tempdir().unwrap();
    let csv_path = dir.path().join("sweep.csv");
    let out = run(&[
        "oracle", "--window", "bump:0,0.6", "--alpha", "1", "--p", "1", "--q", "2", "--sizes", "1,2",
        "--test-function", "bump:0.65,0.95", "--solver", "pinv", "--csv", csv_path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["solver"]["kind"], "pinv");
    for s in v["sweep"].as_array().unwrap() {
        assert!((s["residual"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    }
    let text = fs::read_to_string(csv_path).unwrap();
    assert_eq!(text.lines().next(), Some("size,residual"));
    assert_eq!(text.lines().count(), 3);
}
