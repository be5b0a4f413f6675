use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn fpps(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fpps"))
        .args(args)
        .env_remove("FPPS_NODE_THRESHOLD")
        .env_remove("FPPS_HIGH_RESIDUAL")
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = fpps(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn path(dir: &Path, name: &str) -> String {
    dir.join(name).to_string_lossy().into_owned()
}

const SWEEP: [&str; 6] = ["--f-start", "20GHz", "--f-stop", "28GHz", "--f-count", "9"];

fn synth_uniform(dir: &Path, extra: &[&str]) -> PathBuf {
    let out = dir.join("traces");
    let out_s = out.to_string_lossy().into_owned();
    let mut args = vec!["synth", "uniform", "--a", "8mm", "--period", "3mm", "--dz", "0.5mm", "--count", "60", "-o", &out_s];
    args.extend(SWEEP);
    args.extend(extra);
    ok(&args);
    out
}

fn te10_reference(dir: &Path) -> String {
    let reference = path(dir, "te10.csv");
    let mut args = vec!["oracle", "te10", "--a", "8mm", "--period", "3mm", "-o", &reference];
    args.extend(SWEEP);
    ok(&args);
    reference
}

#[test]
fn synth_extract_compare_round_trip() {
    let dir = TempDir::new().unwrap();
    let traces = synth_uniform(dir.path(), &["--reflection", "0.8", "--reflection-phase", "40"]);
    let curve = path(dir.path(), "curve.csv");
    let report = path(dir.path(), "report.json");
    ok(&["extract", &traces.to_string_lossy(), "-o", &curve, "--report", &report]);
    let reference = te10_reference(dir.path());

    let json = ok(&["compare", &curve, &reference, "--tol", "1e-9"]);
    let parsed: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!(parsed["n_compared"], 9);

    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(report).unwrap()).unwrap();
    assert_eq!(report["n_points"], 9);
}

#[test]
fn shifted_curve_fails_the_tolerance() {
    let dir = TempDir::new().unwrap();
    let traces = synth_uniform(dir.path(), &[]);
    let curve = path(dir.path(), "curve.csv");
    ok(&["extract", &traces.to_string_lossy(), "--harmonic", "-1", "-o", &curve]);
    let reference = te10_reference(dir.path());
    let out = fpps(&["compare", &curve, &reference]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).starts_with("error[ToleranceExceeded]"));
}

#[test]
fn harmonic_shift_moves_beta_by_one_grating_vector() {
    let dir = TempDir::new().unwrap();
    let traces = synth_uniform(dir.path(), &[]);
    let base = ok(&["extract", &traces.to_string_lossy()]);
    let shifted = ok(&["extract", &traces.to_string_lossy(), "--harmonic", "-1"]);
    let step = 2.0 * std::f64::consts::PI / 0.003;
    for (a, b) in base.lines().zip(shifted.lines()).skip(1) {
        let beta = |line: &str| line.split(',').nth(1).unwrap().parse::<f64>().unwrap();
        assert!((beta(a) - step - beta(b)).abs() <= 1e-9 * step, "{a} / {b}");
    }
}

#[test]
fn noisy_synthesis_is_deterministic() {
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    let ta = synth_uniform(a.path(), &["--noise", "1e-3", "--seed", "7"]);
    let tb = synth_uniform(b.path(), &["--noise", "1e-3", "--seed", "7"]);
    for i in 0..9 {
        let name = format!("trace_{i:04}.trace");
        assert_eq!(std::fs::read(ta.join(&name)).unwrap(), std::fs::read(tb.join(&name)).unwrap());
    }
}

#[test]
fn zero_cells_is_an_input_error() {
    let dir = TempDir::new().unwrap();
    let out_dir = path(dir.path(), "p");
    let out = fpps(&[
        "synth", "periodic", "--a", "8mm", "--cell", "vacuum:3mm,eps2.2:3mm", "--cells", "0", "--f", "20GHz",
        "--dz", "0.25mm", "-o", &out_dir,
    ]);
    assert_eq!(out.status.code(), Some(2));
    let line = stderr(&out);
    assert!(line.starts_with("error["), "{line}");
    assert_eq!(line.trim_end().lines().count(), 1);
}

#[test]
fn misaligned_period_is_reported_by_tag() {
    let dir = TempDir::new().unwrap();
    let traces = synth_uniform(dir.path(), &[]);
    let source = traces.join("trace_0000.trace");
    let text = std::fs::read_to_string(&source).unwrap();
    let data: String = text.lines().filter(|l| !l.starts_with('#')).map(|l| format!("{l}\n")).collect();
    let csv = dir.path().join("export.csv");
    std::fs::write(&csv, data).unwrap();
    let mapping = dir.path().join("map.txt");
    std::fs::write(&mapping, "skip_rows=1\nz_column=0\nre_column=1\nim_column=2\n").unwrap();
    let imported = path(dir.path(), "imported.trace");
    let import = fpps(&[
        "import", &csv.to_string_lossy(), "--mapping", &mapping.to_string_lossy(), "--f", "20GHz",
        "--period", "3.25mm", "-o", &imported,
    ]);
    assert!(import.status.success(), "{}", stderr(&import));
    let out = fpps(&["extract", &imported]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).starts_with("error[PeriodGridMismatchError]"), "{}", stderr(&out));
}

#[test]
fn tem_oracle_is_the_medium_wavenumber() {
    let out = ok(&["oracle", "te10", "--tem", "--er", "4", "--f-start", "10GHz", "--f-stop", "12GHz", "--f-count", "2", "--period", "1cm"]);
    let row = out.lines().nth(1).unwrap();
    let beta: f64 = row.split(',').nth(1).unwrap().parse().unwrap();
    let expected = 2.0 * 2.0 * std::f64::consts::PI * 10e9 / 299_792_458.0;
    assert!((beta - expected).abs() <= 1e-12 * expected, "{beta} vs {expected}");
}

#[test]
fn bloch_oracle_reports_the_first_stopband() {
    let dir = TempDir::new().unwrap();
    let report = path(dir.path(), "bloch.json");
    ok(&[
        "oracle", "bloch", "--a", "8mm", "--cell", "vacuum:3mm,eps2.2:3mm", "--f-start", "15GHz", "--f-stop",
        "40GHz", "--f-count", "251", "--report", &report,
    ]);
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(report).unwrap()).unwrap();
    let bands = json["stopbands"].as_array().unwrap();
    assert!(!bands.is_empty(), "{json}");
    assert_eq!(bands[0]["multiple_of_pi"], 1);
}

#[test]
fn unknown_unit_is_a_usage_error() {
    let out = fpps(&["oracle", "te10", "--a", "8furlongs", "--f", "10GHz", "--period", "3mm"]);
    assert_eq!(out.status.code(), Some(2));
}
