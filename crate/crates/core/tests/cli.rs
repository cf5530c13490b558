use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tod_jumps::detector::{detect_jumps, DetectorConfig};
use tod_jumps::grid::{load_returns, Layout};
use tod_jumps::io::parse_truth_csv;
use tod_jumps::simulator::{evaluate_indices, simulate_path, SimConfig};

fn run(cwd: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tod-jumps"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("spawn")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write_returns(path: &Path, values: &[f64]) {
    let text: String = values.iter().map(|v| format!("{v}\n")).collect();
    fs::write(path, text).unwrap();
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn simulate(dir: &Path, extra: &[&str]) {
    let mut args = vec![
        "simulate",
        "--days",
        "40",
        "--seed",
        "5",
        "--out-dir",
        "sim",
    ];
    args.extend_from_slice(extra);
    let o = run(dir, &args);
    assert!(o.status.success(), "{}", stderr(&o));
}

#[test]
fn tod_writes_profile() {
    let dir = tempfile::tempdir().unwrap();
    let values: Vec<f64> = (0..40)
        .map(|k| 0.001 * (1.0 + (k % 3) as f64) * if k % 2 == 0 { 1.0 } else { -1.0 })
        .collect();
    write_returns(&dir.path().join("r.txt"), &values);
    let o = run(
        dir.path(),
        &["tod", "--input", "r.txt", "--m", "4", "--out-dir", "out"],
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    for f in ["tod.json", "tod.csv", "tod_plot.csv", "manifest.json"] {
        assert!(dir.path().join("out").join(f).exists(), "{f}");
    }
    assert!(!dir.path().join("out/tod_capped.csv").exists());
    let plot = fs::read_to_string(dir.path().join("out/tod_plot.csv")).unwrap();
    assert!(plot.starts_with("slot,tod\n"));
    assert_eq!(plot.lines().count(), 5);

    let o = run(
        dir.path(),
        &[
            "tod",
            "--input",
            "r.txt",
            "--m",
            "4",
            "--cap",
            "1.0",
            "--format",
            "json",
            "--out-dir",
            "capped",
        ],
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let raw = json(&dir.path().join("capped/tod.json"));
    let capped = json(&dir.path().join("capped/tod_capped.json"));
    assert!(!dir.path().join("capped/tod.csv").exists());
    for (r, c) in raw["tod"]
        .as_array()
        .unwrap()
        .iter()
        .zip(capped["tod"].as_array().unwrap())
    {
        assert_eq!(c.as_f64().unwrap(), r.as_f64().unwrap().min(1.0));
    }
    let manifest = json(&dir.path().join("capped/manifest.json"));
    assert_eq!(manifest["command"], "tod");
    assert_eq!(manifest["inputs"][0]["sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn remainder_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    write_returns(&dir.path().join("r.txt"), &[0.01; 10]);
    let o = run(dir.path(), &["tod", "--input", "r.txt", "--m", "4"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("remainder 2"), "{}", stderr(&o));
}

#[test]
fn bad_line_reports_location() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("r.txt"), "0.1\n0.2\nabc\n0.3\n").unwrap();
    let o = run(dir.path(), &["detect", "--input", "r.txt", "--m", "2"]);
    assert_eq!(o.status.code(), Some(3));
    let err = stderr(&o);
    assert!(err.contains("r.txt") && err.contains('3'), "{err}");
}

#[test]
fn missing_input_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["detect", "--input", "nope.txt"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn zero_returns_give_zero_jumps() {
    let dir = tempfile::tempdir().unwrap();
    write_returns(&dir.path().join("z.txt"), &[0.0; 154]);
    let o = run(
        dir.path(),
        &["detect", "--input", "z.txt", "--out-dir", "out"],
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("total: 0 jumps"), "{out}");
    assert!(out.contains("warning"), "{out}");
    let csv = fs::read_to_string(dir.path().join("out/jumps.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1, "{csv}");
}

#[test]
fn usage_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        dir.path(),
        &["detect", "--input", "x.txt", "--no-such-flag"],
    );
    assert_eq!(o.status.code(), Some(2));
    let o = run(
        dir.path(),
        &["detect", "--input", "x.txt", "--size-mode", "maybe"],
    );
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn invalid_detector_config_exits_four() {
    let dir = tempfile::tempdir().unwrap();
    write_returns(&dir.path().join("r.txt"), &[0.01, -0.02, 0.01, 0.03]);
    let o = run(
        dir.path(),
        &[
            "detect",
            "--input",
            "r.txt",
            "--m",
            "2",
            "--max-rounds",
            "0",
        ],
    );
    assert_eq!(o.status.code(), Some(4), "{}", stderr(&o));
    let o = run(
        dir.path(),
        &["detect", "--input", "r.txt", "--m", "2", "--cap=0"],
    );
    assert_eq!(o.status.code(), Some(4), "{}", stderr(&o));
}

#[test]
fn non_convergence_is_flagged_not_fatal() {
    let dir = tempfile::tempdir().unwrap();
    simulate(dir.path(), &["--hawkes-mu", "400"]);
    let o = run(
        dir.path(),
        &[
            "detect",
            "--input",
            "sim/returns.txt",
            "--max-rounds",
            "1",
            "--out-dir",
            "det",
        ],
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("no convergence"), "{}", stdout(&o));
    assert_eq!(json(&dir.path().join("det/jumps.json"))["converged"], false);
}

#[test]
fn simulate_rejects_explosive_hawkes() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        dir.path(),
        &[
            "simulate",
            "--hawkes-alpha",
            "3000",
            "--hawkes-beta",
            "2000",
            "--out-dir",
            "sim",
        ],
    );
    assert_eq!(o.status.code(), Some(4));
    assert!(stderr(&o).contains("hawkes.alpha"), "{}", stderr(&o));
}

#[test]
fn simulate_rejects_unknown_config_field() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("c.json"), r#"{"days": 3, "sigma": 1}"#).unwrap();
    let o = run(
        dir.path(),
        &["simulate", "--config", "c.json", "--out-dir", "sim"],
    );
    assert_eq!(o.status.code(), Some(4), "{}", stderr(&o));
}

#[test]
fn simulate_without_jumps_writes_empty_truth() {
    let dir = tempfile::tempdir().unwrap();
    simulate(dir.path(), &["--hawkes-mu", "0"]);
    let truth = fs::read_to_string(dir.path().join("sim/truth.csv")).unwrap();
    assert_eq!(truth, "index,time_years,size\n");
}

#[test]
fn simulate_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    simulate(dir.path(), &[]);
    let first = fs::read(dir.path().join("sim/manifest.json")).unwrap();
    let returns = fs::read(dir.path().join("sim/returns.txt")).unwrap();
    simulate(dir.path(), &[]);
    assert_eq!(
        first,
        fs::read(dir.path().join("sim/manifest.json")).unwrap()
    );
    assert_eq!(
        returns,
        fs::read(dir.path().join("sim/returns.txt")).unwrap()
    );

    let o = run(
        dir.path(),
        &[
            "simulate",
            "--days",
            "40",
            "--seed",
            "6",
            "--out-dir",
            "other",
        ],
    );
    assert!(o.status.success());
    assert_ne!(
        returns,
        fs::read(dir.path().join("other/returns.txt")).unwrap()
    );
}

#[test]
fn config_file_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    simulate(dir.path(), &[]);
    let o = run(
        dir.path(),
        &[
            "simulate",
            "--config",
            "sim/config.json",
            "--out-dir",
            "again",
        ],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(
        fs::read(dir.path().join("sim/returns.txt")).unwrap(),
        fs::read(dir.path().join("again/returns.txt")).unwrap()
    );
}

#[test]
fn pipeline_matches_library_evaluation() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    simulate(d, &["--hawkes-mu", "200"]);
    let o = run(
        d,
        &["detect", "--input", "sim/returns.txt", "--out-dir", "det"],
    );
    assert!(o.status.success(), "{}", stderr(&o));

    let mut recalls = Vec::new();
    for tol in ["0", "2"] {
        let out = format!("val{tol}");
        let o = run(
            d,
            &[
                "validate",
                "--sim-dir",
                "sim",
                "--detect-dir",
                "det",
                "--tolerance",
                tol,
                "--out-dir",
                &out,
            ],
        );
        assert!(o.status.success(), "{}", stderr(&o));
        recalls.push(json(&d.join(&out).join("metrics.json")));
    }
    let metrics = &recalls[0];

    // same artifacts through the library
    let grid = load_returns(
        &d.join("sim/returns.txt"),
        77,
        Layout::Returns,
        1.0 / 19404.0,
    )
    .unwrap();
    let report = detect_jumps(&grid, &DetectorConfig::default()).unwrap();
    let (truth, sizes) = parse_truth_csv(
        &fs::read_to_string(d.join("sim/truth.csv")).unwrap(),
        Path::new("truth.csv"),
    )
    .unwrap();
    let lib = evaluate_indices(
        &report.jump_indices,
        &report.sizes_deterministic,
        &truth,
        &sizes,
        0,
    )
    .unwrap();
    assert!(lib.actual > 0);
    assert_eq!(metrics["true_positives"], lib.true_positives);
    assert_eq!(metrics["false_positives"], lib.false_positives);
    assert_eq!(metrics["false_negatives"], lib.false_negatives);
    assert_eq!(metrics["detected"], report.total());

    // and against the in-memory simulation
    let config: SimConfig =
        serde_json::from_str(&fs::read_to_string(d.join("sim/config.json")).unwrap()).unwrap();
    let path = simulate_path(&config).unwrap();
    assert_eq!(path.true_jump_indices, truth);

    let r0 = recalls[0]["recall"].as_f64().unwrap();
    let r2 = recalls[1]["recall"].as_f64().unwrap();
    assert!(r2 >= r0);
}

#[test]
fn validate_rejects_mismatched_dimensions() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    simulate(d, &[]);
    let o = run(d, &["simulate", "--days", "20", "--out-dir", "short"]);
    assert!(o.status.success());
    let o = run(
        d,
        &["detect", "--input", "short/returns.txt", "--out-dir", "det"],
    );
    assert!(o.status.success());
    let o = run(
        d,
        &[
            "validate",
            "--sim-dir",
            "sim",
            "--detect-dir",
            "det",
            "--out-dir",
            "v",
        ],
    );
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn rand_size_mode_adds_column_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    simulate(d, &["--hawkes-mu", "200"]);
    let args = [
        "detect",
        "--input",
        "sim/returns.txt",
        "--size-mode",
        "rand",
        "--seed",
        "3",
        "--out-dir",
    ];
    let mut a = args.to_vec();
    a.push("a");
    let mut b = args.to_vec();
    b.push("b");
    assert!(run(d, &a).status.success());
    assert!(run(d, &b).status.success());
    let csv = fs::read_to_string(d.join("a/jumps.csv")).unwrap();
    assert!(csv.lines().next().unwrap().ends_with(",size_randomized"));
    assert!(csv.lines().count() > 1);
    assert_eq!(csv, fs::read_to_string(d.join("b/jumps.csv")).unwrap());
    assert_eq!(json(&d.join("a/manifest.json"))["seed"], 3);
}
