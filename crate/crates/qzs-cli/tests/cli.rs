//! End-to-end smoke tests driving the built binary.

use std::path::Path;
use std::process::{Command, Output};

use tempfile::tempdir;

fn qzs(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qzs"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn path_str(p: &Path) -> String {
    p.display().to_string()
}

#[test]
fn missing_instance_file_exits_one_with_a_message() {
    let out = qzs(&["solve", "--instance", "/no/such/file.json", "--out", "/tmp/x"]);
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("error:"), "stderr was: {stderr}");
}

#[test]
fn malformed_json_exits_one_with_a_message() {
    let dir = tempdir().expect("tempdir");
    let bad = dir.path().join("bad.instance.json");
    std::fs::write(&bad, "{ not json").expect("write");
    let out = qzs(&[
        "solve",
        "--instance",
        &path_str(&bad),
        "--out",
        &path_str(&dir.path().join("run")),
    ]);
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains(&path_str(&bad)), "stderr was: {stderr}");
}

#[test]
fn unknown_preset_exits_one_and_names_the_alternatives() {
    let dir = tempdir().expect("tempdir");
    let out = qzs(&[
        "gen",
        "--kind",
        "classical",
        "--preset",
        "no-such-game",
        "--out",
        &path_str(&dir.path().join("g")),
    ]);
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("matching-pennies"), "stderr was: {stderr}");
}

#[test]
fn gen_then_solve_converges_with_exit_zero() {
    let dir = tempdir().expect("tempdir");
    let gen_prefix = dir.path().join("mp");
    let out = qzs(&[
        "gen",
        "--kind",
        "classical",
        "--preset",
        "matching-pennies",
        "--out",
        &path_str(&gen_prefix),
    ]);
    assert_eq!(out.status.code(), Some(0), "gen failed: {}", String::from_utf8_lossy(&out.stderr));
    let instance = dir.path().join("mp.instance.json");
    assert!(instance.exists());

    let solve_prefix = dir.path().join("run");
    let out = qzs(&[
        "solve",
        "--instance",
        &path_str(&instance),
        "--algo",
        "ogda",
        "--eps",
        "1e-4",
        "--out",
        &path_str(&solve_prefix),
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "solve failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(dir.path().join("run.trace.jsonl").exists());
    assert!(dir.path().join("run.summary.json").exists());
    assert!(dir.path().join("run.manifest.json").exists());
}

#[test]
fn iteration_cap_maps_to_exit_two() {
    let dir = tempdir().expect("tempdir");
    let gen_prefix = dir.path().join("mp");
    let out = qzs(&[
        "gen",
        "--kind",
        "classical",
        "--preset",
        "matching-pennies",
        "--out",
        &path_str(&gen_prefix),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let out = qzs(&[
        "solve",
        "--instance",
        &path_str(&dir.path().join("mp.instance.json")),
        "--algo",
        "ogda",
        "--eps",
        "1e-9",
        "--max-iters",
        "10",
        "--out",
        &path_str(&dir.path().join("capped")),
    ]);
    assert_eq!(
        out.status.code(),
        Some(2),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn solve_manifest_rerun_is_bitwise_identical() {
    let dir = tempdir().expect("tempdir");
    let out = qzs(&[
        "gen",
        "--kind",
        "povm",
        "--dim-a",
        "2",
        "--dim-b",
        "2",
        "--outcomes",
        "3",
        "--seed",
        "5",
        "--out",
        &path_str(&dir.path().join("inst")),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let out = qzs(&[
        "solve",
        "--instance",
        &path_str(&dir.path().join("inst.instance.json")),
        "--algo",
        "itersmooth",
        "--eps",
        "1e-4",
        "--out",
        &path_str(&dir.path().join("run")),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let trace_path = dir.path().join("run.trace.jsonl");
    let summary_path = dir.path().join("run.summary.json");
    let first_trace = std::fs::read(&trace_path).expect("trace");
    let first_summary = std::fs::read(&summary_path).expect("summary");

    let out = qzs(&[
        "solve",
        "--manifest",
        &path_str(&dir.path().join("run.manifest.json")),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(std::fs::read(&trace_path).expect("trace"), first_trace);
    assert_eq!(std::fs::read(&summary_path).expect("summary"), first_summary);
}

#[test]
fn verify_filter_runs_only_the_named_check() {
    let out = qzs(&["verify", "--filter", "sandwich"]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let stdout = String::from_utf8_lossy(&out.stdout);
    let lines: Vec<&str> = stdout.lines().collect();
    assert_eq!(lines.len(), 1, "stdout was: {stdout}");
    assert!(lines[0].starts_with("pass  sandwich"));
}

#[test]
fn injected_gradient_sign_flip_fails_the_suite() {
    let out = qzs(&[
        "verify",
        "--filter",
        "gradient",
        "--inject-gradient-sign-flip",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("FAIL  gradient"), "stdout was: {stdout}");
}

#[test]
fn bench_writes_one_row_per_cell() {
    let dir = tempdir().expect("tempdir");
    let out = qzs(&[
        "gen",
        "--kind",
        "classical",
        "--preset",
        "tilted-pennies",
        "--out",
        &path_str(&dir.path().join("tp")),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let csv_path = dir.path().join("bench.csv");
    let out = qzs(&[
        "bench",
        "--instance",
        &path_str(&dir.path().join("tp.instance.json")),
        "--eps",
        "1e-2",
        "--eps",
        "1e-3",
        "--eps",
        "1e-4",
        "--out",
        &path_str(&csv_path),
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = std::fs::read_to_string(&csv_path).expect("csv");
    assert_eq!(text.lines().count(), 7, "csv was: {text}");
}
