//! End-to-end tests of the `nashflow` binary: flag surface, exit codes,
//! artifact layout, and CSV stability.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_nashflow"))
}

fn examples_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../examples")
}

fn run_args(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary should spawn")
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap_or_else(|e| panic!("reading {path:?}: {e}"))
}

/// Last recorded block of trajectory.csv as (player, coord) -> (state, cesaro).
fn final_block(csv: &str) -> Vec<(usize, usize, f64, f64)> {
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("t, player, coord, state, cesaro"));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(", ").collect()).collect();
    let last_t = rows.last().expect("nonempty csv")[0];
    rows.iter()
        .filter(|r| r[0] == last_t)
        .map(|r| {
            (
                r[1].parse::<usize>().unwrap(),
                r[2].parse::<usize>().unwrap(),
                r[3].parse::<f64>().unwrap(),
                r[4].parse::<f64>().unwrap(),
            )
        })
        .collect()
}

#[test]
fn appendix_b_reference_run_meets_tolerance() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("run");
    let output = run_args(&[
        "run",
        "--mode",
        "appendix-b",
        "--scheme",
        "interior-rk4",
        "--h",
        "1e-3",
        "--t-max",
        "100",
        "--gap-tol",
        "0.01",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&output.stderr));

    let trajectory = read(&out.join("trajectory.csv"));
    let block = final_block(&trajectory);
    assert_eq!(block.len(), 4);
    let expected = [(1, 1, 0.5), (1, 2, 0.5), (2, 1, 2.0 / 3.0), (2, 2, 1.0 / 3.0)];
    for ((player, coord, _state, cesaro), (ep, ec, val)) in block.iter().zip(expected) {
        assert_eq!((*player, *coord), (ep, ec));
        assert!(
            (cesaro - val).abs() <= 0.01,
            "cesaro {cesaro} vs {val} for player {player} coord {coord}"
        );
    }

    let gaps = read(&out.join("gaps.csv"));
    let mut glines = gaps.lines();
    assert_eq!(glines.next(), Some("t, gap"));
    let last = glines.last().unwrap().split(", ").nth(1).unwrap();
    assert!(last.parse::<f64>().unwrap() <= 0.01);

    let report = read(&out.join("report.txt"));
    assert!(report.contains("stop reason: gap-tol-met"));
    assert!(report.contains("monotonicity:"));
}

#[test]
fn identical_invocations_produce_identical_bytes() {
    let tmp = tempfile::tempdir().unwrap();
    let args = |out: &Path| {
        vec![
            "run".to_string(),
            "--mode".into(),
            "appendix-b".into(),
            "--t-max".into(),
            "5".into(),
            "--gap-tol".into(),
            "0".into(),
            "--out".into(),
            out.to_str().unwrap().to_string(),
        ]
    };
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    let out_a = bin().args(args(&a)).output().unwrap();
    let out_b = bin().args(args(&b)).output().unwrap();
    // gap_tol 0 is unreachable, so the horizon runs out: exit 2.
    assert_eq!(out_a.status.code(), Some(2));
    assert_eq!(out_b.status.code(), Some(2));
    assert_eq!(
        std::fs::read(a.join("trajectory.csv")).unwrap(),
        std::fs::read(b.join("trajectory.csv")).unwrap()
    );
    assert_eq!(
        std::fs::read(a.join("gaps.csv")).unwrap(),
        std::fs::read(b.join("gaps.csv")).unwrap()
    );
}

#[test]
fn malformed_input_exits_one_with_no_output() {
    let tmp = tempfile::tempdir().unwrap();
    let bad = tmp.path().join("bad.game");
    std::fs::write(&bad, "players = \"two\"\nactions = [").unwrap();
    let out = tmp.path().join("out");
    let output = run_args(&[
        "run",
        "--mode",
        "nplayer",
        "--input",
        bad.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("error"), "stderr: {stderr}");
    assert!(stderr.contains("bad.game"), "diagnostic should name the file: {stderr}");
    assert!(!out.exists(), "no artifacts may be written on input errors");
}

#[test]
fn zero_sum_contradiction_is_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let bad = tmp.path().join("claims.game");
    std::fs::write(
        &bad,
        "players = 2\nactions = [2, 2]\nzero_sum_expected = true\n\
         costs = [[1.0, 0.0, 0.0, 1.0], [1.0, 0.0, 0.0, 1.0]]\n",
    )
    .unwrap();
    let out = tmp.path().join("out");
    let output = run_args(&[
        "run",
        "--mode",
        "nplayer",
        "--input",
        bad.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&output.stderr).contains("zero_sum_expected"));
    assert!(!out.exists());
}

#[test]
fn nplayer_run_converges_on_the_shipped_benchmark() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("np");
    let input = examples_dir().join("appendix_b.game");
    let output = run_args(&[
        "run",
        "--mode",
        "nplayer",
        "--input",
        input.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&output.stderr));
    let block = final_block(&read(&out.join("trajectory.csv")));
    let expected = [(1, 1, 0.5), (1, 2, 0.5), (2, 1, 2.0 / 3.0), (2, 2, 1.0 / 3.0)];
    for ((_, _, _, cesaro), (_, _, val)) in block.iter().zip(expected) {
        assert!((cesaro - val).abs() <= 0.02, "cesaro {cesaro} vs {val}");
    }
    let report = read(&out.join("report.txt"));
    assert!(report.contains("pure-action check: certified-exhaustive"));
}

#[test]
fn symmetric_mode_converges_where_the_two_player_game_does_not_certify() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("sym");
    let input = examples_dir().join("kernel_symmetric.game");
    let output = run_args(&[
        "run",
        "--mode",
        "symmetric",
        "--input",
        input.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&output.stderr));
    let report = read(&out.join("report.txt"));
    // The shared-strategy flow meets the tolerance even though the base
    // two-player common-interest game is not monotone.
    assert!(report.contains("stop reason: gap-tol-met"));
    assert!(report.contains("pure-action check: violated"));
    assert!(report.contains("shared population strategy"));
}

#[test]
fn meanfield_report_names_the_vertex_state() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("mf");
    let input = examples_dir().join("phi.mfg");
    let output = run_args(&[
        "run",
        "--mode",
        "meanfield",
        "--input",
        input.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&output.stderr));
    let report = read(&out.join("report.txt"));
    assert!(
        report.contains("equilibrium vertex: state 1"),
        "report should name state 1:\n{report}"
    );
    assert!(report.contains("dominant cesaro state: state 1"));
}

#[test]
fn existing_output_requires_force() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("run");
    let base = [
        "run",
        "--mode",
        "appendix-b",
        "--t-max",
        "2",
        "--gap-tol",
        "0",
        "--out",
        out.to_str().unwrap(),
    ];
    assert_eq!(run_args(&base).status.code(), Some(2));

    let refused = run_args(&base);
    assert_eq!(refused.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&refused.stderr).contains("--force"));

    let mut forced = base.to_vec();
    forced.push("--force");
    assert_eq!(run_args(&forced).status.code(), Some(2));
}

#[test]
fn out_root_environment_variable_sets_the_default_directory() {
    let tmp = tempfile::tempdir().unwrap();
    let output = bin()
        .args(["run", "--mode", "appendix-b", "--t-max", "2", "--gap-tol", "0"])
        .env("NASHFLOW_OUT", tmp.path())
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
    assert!(tmp.path().join("appendix-b/trajectory.csv").exists());
}

#[test]
fn gaussian_check_mode_writes_the_estimator_table() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("gauss");
    let output = run_args(&[
        "run",
        "--mode",
        "gaussian-check",
        "--gaussian-n",
        "50000",
        "--seed",
        "1",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&output.stderr));
    let table = read(&out.join("gaussian.csv"));
    assert_eq!(table.lines().next(), Some("check, estimate, exact, tolerance, pass"));
    assert!(read(&out.join("report.txt")).contains("verdict: pass"));
}

#[test]
fn usage_errors_and_help_use_the_reserved_exit_codes() {
    assert_eq!(run_args(&["--help"]).status.code(), Some(0));
    assert_eq!(run_args(&["run", "--mode", "warp-drive"]).status.code(), Some(1));
    assert_eq!(run_args(&["run"]).status.code(), Some(1));
    // r0 outside [0, 0.5] is a domain error surfaced before any work.
    let out = run_args(&["run", "--mode", "appendix-b", "--r0", "0.7"]);
    assert_eq!(out.status.code(), Some(1));
}
