//! End-to-end CLI tests: the exit-code contract, the strict run-spec
//! schema, and byte-identical replays of every subcommand.

use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_regretlab"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("regretlab-cli-{}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn simulate_writes_transcript_and_summary() {
    let out = scratch("sim1.txt");
    let output = run(&[
        "simulate",
        "--n",
        "200",
        "--experts",
        "5",
        "--adversary",
        "greedy",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(output.status.success());
    let stdout = String::from_utf8(output.stdout).unwrap();
    assert!(stdout.starts_with("regret="));
    assert!(stdout.contains("satisfied=true"));

    let transcript = fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = transcript.lines().collect();
    assert_eq!(lines.len(), 201); // header + one line per round
    assert!(lines[0].starts_with('{'));
}

#[test]
fn identical_invocations_are_byte_identical() {
    let cases: Vec<Vec<String>> = vec![
        vec![
            "simulate".into(),
            "--n".into(),
            "150".into(),
            "--experts".into(),
            "4".into(),
            "--seed".into(),
            "99".into(),
            "--mode".into(),
            "randomized".into(),
        ],
        vec![
            "verify-potential".into(),
            "--experts".into(),
            "6".into(),
            "--samples".into(),
            "50".into(),
        ],
        vec![
            "minimax".into(),
            "--n".into(),
            "2".into(),
            "--table".into(),
            "-".into(),
        ],
        vec![
            "sweep".into(),
            "--param".into(),
            "eta".into(),
            "--values".into(),
            "0.9,1.1774,1.5".into(),
            "--n".into(),
            "80".into(),
        ],
    ];
    for (i, case) in cases.iter().enumerate() {
        let mut first_args: Vec<String> = case.clone();
        let mut second_args: Vec<String> = case.clone();
        let (out_a, out_b) = (
            scratch(&format!("det-{i}-a.txt")),
            scratch(&format!("det-{i}-b.txt")),
        );
        if case[0] == "simulate" {
            first_args.extend(["--out".into(), out_a.to_str().unwrap().into()]);
            second_args.extend(["--out".into(), out_b.to_str().unwrap().into()]);
        }
        let first = bin().args(&first_args).output().unwrap();
        let second = bin().args(&second_args).output().unwrap();
        assert_eq!(first.status.code(), second.status.code(), "case {i}");
        assert_eq!(first.stdout, second.stdout, "case {i} stdout differs");
        if case[0] == "simulate" {
            assert_eq!(
                fs::read(&out_a).unwrap(),
                fs::read(&out_b).unwrap(),
                "case {i} files differ"
            );
        }
    }
    println!("acceptance: byte-identical replays for all four subcommands PASS");
}

#[test]
fn invalid_inputs_exit_2() {
    assert_eq!(run(&["simulate", "--n", "0"]).status.code(), Some(2));
    assert_eq!(
        run(&["sweep", "--param", "eta", "--values", ""])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        run(&["minimax", "--n", "9"]).status.code(),
        Some(2),
        "horizon beyond the oracle cap"
    );
    assert_eq!(
        run(&["simulate", "--loss", "non-convex"]).status.code(),
        Some(2),
        "non-convex fixture needs randomized mode"
    );
}

#[test]
fn broken_certificate_exits_1_and_reports_excess() {
    let eta = (2.0f64 * 10f64.ln()).sqrt();
    let output = run(&[
        "verify-potential",
        "--experts",
        "10",
        "--eta",
        &eta.to_string(),
        "--c",
        &(eta / 4.0).to_string(),
    ]);
    assert_eq!(output.status.code(), Some(1));
    let stdout = String::from_utf8(output.stdout).unwrap();
    assert!(stdout.contains("max_hessian_excess="));
    assert!(stdout.contains("passed=false"));
}

#[test]
fn healthy_certificates_exit_0() {
    let eta = (2.0f64 * 10f64.ln()).sqrt();
    let output = run(&[
        "verify-potential",
        "--experts",
        "10",
        "--eta",
        &eta.to_string(),
    ]);
    assert_eq!(output.status.code(), Some(0));
    assert!(String::from_utf8(output.stdout)
        .unwrap()
        .contains("passed=true"));

    // single expert is trivially certified
    assert_eq!(
        run(&["verify-potential", "--experts", "1"]).status.code(),
        Some(0)
    );

    // composite code path reproduces the exponential result
    assert_eq!(
        run(&[
            "verify-potential",
            "--kind",
            "composite-exp",
            "--experts",
            "4"
        ])
        .status
        .code(),
        Some(0)
    );
}

#[test]
fn axis_grid_points_are_checked_within_budget() {
    let output = run(&[
        "verify-potential",
        "--experts",
        "2",
        "--samples",
        "10",
        "--grid",
        "5",
    ]);
    assert_eq!(output.status.code(), Some(0));
    // 10 samples plus the 5x5 lattice
    assert!(String::from_utf8(output.stdout)
        .unwrap()
        .contains("points_checked=35"));

    let over = run(&["verify-potential", "--experts", "4", "--grid", "2000"]);
    assert_eq!(over.status.code(), Some(2));
}

#[test]
fn vertex_scan_above_20_dims_needs_sampled_h() {
    let refused = run(&["verify-potential", "--experts", "25"]);
    assert_eq!(refused.status.code(), Some(2));
    assert!(String::from_utf8(refused.stderr)
        .unwrap()
        .contains("--sampled-h"));

    let sampled = run(&["verify-potential", "--experts", "25", "--sampled-h", "64"]);
    assert_eq!(sampled.status.code(), Some(0));
}

#[test]
fn invariant_violation_exits_3() {
    // c = 0 cannot absorb the curvature: telescoping fails on round 0
    let out = scratch("violation.txt");
    let output = run(&[
        "simulate",
        "--n",
        "16",
        "--experts",
        "2",
        "--c",
        "0",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(3));
    let stderr = String::from_utf8(output.stderr).unwrap();
    assert!(stderr.contains("round 0"), "stderr: {stderr}");
}

#[test]
fn minimax_prints_the_audit_chain() {
    let output = run(&["minimax", "--n", "2", "--experts", "2"]);
    assert_eq!(output.status.code(), Some(0));
    let stdout = String::from_utf8(output.stdout).unwrap();
    assert!(stdout.contains("minimax_value="));
    assert!(stdout.contains("strategy_worst_case="));
    assert!(stdout.contains("chain_holds=true"));
}

#[test]
fn minimax_value_table_rows_are_sorted() {
    let output = run(&["minimax", "--n", "1", "--experts", "2", "--table", "-"]);
    assert_eq!(output.status.code(), Some(0));
    let stdout = String::from_utf8(output.stdout).unwrap();
    let rows: Vec<&str> = stdout.lines().filter(|l| !l.contains('=')).collect();
    // t=0 root plus the terminal level states
    assert!(rows.len() > 1);
    assert!(rows[0].starts_with("0,0,0,"));
    let ts: Vec<usize> = rows
        .iter()
        .map(|r| r.split(',').next().unwrap().parse().unwrap())
        .collect();
    let mut sorted = ts.clone();
    sorted.sort_unstable();
    assert_eq!(ts, sorted);
}

#[test]
fn sweep_prints_csv_header_first() {
    let output = run(&[
        "sweep",
        "--param",
        "horizon",
        "--values",
        "1,16,64",
        "--experts",
        "3",
    ]);
    assert_eq!(output.status.code(), Some(0));
    let stdout = String::from_utf8(output.stdout).unwrap();
    let mut lines = stdout.lines();
    assert_eq!(lines.next(), Some("param,regret,bound"));
    assert_eq!(lines.clone().count(), 3);
    for line in lines {
        assert_eq!(line.split(',').count(), 3);
    }
}

#[test]
fn run_spec_file_with_flag_overrides() {
    let spec_path = scratch("run.json");
    fs::write(
        &spec_path,
        r#"{"n": 50, "experts": 3, "adversary": "oblivious", "seed": 4}"#,
    )
    .unwrap();
    let out_a = scratch("spec-a.txt");
    let base = run(&[
        "simulate",
        "--spec",
        spec_path.to_str().unwrap(),
        "--out",
        out_a.to_str().unwrap(),
    ]);
    assert_eq!(base.status.code(), Some(0));
    let text = fs::read_to_string(&out_a).unwrap();
    assert_eq!(text.lines().count(), 51);
    assert!(text.lines().next().unwrap().contains("\"n_experts\":3"));

    // flags beat the file: horizon 20 instead of 50
    let out_b = scratch("spec-b.txt");
    let over = run(&[
        "simulate",
        "--spec",
        spec_path.to_str().unwrap(),
        "--n",
        "20",
        "--out",
        out_b.to_str().unwrap(),
    ]);
    assert_eq!(over.status.code(), Some(0));
    assert_eq!(fs::read_to_string(&out_b).unwrap().lines().count(), 21);
}

#[test]
fn unknown_spec_keys_are_rejected() {
    let spec_path = scratch("bad.json");
    fs::write(&spec_path, r#"{"n": 50, "horizon": 50}"#).unwrap();
    let output = run(&["simulate", "--spec", spec_path.to_str().unwrap()]);
    assert_eq!(output.status.code(), Some(2));
    assert!(String::from_utf8(output.stderr)
        .unwrap()
        .contains("bad run spec"));
}

#[test]
fn transcripts_parse_back_bit_exactly() {
    let out = scratch("roundtrip.txt");
    let output = run(&[
        "simulate",
        "--n",
        "64",
        "--experts",
        "3",
        "--loss",
        "squared",
        "--seed",
        "17",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(output.status.success());
    let text = fs::read_to_string(&out).unwrap();
    let parsed = regretlab::transcript::from_text::<f64>(&text).unwrap();
    assert_eq!(regretlab::transcript::to_text(&parsed), text);
}
