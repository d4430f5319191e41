use std::cell::Cell;
use std::process::Command;
use std::time::Duration;

use dnasearch::{PatternSet, Sequence};
use dnasearch_cli::{
    parse_args, run, run_with_engine, Engine, EngineError, EngineOutput, JsonReport,
    SequentialEngine, EXIT_MISMATCH, EXIT_OK, EXIT_PROTOCOL,
};

const SCENARIO: &str = "2000 0.25 0.25 0.25 6 4 2 6 30 10 900 800 42";

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_dnasearch"))
}

fn config(extra: &str) -> dnasearch_cli::RunConfig {
    parse_args(format!("dnasearch {SCENARIO} {extra}").split_whitespace()).unwrap()
}

fn run_to_strings(extra: &str) -> (u8, String, String) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = run(&config(extra), &mut out, &mut err);
    (
        code,
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}

#[test]
fn every_engine_verifies() {
    for extra in [
        "--engine seq",
        "--engine par --strategy patterns --workers 3",
        "--engine par --strategy positions --workers 4 --chunk 64",
        "--engine par --strategy nested --workers 4 --chunk 50 --accumulation merge",
        "--engine par --strategy nested --workers 2 --no-cancel",
        "--engine dist --ranks 3",
        "--engine dist --ranks 8 --mode replicated",
    ] {
        let (code, out, err) = run_to_strings(&format!("{extra} --verify"));
        assert_eq!(code, EXIT_OK, "{extra}: {err}");
        assert!(out.contains("Matches: "));
        assert!(out.contains("Checksum: "));
        assert!(out.contains("Multi: "));
        assert!(out.contains("Time: "));
    }
}

#[test]
fn json_is_stable_apart_from_time() {
    let reports: Vec<JsonReport> = (0..2)
        .map(|_| {
            let (code, out, _) = run_to_strings("--engine seq --format json");
            assert_eq!(code, EXIT_OK);
            serde_json::from_str(&out).unwrap()
        })
        .collect();
    let mut a = reports[0].clone();
    let mut b = reports[1].clone();
    a.time_s = 0.0;
    b.time_s = 0.0;
    assert_eq!(a, b);
    assert_eq!(a.engine, "seq");
    assert_eq!(a.pat_found.len(), 12);
}

/// Finds the right matches, then corrupts the checksum.
struct CorruptEngine;

impl Engine for CorruptEngine {
    fn name(&self) -> &str {
        "corrupt"
    }

    fn workers(&self) -> usize {
        1
    }

    fn search(&self, seq: &Sequence, patterns: &PatternSet) -> Result<EngineOutput, EngineError> {
        let mut out = SequentialEngine.search(seq, patterns)?;
        out.report.checksum_found += 1;
        Ok(out)
    }
}

#[test]
fn corrupted_engine_fails_verification() {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = run_with_engine(&config("--verify"), &CorruptEngine, &mut out, &mut err);
    assert_eq!(code, EXIT_MISMATCH);
    let err = String::from_utf8(err).unwrap();
    assert!(err.contains("checksum_found"), "{err}");

    // without --verify the corruption goes unnoticed
    let code = run_with_engine(
        &config(""),
        &CorruptEngine,
        &mut Vec::new(),
        &mut Vec::new(),
    );
    assert_eq!(code, EXIT_OK);
}

struct BrokenProtocol;

impl Engine for BrokenProtocol {
    fn name(&self) -> &str {
        "broken"
    }

    fn workers(&self) -> usize {
        2
    }

    fn search(&self, _: &Sequence, _: &PatternSet) -> Result<EngineOutput, EngineError> {
        Err(EngineError::Protocol(
            "rank 1 terminated with 1 undrained messages".into(),
        ))
    }
}

#[test]
fn protocol_violation_exit_status() {
    let code = run_with_engine(
        &config(""),
        &BrokenProtocol,
        &mut Vec::new(),
        &mut Vec::new(),
    );
    assert_eq!(code, EXIT_PROTOCOL);
}

/// Sleeps a different amount on each call.
struct SlowEngine {
    calls: Cell<usize>,
}

impl Engine for SlowEngine {
    fn name(&self) -> &str {
        "slow"
    }

    fn workers(&self) -> usize {
        1
    }

    fn search(&self, seq: &Sequence, patterns: &PatternSet) -> Result<EngineOutput, EngineError> {
        let call = self.calls.get();
        self.calls.set(call + 1);
        std::thread::sleep(Duration::from_millis([120, 40, 200][call]));
        SequentialEngine.search(seq, patterns)
    }
}

#[test]
fn reported_time_is_minimum_of_repetitions() {
    let engine = SlowEngine {
        calls: Cell::new(0),
    };
    let mut out = Vec::new();
    let code = run_with_engine(
        &config("--reps 3 --format json"),
        &engine,
        &mut out,
        &mut Vec::new(),
    );
    assert_eq!(code, EXIT_OK);
    assert_eq!(engine.calls.get(), 3);
    let report: JsonReport = serde_json::from_slice(&out).unwrap();
    assert!(
        report.time_s >= 0.040 && report.time_s < 0.120,
        "{}",
        report.time_s
    );
}

#[test]
fn binary_exit_statuses() {
    let ok = bin()
        .args(SCENARIO.split_whitespace())
        .args(["--engine", "par", "--workers", "2", "--verify"])
        .output()
        .unwrap();
    assert_eq!(ok.status.code(), Some(0));
    let stdout = String::from_utf8(ok.stdout).unwrap();
    assert!(stdout.lines().any(|l| l.starts_with("Matches: ")));

    let bad = bin()
        .args("1000 0.5 0.4 0.3 5 10 2 5 50 10 500 100 42".split_whitespace())
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
    assert!(String::from_utf8(bad.stderr).unwrap().contains("usage"));

    let arity = bin().args(["1000", "0.25"]).output().unwrap();
    assert_eq!(arity.status.code(), Some(2));

    let help = bin().arg("--help").output().unwrap();
    assert_eq!(help.status.code(), Some(0));
}

#[test]
fn dump_and_trace() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("scenario.txt");
    let out = bin()
        .args("64 0.25 0.25 0.25 0 1 0 3 40 0 10 0 7".split_whitespace())
        .args([
            "--engine",
            "dist",
            "--ranks",
            "4",
            "--trace-messages",
            "--verbose",
        ])
        .arg("--dump-scenario")
        .arg(&path)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));

    let dump = std::fs::read_to_string(&path).unwrap();
    let lines: Vec<&str> = dump.lines().collect();
    assert_eq!(lines.len(), 4);
    assert_eq!(lines[0].len(), 64);
    assert_eq!(lines[1], &lines[0][10..50]);

    // 40-long samples at 10 cross the block boundaries at 16, 32 and 48
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(
        stderr.lines().any(|l| l.starts_with("0 -> 1 p=0 s=10 k=6")),
        "{stderr}"
    );
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("Pattern 2: "));
}
