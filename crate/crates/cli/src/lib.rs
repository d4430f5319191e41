//! Harness behind the `dnasearch` binary: argument parsing, timed runs,
//! verification against the sequential engine, and report output.

use std::io::Write;
use std::time::{Duration, Instant};

use dnasearch::distributed::{run_distributed_traced, DistributedMode};
use dnasearch::generator::build_scenario_parallel;
use dnasearch::oracle::{search_all_sequential, search_all_sequential_with_work};
use dnasearch::parallel::search_all_parallel_with_work;
use dnasearch::{PatternSet, SearchReport, Sequence, Strategy, WorkCounter};
use serde::{Deserialize, Serialize};
use thiserror::Error;

mod args;

pub use args::{parse_args, EngineConfig, OutputFormat, RunConfig};

pub const EXIT_OK: u8 = 0;
pub const EXIT_MISMATCH: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_PROTOCOL: u8 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    /// `--help` or `--version` output; not an error for the caller.
    #[error("{0}")]
    Help(String),
}

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("protocol violation: {0}")]
    Protocol(String),
}

#[derive(Debug, Clone)]
pub struct EngineOutput {
    pub report: SearchReport,
    pub work: WorkCounter,
    /// Message-trace lines, when the engine produces any.
    pub trace: Vec<String>,
}

/// A search engine the harness can time and verify.
pub trait Engine {
    fn name(&self) -> &str;
    fn workers(&self) -> usize;
    fn search(&self, seq: &Sequence, patterns: &PatternSet) -> Result<EngineOutput, EngineError>;
}

pub struct SequentialEngine;

impl Engine for SequentialEngine {
    fn name(&self) -> &str {
        "seq"
    }

    fn workers(&self) -> usize {
        1
    }

    fn search(&self, seq: &Sequence, patterns: &PatternSet) -> Result<EngineOutput, EngineError> {
        let (report, work) = search_all_sequential_with_work(seq, patterns);
        Ok(EngineOutput {
            report,
            work,
            trace: Vec::new(),
        })
    }
}

pub struct ParallelEngine(pub Strategy);

impl Engine for ParallelEngine {
    fn name(&self) -> &str {
        "par"
    }

    fn workers(&self) -> usize {
        self.0.workers()
    }

    fn search(&self, seq: &Sequence, patterns: &PatternSet) -> Result<EngineOutput, EngineError> {
        let (report, work) = search_all_parallel_with_work(seq, patterns, &self.0);
        Ok(EngineOutput {
            report,
            work,
            trace: Vec::new(),
        })
    }
}

pub struct DistributedEngine {
    pub ranks: usize,
    pub mode: DistributedMode,
}

impl Engine for DistributedEngine {
    fn name(&self) -> &str {
        "dist"
    }

    fn workers(&self) -> usize {
        self.ranks
    }

    fn search(&self, seq: &Sequence, patterns: &PatternSet) -> Result<EngineOutput, EngineError> {
        let run = run_distributed_traced(seq, patterns, self.ranks, self.mode)
            .map_err(|e| EngineError::Protocol(e.to_string()))?;
        Ok(EngineOutput {
            trace: run.trace_lines(),
            report: run.report,
            work: run.work,
        })
    }
}

pub fn engine_for(config: &EngineConfig) -> Box<dyn Engine> {
    match config {
        EngineConfig::Sequential => Box::new(SequentialEngine),
        EngineConfig::Parallel(strategy) => Box::new(ParallelEngine(*strategy)),
        EngineConfig::Distributed { ranks, mode } => Box::new(DistributedEngine {
            ranks: *ranks,
            mode: *mode,
        }),
    }
}

/// Machine-readable report. Key set and spelling are frozen.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JsonReport {
    pub matches: usize,
    pub checksum: u64,
    pub multi: usize,
    pub pat_found: Vec<i64>,
    pub time_s: f64,
    pub engine: String,
    pub workers: usize,
    pub comparisons: u64,
    pub positions_tested: u64,
}

pub struct Timing {
    pub best: Duration,
}

pub fn emit_report(
    report: &SearchReport,
    work: &WorkCounter,
    timing: &Timing,
    engine: &dyn Engine,
    format: OutputFormat,
    verbose: bool,
) -> String {
    let seconds = timing.best.as_secs_f64();
    match format {
        OutputFormat::Text => {
            let mut out = dnasearch::report::to_text(report, verbose);
            out.push_str(&format!("Time: {seconds:.6}\n"));
            out
        }
        OutputFormat::Json => {
            let json = JsonReport {
                matches: report.pat_matches,
                checksum: report.checksum_found,
                multi: report.multi_match_positions,
                pat_found: report.pat_found_signed(),
                time_s: seconds,
                engine: engine.name().to_string(),
                workers: engine.workers(),
                comparisons: work.comparisons,
                positions_tested: work.positions_tested,
            };
            let mut out = serde_json::to_string(&json).expect("plain data serializes");
            out.push('\n');
            out
        }
    }
}

/// Builds the scenario from `config` and runs it with the configured engine.
pub fn run(config: &RunConfig, out: &mut dyn Write, err: &mut dyn Write) -> u8 {
    let engine = engine_for(&config.engine);
    run_with_engine(config, engine.as_ref(), out, err)
}

/// Like [`run`], with an explicit engine.
///
/// Only the searches are timed; scenario generation and serialization are
/// not. With `verify`, the sequential engine's report is compared field by
/// field and a mismatch returns [`EXIT_MISMATCH`].
pub fn run_with_engine(
    config: &RunConfig,
    engine: &dyn Engine,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> u8 {
    let scenario = match build_scenario_parallel(&config.params, config.gen_workers) {
        Ok(s) => s,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_USAGE;
        }
    };
    if let Some(path) = &config.dump_scenario {
        if let Err(e) = scenario.write_dump(path) {
            let _ = writeln!(err, "error: cannot write {}: {e}", path.display());
            return EXIT_USAGE;
        }
    }

    let mut best: Option<(Duration, EngineOutput)> = None;
    for _ in 0..config.repetitions {
        let start = Instant::now();
        let result = engine.search(&scenario.sequence, &scenario.patterns);
        let elapsed = start.elapsed();
        let output = match result {
            Ok(o) => o,
            Err(e) => {
                let _ = writeln!(err, "error: {e}");
                return EXIT_PROTOCOL;
            }
        };
        if best.as_ref().is_none_or(|(t, _)| elapsed < *t) {
            best = Some((elapsed, output));
        }
    }
    let (elapsed, output) = best.expect("at least one repetition");

    if config.trace_messages {
        for line in &output.trace {
            let _ = writeln!(err, "{line}");
        }
    }
    let text = emit_report(
        &output.report,
        &output.work,
        &Timing { best: elapsed },
        engine,
        config.format,
        config.verbose,
    );
    let _ = out.write_all(text.as_bytes());

    if config.verify {
        let expected = search_all_sequential(&scenario.sequence, &scenario.patterns);
        if let Some(diff) = expected.first_difference(&output.report) {
            let _ = writeln!(
                err,
                "verification failed: {diff} (expected != {})",
                engine.name()
            );
            return EXIT_MISMATCH;
        }
    }
    EXIT_OK
}
