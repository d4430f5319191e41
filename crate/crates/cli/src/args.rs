use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, ValueEnum};
use dnasearch::distributed::{partition_sequence, DistributedMode};
use dnasearch::parallel::{Accumulation, Decomposition, Strategy, DEFAULT_CHUNK};
use dnasearch::ScenarioParams;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EngineArg {
    Seq,
    Par,
    Dist,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StrategyArg {
    Patterns,
    Positions,
    Nested,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AccumulationArg {
    Serialized,
    Merge,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Distributed,
    Replicated,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Text,
    Json,
}

/// Exact multi-pattern search over a synthetic DNA sequence.
#[derive(Debug, Parser)]
#[command(name = "dnasearch", version)]
struct Cli {
    /// Sequence length
    seq_length: usize,
    /// Probability of A
    prob_a: f64,
    /// Probability of C
    prob_c: f64,
    /// Probability of G (T takes the remainder)
    prob_g: f64,
    /// Number of random patterns
    n_rand: usize,
    rand_len_mean: usize,
    rand_len_dev: usize,
    /// Number of patterns copied from the sequence
    n_samp: usize,
    samp_len_mean: usize,
    samp_len_dev: usize,
    samp_loc_mean: usize,
    samp_loc_dev: usize,
    seed: u64,

    #[arg(long, value_enum, default_value_t = EngineArg::Seq)]
    engine: EngineArg,
    /// Worker threads for the parallel engine [default: available cores]
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long, value_enum, default_value_t = StrategyArg::Positions)]
    strategy: StrategyArg,
    /// Start positions per chunk
    #[arg(long, default_value_t = DEFAULT_CHUNK)]
    chunk: usize,
    #[arg(long, value_enum, default_value_t = AccumulationArg::Serialized)]
    accumulation: AccumulationArg,
    /// Disable speculative cancellation in the parallel engine
    #[arg(long)]
    no_cancel: bool,
    /// Simulated ranks for the distributed engine
    #[arg(long, default_value_t = 4)]
    ranks: usize,
    #[arg(long, value_enum, default_value_t = ModeArg::Distributed)]
    mode: ModeArg,
    /// Also run the sequential engine and compare full reports
    #[arg(long)]
    verify: bool,
    /// Timed repetitions; the minimum time is reported
    #[arg(long, default_value_t = 1)]
    reps: usize,
    #[arg(long, value_enum, default_value_t = OutputFormat::Text)]
    format: OutputFormat,
    /// Write the generated scenario to a file
    #[arg(long, value_name = "PATH")]
    dump_scenario: Option<PathBuf>,
    /// Print every continuation message of the distributed engine to stderr
    #[arg(long)]
    trace_messages: bool,
    /// Print the first-match position of every pattern
    #[arg(long)]
    verbose: bool,
    /// Threads used to generate the sequence
    #[arg(long, default_value_t = 1)]
    gen_workers: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum EngineConfig {
    Sequential,
    Parallel(Strategy),
    Distributed { ranks: usize, mode: DistributedMode },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub params: ScenarioParams,
    pub engine: EngineConfig,
    pub verify: bool,
    pub repetitions: usize,
    pub format: OutputFormat,
    pub dump_scenario: Option<PathBuf>,
    pub trace_messages: bool,
    pub verbose: bool,
    pub gen_workers: usize,
}

fn usage<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Usage(e.to_string())
}

/// Parses a full argument vector, program name included.
pub fn parse_args<I, T>(argv: I) -> Result<RunConfig, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv).map_err(|e| match e.kind() {
        clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
            CliError::Help(e.to_string())
        }
        _ => CliError::Usage(e.to_string()),
    })?;

    let params = ScenarioParams {
        seq_length: cli.seq_length,
        prob_a: cli.prob_a,
        prob_c: cli.prob_c,
        prob_g: cli.prob_g,
        n_random_patterns: cli.n_rand,
        rand_len_mean: cli.rand_len_mean,
        rand_len_dev: cli.rand_len_dev,
        n_sample_patterns: cli.n_samp,
        samp_len_mean: cli.samp_len_mean,
        samp_len_dev: cli.samp_len_dev,
        samp_loc_mean: cli.samp_loc_mean,
        samp_loc_dev: cli.samp_loc_dev,
        seed: cli.seed,
    };
    params.validate().map_err(usage)?;
    if cli.reps == 0 {
        return Err(CliError::Usage("--reps must be at least 1".into()));
    }
    if cli.gen_workers == 0 {
        return Err(CliError::Usage("--gen-workers must be at least 1".into()));
    }

    let engine = match cli.engine {
        EngineArg::Seq => EngineConfig::Sequential,
        EngineArg::Par => {
            let workers = cli
                .workers
                .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
            let decomposition = match cli.strategy {
                StrategyArg::Patterns => Decomposition::OverPatterns,
                StrategyArg::Positions => Decomposition::OverPositions,
                StrategyArg::Nested => Decomposition::Nested,
            };
            let accumulation = match cli.accumulation {
                AccumulationArg::Serialized => Accumulation::SerializedUpdates,
                AccumulationArg::Merge => Accumulation::PerWorkerMerge,
            };
            let strategy =
                Strategy::new(decomposition, workers, cli.chunk, accumulation).map_err(usage)?;
            EngineConfig::Parallel(if cli.no_cancel {
                strategy.without_cancellation()
            } else {
                strategy
            })
        }
        EngineArg::Dist => {
            let mode = match cli.mode {
                ModeArg::Distributed => DistributedMode::Distributed,
                ModeArg::Replicated => DistributedMode::Replicated,
            };
            if cli.ranks == 0 {
                return Err(CliError::Usage("--ranks must be at least 1".into()));
            }
            if mode == DistributedMode::Distributed {
                partition_sequence(params.seq_length, cli.ranks).map_err(usage)?;
            }
            EngineConfig::Distributed {
                ranks: cli.ranks,
                mode,
            }
        }
    };

    Ok(RunConfig {
        params,
        engine,
        verify: cli.verify,
        repetitions: cli.reps,
        format: cli.format,
        dump_scenario: cli.dump_scenario,
        trace_messages: cli.trace_messages,
        verbose: cli.verbose,
        gen_workers: cli.gen_workers,
    })
}
