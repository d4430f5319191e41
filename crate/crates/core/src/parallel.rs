//! Shared-memory parallel search.
//!
//! Work is claimed dynamically from shared counters. Three decompositions are
//! available:
//!
//! - [`Decomposition::OverPatterns`]: workers claim whole patterns and scan
//!   each one sequentially with early exit.
//! - [`Decomposition::OverPositions`]: patterns are processed in order; for
//!   each one, all workers share its start positions in chunks and meet at a
//!   barrier before the next pattern.
//! - [`Decomposition::Nested`]: both loops collapsed into one task space of
//!   `(pattern, chunk)` pairs claimed from a single counter.
//!
//! When a pattern's positions are split, the lowest hit wins. Hits are
//! published to a [`CancellationBoard`] with a monotone minimum, and workers
//! stop scanning a chunk once their position reaches the published bound.
//! Chunks below a published hit still run, since they may hold an earlier
//! match.
//!
//! Large uniform chunks under `OverPositions` are the CPU counterpart of
//! assigning contiguous blocks of start positions to GPU thread blocks.

use std::ops::Range;
use std::str::FromStr;
use std::sync::atomic::{AtomicU32, AtomicUsize, Ordering};
use std::sync::Barrier;

use thiserror::Error;

use crate::model::{ModelError, Nucleotide, PatternSet, SearchReport, Sequence};
use crate::oracle::{find_first, start_count, test_start, WorkCounter};

pub const DEFAULT_CHUNK: usize = 4096;

const UNBOUNDED: usize = usize::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Decomposition {
    OverPatterns,
    OverPositions,
    Nested,
}

impl Decomposition {
    pub const ALL: [Decomposition; 3] = [
        Decomposition::OverPatterns,
        Decomposition::OverPositions,
        Decomposition::Nested,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Decomposition::OverPatterns => "patterns",
            Decomposition::OverPositions => "positions",
            Decomposition::Nested => "nested",
        }
    }
}

impl FromStr for Decomposition {
    type Err = StrategyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "patterns" => Ok(Decomposition::OverPatterns),
            "positions" => Ok(Decomposition::OverPositions),
            "nested" => Ok(Decomposition::Nested),
            other => Err(StrategyError::UnknownDecomposition(other.to_string())),
        }
    }
}

/// How matches reach the report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Accumulation {
    /// Atomic read-modify-write on one shared report.
    SerializedUpdates,
    /// A private report per worker, merged at the end.
    PerWorkerMerge,
}

impl Accumulation {
    pub const ALL: [Accumulation; 2] = [
        Accumulation::SerializedUpdates,
        Accumulation::PerWorkerMerge,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Accumulation::SerializedUpdates => "serialized",
            Accumulation::PerWorkerMerge => "merge",
        }
    }
}

impl FromStr for Accumulation {
    type Err = StrategyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "serialized" | "atomic" => Ok(Accumulation::SerializedUpdates),
            "merge" | "reduction" => Ok(Accumulation::PerWorkerMerge),
            other => Err(StrategyError::UnknownAccumulation(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StrategyError {
    #[error("worker count must be at least 1")]
    ZeroWorkers,
    #[error("chunk size must be at least 1")]
    ZeroChunk,
    #[error("unknown decomposition {0:?} (expected patterns, positions or nested)")]
    UnknownDecomposition(String),
    #[error("unknown accumulation {0:?} (expected serialized or merge)")]
    UnknownAccumulation(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Strategy {
    decomposition: Decomposition,
    workers: usize,
    chunk: usize,
    accumulation: Accumulation,
    cancellation: bool,
}

impl Strategy {
    pub fn new(
        decomposition: Decomposition,
        workers: usize,
        chunk: usize,
        accumulation: Accumulation,
    ) -> Result<Self, StrategyError> {
        if workers == 0 {
            return Err(StrategyError::ZeroWorkers);
        }
        if chunk == 0 {
            return Err(StrategyError::ZeroChunk);
        }
        Ok(Strategy {
            decomposition,
            workers,
            chunk,
            accumulation,
            cancellation: true,
        })
    }

    /// Disables reading the cancellation board. Hits are still published so
    /// the minimum is found; only the pruning goes away.
    pub fn without_cancellation(mut self) -> Self {
        self.cancellation = false;
        self
    }

    pub fn decomposition(&self) -> Decomposition {
        self.decomposition
    }

    pub fn workers(&self) -> usize {
        self.workers
    }

    pub fn chunk(&self) -> usize {
        self.chunk
    }

    pub fn accumulation(&self) -> Accumulation {
        self.accumulation
    }

    pub fn cancellation(&self) -> bool {
        self.cancellation
    }
}

/// Per-pattern upper bound on the first match, lowered by every hit.
#[derive(Debug)]
pub struct CancellationBoard {
    best: Vec<AtomicUsize>,
}

impl CancellationBoard {
    pub fn new(n_patterns: usize) -> Self {
        CancellationBoard {
            best: (0..n_patterns)
                .map(|_| AtomicUsize::new(UNBOUNDED))
                .collect(),
        }
    }

    /// Current bound; any start at or above it can be abandoned.
    #[inline]
    pub fn bound(&self, p: usize) -> usize {
        self.best[p].load(Ordering::Relaxed)
    }

    #[inline]
    pub fn publish(&self, p: usize, start: usize) {
        self.best[p].fetch_min(start, Ordering::AcqRel);
    }

    pub fn get(&self, p: usize) -> Option<usize> {
        match self.best[p].load(Ordering::Acquire) {
            UNBOUNDED => None,
            pos => Some(pos),
        }
    }
}

/// Scans `starts` in order. Stops at the first local hit (published to the
/// board) or, with `cancel`, once the position reaches the board's bound.
#[inline]
fn scan_chunk(
    seq: &[Nucleotide],
    pat: &[Nucleotide],
    p: usize,
    starts: Range<usize>,
    board: &CancellationBoard,
    cancel: bool,
    counter: &mut WorkCounter,
) -> Option<usize> {
    for s in starts {
        if cancel && s >= board.bound(p) {
            return None;
        }
        if test_start(seq, pat, s, counter) {
            board.publish(p, s);
            return Some(s);
        }
    }
    None
}

fn chunk_range(c: usize, chunk: usize, n_starts: usize) -> Range<usize> {
    let lo = c * chunk;
    lo..(lo + chunk).min(n_starts)
}

/// First match of pattern `p` with the position loop split across workers.
///
/// The board entry for `p` must not have been written yet.
pub fn speculative_find_first(
    seq: &Sequence,
    pat: &[Nucleotide],
    p: usize,
    board: &CancellationBoard,
    strategy: &Strategy,
) -> (Option<usize>, WorkCounter) {
    let seq = seq.as_slice();
    let n_starts = start_count(seq.len(), pat.len());
    let n_chunks = n_starts.div_ceil(strategy.chunk);
    let next = AtomicUsize::new(0);
    let work = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..strategy.workers)
            .map(|_| {
                scope.spawn(|| {
                    let mut counter = WorkCounter::default();
                    loop {
                        let c = next.fetch_add(1, Ordering::Relaxed);
                        if c >= n_chunks {
                            break;
                        }
                        let range = chunk_range(c, strategy.chunk, n_starts);
                        scan_chunk(
                            seq,
                            pat,
                            p,
                            range,
                            board,
                            strategy.cancellation,
                            &mut counter,
                        );
                    }
                    counter
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).sum()
    });
    (board.get(p), work)
}

/// Report accumulators updated concurrently with atomic operations.
struct SharedAccumulator {
    pat_found: Vec<AtomicUsize>,
    seq_matches: Vec<AtomicU32>,
}

impl SharedAccumulator {
    fn new(n_patterns: usize, seq_len: usize) -> Self {
        SharedAccumulator {
            pat_found: (0..n_patterns)
                .map(|_| AtomicUsize::new(UNBOUNDED))
                .collect(),
            seq_matches: (0..seq_len).map(|_| AtomicU32::new(0)).collect(),
        }
    }

    fn accumulate(&self, p: usize, pos: usize, len: usize) -> Result<(), ModelError> {
        if let Err(existing) =
            self.pat_found[p].compare_exchange(UNBOUNDED, pos, Ordering::AcqRel, Ordering::Acquire)
        {
            return Err(ModelError::DoubleAccumulation {
                pattern: p,
                existing,
            });
        }
        for count in &self.seq_matches[pos..pos + len] {
            count.fetch_add(1, Ordering::Relaxed);
        }
        Ok(())
    }

    fn into_report(self) -> SearchReport {
        let pat_found = self
            .pat_found
            .into_iter()
            .map(|a| match a.into_inner() {
                UNBOUNDED => None,
                pos => Some(pos),
            })
            .collect();
        SearchReport {
            pat_found,
            seq_matches: self
                .seq_matches
                .into_iter()
                .map(AtomicU32::into_inner)
                .collect(),
            pat_matches: 0,
            checksum_found: 0,
            multi_match_positions: 0,
        }
        .finalized()
    }
}

/// Keeps the lowest hit per pattern in a private report.
fn offer_candidate(report: &mut SearchReport, p: usize, pos: usize, len: usize) {
    match report.pat_found[p] {
        Some(old) if old <= pos => {}
        Some(_) => {
            report.retract_match(p, len).expect("candidate present");
            report
                .accumulate_match(p, pos, len)
                .expect("slot just cleared");
        }
        None => report.accumulate_match(p, pos, len).expect("slot empty"),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MergeError {
    #[error("no partial reports to merge")]
    NoParts,
    #[error("partial report {part}: {source}")]
    Shape { part: usize, source: ModelError },
    #[error("partial report {part} does not cover its candidate for pattern {pattern}")]
    Inconsistent { part: usize, pattern: usize },
}

/// Merges per-worker reports built over the full position range.
///
/// `pat_found` becomes the per-pattern minimum. Each part's `seq_matches` is
/// summed after retracting its candidates that lost to a lower position (or
/// tied with an earlier part), so only the winning match of each pattern is
/// counted.
pub fn merge_partial_reports(
    parts: &[SearchReport],
    pattern_lens: &[usize],
) -> Result<SearchReport, MergeError> {
    let first = parts.first().ok_or(MergeError::NoParts)?;
    let (n_patterns, seq_len) = (pattern_lens.len(), first.seq_len());
    for (i, part) in parts.iter().enumerate() {
        if part.n_patterns() != n_patterns || part.seq_len() != seq_len {
            return Err(MergeError::Shape {
                part: i,
                source: ModelError::ShapeMismatch {
                    expected_patterns: n_patterns,
                    expected_len: seq_len,
                    patterns: part.n_patterns(),
                    len: part.seq_len(),
                },
            });
        }
    }

    let winners: Vec<Option<usize>> = (0..n_patterns)
        .map(|p| parts.iter().filter_map(|part| part.pat_found[p]).min())
        .collect();
    let mut claimed = vec![false; n_patterns];
    let mut merged = SearchReport::new(n_patterns, seq_len);
    for (i, part) in parts.iter().enumerate() {
        let mut contribution = part.seq_matches.clone();
        for (p, candidate) in part.pat_found.iter().enumerate() {
            let Some(pos) = *candidate else { continue };
            if winners[p] == Some(pos) && !claimed[p] {
                claimed[p] = true;
                continue;
            }
            let end = pos + pattern_lens[p];
            if end > seq_len {
                return Err(MergeError::Inconsistent {
                    part: i,
                    pattern: p,
                });
            }
            for count in &mut contribution[pos..end] {
                *count = count.checked_sub(1).ok_or(MergeError::Inconsistent {
                    part: i,
                    pattern: p,
                })?;
            }
        }
        for (total, c) in merged.seq_matches.iter_mut().zip(contribution) {
            *total += c;
        }
    }
    merged.pat_found = winners;
    merged.finalize();
    Ok(merged)
}

pub fn search_all_parallel(
    seq: &Sequence,
    patterns: &PatternSet,
    strategy: &Strategy,
) -> SearchReport {
    search_all_parallel_with_work(seq, patterns, strategy).0
}

/// Runs the search and also returns the summed work counters of all workers.
pub fn search_all_parallel_with_work(
    seq: &Sequence,
    patterns: &PatternSet,
    strategy: &Strategy,
) -> (SearchReport, WorkCounter) {
    let search = ParallelSearch::new(seq, patterns, strategy);
    let results: Vec<(WorkCounter, Option<SearchReport>)> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..strategy.workers)
            .map(|_| scope.spawn(|| search.worker()))
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });
    let work = results.iter().map(|(w, _)| *w).sum();
    let report = match strategy.accumulation {
        Accumulation::SerializedUpdates => search.shared.into_report(),
        Accumulation::PerWorkerMerge => {
            let parts: Vec<SearchReport> = results.into_iter().filter_map(|(_, r)| r).collect();
            merge_partial_reports(&parts, &patterns.lengths())
                .expect("worker reports share one shape")
        }
    };
    (report, work)
}

/// Shared state of one parallel search.
struct ParallelSearch<'a> {
    seq: &'a [Nucleotide],
    patterns: &'a PatternSet,
    strategy: Strategy,
    board: CancellationBoard,
    shared: SharedAccumulator,
    /// Chunk-claim counters: one per pattern for `OverPositions`, a single
    /// one for `OverPatterns` and `Nested`.
    claims: Vec<AtomicUsize>,
    /// Start-position count per pattern.
    starts: Vec<usize>,
    /// Prefix sums of chunk counts, for mapping `Nested` task ids.
    task_offsets: Vec<usize>,
    /// Chunks of each pattern not yet finished under `Nested`.
    remaining: Vec<AtomicUsize>,
    barrier: Barrier,
}

impl<'a> ParallelSearch<'a> {
    fn new(seq: &'a Sequence, patterns: &'a PatternSet, strategy: &Strategy) -> Self {
        let n = patterns.len();
        let starts: Vec<usize> = patterns
            .iter()
            .map(|pat| start_count(seq.len(), pat.len()))
            .collect();
        let chunks: Vec<usize> = starts.iter().map(|s| s.div_ceil(strategy.chunk)).collect();
        let mut task_offsets = Vec::with_capacity(n + 1);
        task_offsets.push(0);
        for c in &chunks {
            task_offsets.push(task_offsets.last().unwrap() + c);
        }
        let n_claims = match strategy.decomposition {
            Decomposition::OverPositions => n,
            _ => 1,
        };
        let shared_len = match strategy.accumulation {
            Accumulation::SerializedUpdates => seq.len(),
            Accumulation::PerWorkerMerge => 0,
        };
        ParallelSearch {
            seq: seq.as_slice(),
            patterns,
            strategy: *strategy,
            board: CancellationBoard::new(n),
            shared: SharedAccumulator::new(n, shared_len),
            claims: (0..n_claims).map(|_| AtomicUsize::new(0)).collect(),
            starts,
            task_offsets,
            remaining: chunks.into_iter().map(AtomicUsize::new).collect(),
            barrier: Barrier::new(strategy.workers),
        }
    }

    fn pattern(&self, p: usize) -> &[Nucleotide] {
        self.patterns[p].as_slice()
    }

    fn worker(&self) -> (WorkCounter, Option<SearchReport>) {
        let mut counter = WorkCounter::default();
        let mut private = match self.strategy.accumulation {
            Accumulation::PerWorkerMerge => {
                Some(SearchReport::new(self.patterns.len(), self.seq.len()))
            }
            Accumulation::SerializedUpdates => None,
        };
        match self.strategy.decomposition {
            Decomposition::OverPatterns => self.over_patterns(&mut counter, private.as_mut()),
            Decomposition::OverPositions => self.over_positions(&mut counter, private.as_mut()),
            Decomposition::Nested => self.nested(&mut counter, private.as_mut()),
        }
        (counter, private)
    }

    fn record(&self, private: Option<&mut SearchReport>, p: usize, pos: usize) {
        let len = self.patterns[p].len();
        match private {
            Some(report) => offer_candidate(report, p, pos, len),
            None => self
                .shared
                .accumulate(p, pos, len)
                .expect("each pattern is settled once"),
        }
    }

    fn over_patterns(&self, counter: &mut WorkCounter, mut private: Option<&mut SearchReport>) {
        loop {
            let p = self.claims[0].fetch_add(1, Ordering::Relaxed);
            if p >= self.patterns.len() {
                break;
            }
            if let Some(pos) = find_first(self.seq, self.pattern(p), counter) {
                self.record(private.as_deref_mut(), p, pos);
            }
        }
    }

    fn scan(&self, p: usize, c: usize, counter: &mut WorkCounter) -> Option<usize> {
        let range = chunk_range(c, self.strategy.chunk, self.starts[p]);
        scan_chunk(
            self.seq,
            self.pattern(p),
            p,
            range,
            &self.board,
            self.strategy.cancellation,
            counter,
        )
    }

    fn over_positions(&self, counter: &mut WorkCounter, mut private: Option<&mut SearchReport>) {
        for p in 0..self.patterns.len() {
            let n_chunks = self.task_offsets[p + 1] - self.task_offsets[p];
            loop {
                let c = self.claims[p].fetch_add(1, Ordering::Relaxed);
                if c >= n_chunks {
                    break;
                }
                if let (Some(pos), Some(report)) =
                    (self.scan(p, c, counter), private.as_deref_mut())
                {
                    offer_candidate(report, p, pos, self.patterns[p].len());
                }
            }
            let wait = self.barrier.wait();
            if wait.is_leader() && private.is_none() {
                if let Some(pos) = self.board.get(p) {
                    self.record(None, p, pos);
                }
            }
        }
    }

    fn nested(&self, counter: &mut WorkCounter, mut private: Option<&mut SearchReport>) {
        let total = *self.task_offsets.last().unwrap();
        loop {
            let t = self.claims[0].fetch_add(1, Ordering::Relaxed);
            if t >= total {
                break;
            }
            let p = self.task_offsets.partition_point(|&o| o <= t) - 1;
            let c = t - self.task_offsets[p];
            let hit = self.scan(p, c, counter);
            if let (Some(pos), Some(report)) = (hit, private.as_deref_mut()) {
                offer_candidate(report, p, pos, self.patterns[p].len());
            }
            // The worker finishing the last chunk of a pattern settles it.
            if self.remaining[p].fetch_sub(1, Ordering::AcqRel) == 1 && private.is_none() {
                if let Some(pos) = self.board.get(p) {
                    self.record(None, p, pos);
                }
            }
        }
    }
}
