//! In-process simulation of a distributed-memory search.
//!
//! Each rank is a thread owning a private copy of one contiguous block of the
//! sequence. Ranks talk only through FIFO channels from rank `r` to `r + 1`.
//! A comparison that runs off the end of a block travels downstream as a
//! [`ContinuationMsg`] and is resumed by the next rank, possibly hopping over
//! several ranks when a pattern is longer than a block.
//!
//! Every rank applies `seq_matches` increments only inside its own block and
//! tags them with the `(pattern, start)` they belong to. The reducer keeps
//! the increments of each pattern's winning (lowest) start and retracts the
//! rest.

use std::fmt;
use std::ops::Range;
use std::str::FromStr;
use std::sync::mpsc::{channel, Receiver, Sender};

use thiserror::Error;

use crate::model::{Nucleotide, PatternSet, SearchReport, Sequence};
use crate::oracle::{find_first, WorkCounter};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DistributedError {
    #[error("rank count must be at least 1")]
    ZeroRanks,
    #[error("{ranks} ranks cannot split a sequence of length {len}")]
    TooManyRanks { ranks: usize, len: usize },
    #[error("protocol violation: {0}")]
    Protocol(String),
    #[error("unknown mode {0:?} (expected distributed or replicated)")]
    UnknownMode(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DistributedMode {
    /// Each rank holds one block; boundary matches travel down the pipeline.
    Distributed,
    /// Each rank holds the whole sequence and searches a slice of the patterns.
    Replicated,
}

impl DistributedMode {
    pub const ALL: [DistributedMode; 2] =
        [DistributedMode::Distributed, DistributedMode::Replicated];

    pub fn name(self) -> &'static str {
        match self {
            DistributedMode::Distributed => "distributed",
            DistributedMode::Replicated => "replicated",
        }
    }
}

impl FromStr for DistributedMode {
    type Err = DistributedError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "distributed" => Ok(DistributedMode::Distributed),
            "replicated" => Ok(DistributedMode::Replicated),
            other => Err(DistributedError::UnknownMode(other.to_string())),
        }
    }
}

/// Balanced contiguous split of `0..len`: the first `len % n` blocks get one
/// extra element.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockPartition {
    bounds: Vec<usize>,
}

impl BlockPartition {
    pub fn new(len: usize, n_ranks: usize) -> Result<Self, DistributedError> {
        if n_ranks == 0 {
            return Err(DistributedError::ZeroRanks);
        }
        if n_ranks > len {
            return Err(DistributedError::TooManyRanks {
                ranks: n_ranks,
                len,
            });
        }
        Ok(BlockPartition {
            bounds: balanced_bounds(len, n_ranks),
        })
    }

    pub fn n_ranks(&self) -> usize {
        self.bounds.len() - 1
    }

    pub fn total_len(&self) -> usize {
        *self.bounds.last().unwrap()
    }

    pub fn block(&self, rank: usize) -> Range<usize> {
        self.bounds[rank]..self.bounds[rank + 1]
    }

    pub fn blocks(&self) -> impl Iterator<Item = Range<usize>> + '_ {
        self.bounds.windows(2).map(|w| w[0]..w[1])
    }
}

fn balanced_bounds(len: usize, parts: usize) -> Vec<usize> {
    let (base, extra) = (len / parts, len % parts);
    let mut bounds = Vec::with_capacity(parts + 1);
    bounds.push(0);
    for r in 0..parts {
        bounds.push(bounds[r] + base + usize::from(r < extra));
    }
    bounds
}

pub fn partition_sequence(len: usize, n_ranks: usize) -> Result<BlockPartition, DistributedError> {
    BlockPartition::new(len, n_ranks)
}

/// A partially verified match handed to the next rank.
///
/// `start + matched` equals the first index of the receiving rank's block.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ContinuationMsg {
    pub pattern: usize,
    pub start: usize,
    pub matched: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Message {
    Continue(ContinuationMsg),
    /// The upstream rank has sent everything it will send.
    Done,
}

/// A sent continuation, as recorded for the trace log.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TraceEntry {
    pub src: usize,
    pub dst: usize,
    pub msg: ContinuationMsg,
}

impl fmt::Display for TraceEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} -> {} p={} s={} k={}",
            self.src, self.dst, self.msg.pattern, self.msg.start, self.msg.matched
        )
    }
}

/// `seq_matches` increments applied by a rank on behalf of one candidate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaggedIncrement {
    pub pattern: usize,
    pub start: usize,
    /// Global indices, inside the rank's span.
    pub range: Range<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankResult {
    pub rank: usize,
    /// Global index range covered by `seq_slice`.
    pub span: Range<usize>,
    /// Lowest completed match per pattern seen by this rank.
    pub candidates: Vec<Option<usize>>,
    pub seq_slice: Vec<u32>,
    pub increments: Vec<TaggedIncrement>,
    pub work: WorkCounter,
    pub sent: Vec<TraceEntry>,
    pub received: usize,
    /// Messages still queued after the rank terminated.
    pub undrained: usize,
}

impl RankResult {
    fn new(rank: usize, span: Range<usize>, n_patterns: usize) -> Self {
        RankResult {
            rank,
            candidates: vec![None; n_patterns],
            seq_slice: vec![0; span.len()],
            span,
            increments: Vec::new(),
            work: WorkCounter::default(),
            sent: Vec::new(),
            received: 0,
            undrained: 0,
        }
    }

    fn complete(&mut self, pattern: usize, start: usize) {
        let slot = &mut self.candidates[pattern];
        *slot = Some(slot.map_or(start, |c| c.min(start)));
    }

    fn tag(&mut self, pattern: usize, start: usize, range: Range<usize>) {
        let lo = self.span.start;
        for count in &mut self.seq_slice[range.start - lo..range.end - lo] {
            *count += 1;
        }
        self.increments.push(TaggedIncrement {
            pattern,
            start,
            range,
        });
    }
}

/// Number of leading symbols of `pat` matching `block`, stopping at the first
/// mismatch or at the end of either slice. Returns `(matched, mismatched)`.
#[inline]
fn prefix_match(
    block: &[Nucleotide],
    pat: &[Nucleotide],
    counter: &mut WorkCounter,
) -> (usize, bool) {
    let limit = block.len().min(pat.len());
    match block[..limit]
        .iter()
        .zip(&pat[..limit])
        .position(|(a, b)| a != b)
    {
        Some(k) => {
            counter.comparisons += k as u64 + 1;
            (k, true)
        }
        None => {
            counter.comparisons += limit as u64;
            (limit, false)
        }
    }
}

/// One rank of the pipeline.
///
/// Scans every local start of every pattern, forwards comparisons that reach
/// the end of the block, then resumes continuations from upstream until the
/// upstream `Done` arrives, and finally sends `Done` downstream.
pub fn rank_search(
    rank: usize,
    block: Vec<Nucleotide>,
    partition: &BlockPartition,
    patterns: &PatternSet,
    inbox: Option<Receiver<Message>>,
    outbox: Option<Sender<Message>>,
) -> RankResult {
    let span = partition.block(rank);
    debug_assert_eq!(block.len(), span.len());
    let (lo, hi) = (span.start, span.end);
    let total = partition.total_len();
    let mut result = RankResult::new(rank, span, patterns.len());
    let send = |result: &mut RankResult, msg: ContinuationMsg| {
        if let Some(out) = &outbox {
            out.send(Message::Continue(msg))
                .expect("downstream rank alive");
            result.sent.push(TraceEntry {
                src: rank,
                dst: rank + 1,
                msg,
            });
        }
    };

    for (p, pat) in patterns.iter().enumerate() {
        let pat = pat.as_slice();
        for s in lo..hi {
            if s + pat.len() > total {
                break;
            }
            result.work.positions_tested += 1;
            let (k, mismatched) = prefix_match(&block[s - lo..], pat, &mut result.work);
            if mismatched {
                continue;
            }
            if k == pat.len() {
                result.complete(p, s);
                result.tag(p, s, s..s + k);
                break;
            }
            result.tag(p, s, s..hi);
            send(
                &mut result,
                ContinuationMsg {
                    pattern: p,
                    start: s,
                    matched: k,
                },
            );
        }
    }

    if let Some(inbox) = &inbox {
        for message in inbox.iter() {
            let msg = match message {
                Message::Continue(msg) => msg,
                Message::Done => break,
            };
            result.received += 1;
            let pat = patterns[msg.pattern].as_slice();
            let (j, mismatched) = prefix_match(&block, &pat[msg.matched..], &mut result.work);
            if mismatched {
                continue;
            }
            let matched = msg.matched + j;
            if matched == pat.len() {
                result.complete(msg.pattern, msg.start);
                result.tag(msg.pattern, msg.start, lo..msg.start + matched);
            } else if outbox.is_some() {
                result.tag(msg.pattern, msg.start, lo..hi);
                send(&mut result, ContinuationMsg { matched, ..msg });
            }
            // Otherwise the sequence ended before the pattern did: no match.
        }
    }
    if let Some(out) = &outbox {
        out.send(Message::Done).expect("downstream rank alive");
    }
    if let Some(inbox) = &inbox {
        while inbox.try_recv().is_ok() {
            result.undrained += 1;
        }
    }
    result
}

/// Rank of the replicated variant: whole sequence, a slice of the patterns.
fn replicated_rank(
    rank: usize,
    seq: Vec<Nucleotide>,
    patterns: &PatternSet,
    slice: Range<usize>,
) -> RankResult {
    let mut result = RankResult::new(rank, 0..seq.len(), patterns.len());
    for p in slice {
        let pat = patterns[p].as_slice();
        if let Some(pos) = find_first(&seq, pat, &mut result.work) {
            result.complete(p, pos);
            result.tag(p, pos, pos..pos + pat.len());
        }
    }
    result
}

/// Combines rank results into one report.
///
/// Each pattern's first match is the minimum over all ranks. Increments
/// tagged with any other start are retracted before the slices are summed
/// into the global array.
pub fn reduce_reports(
    results: &[RankResult],
    n_patterns: usize,
    seq_len: usize,
) -> Result<SearchReport, DistributedError> {
    let sent: usize = results.iter().map(|r| r.sent.len()).sum();
    let received: usize = results.iter().map(|r| r.received).sum();
    if let Some(r) = results.iter().find(|r| r.undrained > 0) {
        return Err(DistributedError::Protocol(format!(
            "rank {} terminated with {} undrained messages",
            r.rank, r.undrained
        )));
    }
    if sent != received {
        return Err(DistributedError::Protocol(format!(
            "{sent} continuation messages sent but {received} received"
        )));
    }

    let winners: Vec<Option<usize>> = (0..n_patterns)
        .map(|p| results.iter().filter_map(|r| r.candidates[p]).min())
        .collect();
    let mut report = SearchReport::new(n_patterns, seq_len);
    for r in results {
        let mut slice = r.seq_slice.clone();
        for inc in &r.increments {
            if winners[inc.pattern] == Some(inc.start) {
                continue;
            }
            for i in inc.range.clone() {
                let count = &mut slice[i - r.span.start];
                *count = count.checked_sub(1).ok_or_else(|| {
                    DistributedError::Protocol(format!(
                        "rank {} retracted an increment it never applied",
                        r.rank
                    ))
                })?;
            }
        }
        for (total, c) in report.seq_matches[r.span.clone()].iter_mut().zip(slice) {
            *total += c;
        }
    }
    report.pat_found = winners;
    report.finalize();
    Ok(report)
}

#[derive(Debug, Clone)]
pub struct DistributedRun {
    pub report: SearchReport,
    pub work: WorkCounter,
    /// Every continuation message, in rank order then send order.
    pub trace: Vec<TraceEntry>,
}

impl DistributedRun {
    pub fn trace_lines(&self) -> Vec<String> {
        self.trace.iter().map(ToString::to_string).collect()
    }
}

pub fn run_distributed(
    seq: &Sequence,
    patterns: &PatternSet,
    n_ranks: usize,
    mode: DistributedMode,
) -> Result<SearchReport, DistributedError> {
    run_distributed_traced(seq, patterns, n_ranks, mode).map(|run| run.report)
}

pub fn run_distributed_traced(
    seq: &Sequence,
    patterns: &PatternSet,
    n_ranks: usize,
    mode: DistributedMode,
) -> Result<DistributedRun, DistributedError> {
    let results = match mode {
        DistributedMode::Distributed => run_pipeline(seq, patterns, n_ranks)?,
        DistributedMode::Replicated => run_replicated(seq, patterns, n_ranks)?,
    };
    let report = reduce_reports(&results, patterns.len(), seq.len())?;
    Ok(DistributedRun {
        report,
        work: results.iter().map(|r| r.work).sum(),
        trace: results.into_iter().flat_map(|r| r.sent).collect(),
    })
}

fn run_pipeline(
    seq: &Sequence,
    patterns: &PatternSet,
    n_ranks: usize,
) -> Result<Vec<RankResult>, DistributedError> {
    let partition = BlockPartition::new(seq.len(), n_ranks)?;
    let mut inboxes: Vec<Option<Receiver<Message>>> = vec![None];
    let mut outboxes: Vec<Option<Sender<Message>>> = Vec::new();
    for _ in 1..n_ranks {
        let (tx, rx) = channel();
        outboxes.push(Some(tx));
        inboxes.push(Some(rx));
    }
    outboxes.push(None);

    let partition = &partition;
    Ok(std::thread::scope(|scope| {
        let handles: Vec<_> = inboxes
            .into_iter()
            .zip(outboxes)
            .enumerate()
            .map(|(rank, (inbox, outbox))| {
                let block = seq.as_slice()[partition.block(rank)].to_vec();
                scope.spawn(move || rank_search(rank, block, partition, patterns, inbox, outbox))
            })
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    }))
}

fn run_replicated(
    seq: &Sequence,
    patterns: &PatternSet,
    n_ranks: usize,
) -> Result<Vec<RankResult>, DistributedError> {
    if n_ranks == 0 {
        return Err(DistributedError::ZeroRanks);
    }
    let bounds = balanced_bounds(patterns.len(), n_ranks);
    Ok(std::thread::scope(|scope| {
        let handles: Vec<_> = (0..n_ranks)
            .map(|rank| {
                let copy = seq.as_slice().to_vec();
                let slice = bounds[rank]..bounds[rank + 1];
                scope.spawn(move || replicated_rank(rank, copy, patterns, slice))
            })
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    }))
}
