//! Sequential brute-force reference engine.
//!
//! Its output defines correctness for every other engine, so it stays
//! deliberately plain: no indexing, hashing or vectorization.

use std::ops::AddAssign;

use crate::model::{Nucleotide, PatternSet, SearchReport, Sequence};

/// Work done by a search.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct WorkCounter {
    /// Symbol comparisons, including the mismatching one.
    pub comparisons: u64,
    /// Start positions attempted.
    pub positions_tested: u64,
}

impl AddAssign for WorkCounter {
    fn add_assign(&mut self, rhs: Self) {
        self.comparisons += rhs.comparisons;
        self.positions_tested += rhs.positions_tested;
    }
}

impl std::iter::Sum for WorkCounter {
    fn sum<I: Iterator<Item = WorkCounter>>(iter: I) -> Self {
        let mut total = WorkCounter::default();
        for w in iter {
            total += w;
        }
        total
    }
}

/// Compares `pat` at `start`, stopping at the first mismatch.
#[inline]
pub(crate) fn test_start(
    seq: &[Nucleotide],
    pat: &[Nucleotide],
    start: usize,
    counter: &mut WorkCounter,
) -> bool {
    counter.positions_tested += 1;
    let window = &seq[start..start + pat.len()];
    match window.iter().zip(pat).position(|(a, b)| a != b) {
        Some(k) => {
            counter.comparisons += k as u64 + 1;
            false
        }
        None => {
            counter.comparisons += pat.len() as u64;
            true
        }
    }
}

/// Number of valid start positions for a pattern of length `pat_len`.
#[inline]
pub(crate) fn start_count(seq_len: usize, pat_len: usize) -> usize {
    (seq_len + 1).saturating_sub(pat_len)
}

/// Smallest start where `pat` occurs in `seq`, or `None`.
pub fn find_first(
    seq: &[Nucleotide],
    pat: &[Nucleotide],
    counter: &mut WorkCounter,
) -> Option<usize> {
    (0..start_count(seq.len(), pat.len())).find(|&s| test_start(seq, pat, s, counter))
}

pub fn search_all_sequential(seq: &Sequence, patterns: &PatternSet) -> SearchReport {
    search_all_sequential_with_work(seq, patterns).0
}

pub fn search_all_sequential_with_work(
    seq: &Sequence,
    patterns: &PatternSet,
) -> (SearchReport, WorkCounter) {
    let mut report = SearchReport::new(patterns.len(), seq.len());
    let mut work = WorkCounter::default();
    for (p, pat) in patterns.iter().enumerate() {
        if let Some(pos) = find_first(seq.as_slice(), pat.as_slice(), &mut work) {
            report
                .accumulate_match(p, pos, pat.len())
                .expect("each pattern is accumulated once, inside the sequence");
        }
    }
    report.finalize();
    (report, work)
}

/// Per-pattern work, used to inspect load imbalance between patterns.
pub fn work_per_pattern(seq: &Sequence, patterns: &PatternSet) -> Vec<WorkCounter> {
    patterns
        .iter()
        .map(|pat| {
            let mut w = WorkCounter::default();
            find_first(seq.as_slice(), pat.as_slice(), &mut w);
            w
        })
        .collect()
}
