//! Nucleotides, sequences, patterns and the search report shared by every engine.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("invalid nucleotide symbol {0:?}")]
    InvalidSymbol(char),
    #[error("invalid nucleotide code {0}")]
    InvalidCode(u8),
    #[error("patterns must contain at least one nucleotide")]
    EmptyPattern,
    #[error("pattern {pattern} was already accumulated at position {existing}")]
    DoubleAccumulation { pattern: usize, existing: usize },
    #[error("pattern {pattern} has no accumulated match to retract")]
    NothingToRetract { pattern: usize },
    #[error("pattern index {pattern} out of range for {patterns} patterns")]
    PatternOutOfRange { pattern: usize, patterns: usize },
    #[error("match range [{pos}, {end}) exceeds sequence length {len}")]
    RangeOutOfBounds { pos: usize, end: usize, len: usize },
    #[error("report shape mismatch: expected {expected_patterns} patterns over {expected_len} positions, got {patterns} over {len}")]
    ShapeMismatch {
        expected_patterns: usize,
        expected_len: usize,
        patterns: usize,
        len: usize,
    },
}

/// One DNA symbol, stored as its two-bit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[repr(u8)]
pub enum Nucleotide {
    A = 0,
    C = 1,
    G = 2,
    T = 3,
}

impl Nucleotide {
    pub const ALL: [Nucleotide; 4] = [Nucleotide::A, Nucleotide::C, Nucleotide::G, Nucleotide::T];

    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn from_code(code: u8) -> Result<Self, ModelError> {
        Self::ALL
            .get(code as usize)
            .copied()
            .ok_or(ModelError::InvalidCode(code))
    }

    pub fn to_char(self) -> char {
        match self {
            Nucleotide::A => 'A',
            Nucleotide::C => 'C',
            Nucleotide::G => 'G',
            Nucleotide::T => 'T',
        }
    }

    pub fn from_char(c: char) -> Result<Self, ModelError> {
        match c {
            'A' => Ok(Nucleotide::A),
            'C' => Ok(Nucleotide::C),
            'G' => Ok(Nucleotide::G),
            'T' => Ok(Nucleotide::T),
            other => Err(ModelError::InvalidSymbol(other)),
        }
    }
}

fn parse_symbols(s: &str) -> Result<Vec<Nucleotide>, ModelError> {
    s.chars().map(Nucleotide::from_char).collect()
}

fn write_symbols(f: &mut fmt::Formatter<'_>, data: &[Nucleotide]) -> fmt::Result {
    let text: String = data.iter().map(|n| n.to_char()).collect();
    f.write_str(&text)
}

/// The main DNA string, a flat array of nucleotides.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Sequence {
    data: Vec<Nucleotide>,
}

impl Sequence {
    pub fn new(data: Vec<Nucleotide>) -> Self {
        Sequence { data }
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn as_slice(&self) -> &[Nucleotide] {
        &self.data
    }

    pub fn into_inner(self) -> Vec<Nucleotide> {
        self.data
    }
}

impl FromStr for Sequence {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_symbols(s).map(Sequence::new)
    }
}

impl fmt::Display for Sequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_symbols(f, &self.data)
    }
}

/// Where a pattern came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Random,
    /// Copied verbatim from the main sequence starting at `source_location`.
    Sample {
        source_location: usize,
    },
}

/// A non-empty nucleotide string to search for.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pattern {
    data: Vec<Nucleotide>,
    provenance: Provenance,
}

impl Pattern {
    pub fn new(data: Vec<Nucleotide>, provenance: Provenance) -> Result<Self, ModelError> {
        if data.is_empty() {
            return Err(ModelError::EmptyPattern);
        }
        Ok(Pattern { data, provenance })
    }

    pub fn random(data: Vec<Nucleotide>) -> Result<Self, ModelError> {
        Self::new(data, Provenance::Random)
    }

    /// Copies `seq[loc..loc + len]`. Panics if the range is outside the sequence.
    pub fn sample(seq: &Sequence, loc: usize, len: usize) -> Result<Self, ModelError> {
        Self::new(
            seq.as_slice()[loc..loc + len].to_vec(),
            Provenance::Sample {
                source_location: loc,
            },
        )
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn as_slice(&self) -> &[Nucleotide] {
        &self.data
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn source_location(&self) -> Option<usize> {
        match self.provenance {
            Provenance::Sample { source_location } => Some(source_location),
            Provenance::Random => None,
        }
    }
}

impl FromStr for Pattern {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Pattern::random(parse_symbols(s)?)
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_symbols(f, &self.data)
    }
}

/// Patterns in index order. Indices are the identifiers used in reports.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PatternSet {
    patterns: Vec<Pattern>,
}

impl PatternSet {
    pub fn new(patterns: Vec<Pattern>) -> Self {
        PatternSet { patterns }
    }

    /// Parses each string as a random-provenance pattern.
    pub fn parse<S: AsRef<str>>(items: &[S]) -> Result<Self, ModelError> {
        items
            .iter()
            .map(|s| s.as_ref().parse())
            .collect::<Result<Vec<_>, _>>()
            .map(PatternSet::new)
    }

    pub fn len(&self) -> usize {
        self.patterns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patterns.is_empty()
    }

    pub fn get(&self, p: usize) -> Option<&Pattern> {
        self.patterns.get(p)
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Pattern> {
        self.patterns.iter()
    }

    pub fn as_slice(&self) -> &[Pattern] {
        &self.patterns
    }

    pub fn lengths(&self) -> Vec<usize> {
        self.patterns.iter().map(Pattern::len).collect()
    }
}

impl std::ops::Index<usize> for PatternSet {
    type Output = Pattern;

    fn index(&self, p: usize) -> &Pattern {
        &self.patterns[p]
    }
}

impl<'a> IntoIterator for &'a PatternSet {
    type Item = &'a Pattern;
    type IntoIter = std::slice::Iter<'a, Pattern>;

    fn into_iter(self) -> Self::IntoIter {
        self.patterns.iter()
    }
}

/// True iff `pat` occurs in `seq` starting at `start`.
///
/// The caller guarantees `start + pat.len() <= seq.len()`.
#[inline]
pub fn match_at(seq: &[Nucleotide], pat: &[Nucleotide], start: usize) -> bool {
    debug_assert!(start + pat.len() <= seq.len());
    seq[start..start + pat.len()] == *pat
}

/// Modulus applied to the sum of first-match positions.
pub const CHECKSUM_MODULUS: u64 = 1 << 32;

/// Result of searching every pattern of a set in one sequence.
///
/// `pat_found[p]` is `None` when pattern `p` does not occur (serialized as -1).
/// `seq_matches[i]` counts the found patterns whose first match covers `i`.
/// The summary fields are only meaningful after [`SearchReport::finalize`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchReport {
    pub pat_found: Vec<Option<usize>>,
    pub seq_matches: Vec<u32>,
    pub pat_matches: usize,
    pub checksum_found: u64,
    pub multi_match_positions: usize,
}

impl SearchReport {
    pub fn new(n_patterns: usize, seq_len: usize) -> Self {
        SearchReport {
            pat_found: vec![None; n_patterns],
            seq_matches: vec![0; seq_len],
            pat_matches: 0,
            checksum_found: 0,
            multi_match_positions: 0,
        }
    }

    pub fn n_patterns(&self) -> usize {
        self.pat_found.len()
    }

    pub fn seq_len(&self) -> usize {
        self.seq_matches.len()
    }

    fn check_range(&self, p: usize, pos: usize, len: usize) -> Result<(), ModelError> {
        if p >= self.pat_found.len() {
            return Err(ModelError::PatternOutOfRange {
                pattern: p,
                patterns: self.pat_found.len(),
            });
        }
        let end = pos.saturating_add(len);
        if end > self.seq_matches.len() {
            return Err(ModelError::RangeOutOfBounds {
                pos,
                end,
                len: self.seq_matches.len(),
            });
        }
        Ok(())
    }

    /// Records the match of pattern `p` at `pos` covering `len` positions.
    ///
    /// Each pattern may be accumulated at most once.
    pub fn accumulate_match(&mut self, p: usize, pos: usize, len: usize) -> Result<(), ModelError> {
        self.check_range(p, pos, len)?;
        if let Some(existing) = self.pat_found[p] {
            return Err(ModelError::DoubleAccumulation {
                pattern: p,
                existing,
            });
        }
        self.pat_found[p] = Some(pos);
        self.pat_matches += 1;
        for count in &mut self.seq_matches[pos..pos + len] {
            *count += 1;
        }
        Ok(())
    }

    /// Undoes a previous [`accumulate_match`](Self::accumulate_match) of pattern `p`.
    pub fn retract_match(&mut self, p: usize, len: usize) -> Result<usize, ModelError> {
        let pos = self
            .pat_found
            .get(p)
            .copied()
            .flatten()
            .ok_or(ModelError::NothingToRetract { pattern: p })?;
        self.check_range(p, pos, len)?;
        self.pat_found[p] = None;
        self.pat_matches -= 1;
        for count in &mut self.seq_matches[pos..pos + len] {
            *count -= 1;
        }
        Ok(pos)
    }

    /// Computes the checksum and the multi-match position count.
    pub fn finalize(&mut self) {
        self.pat_matches = self.pat_found.iter().flatten().count();
        self.checksum_found = self
            .pat_found
            .iter()
            .flatten()
            .fold(0u64, |acc, &pos| acc.wrapping_add(pos as u64))
            % CHECKSUM_MODULUS;
        self.multi_match_positions = self.seq_matches.iter().filter(|&&c| c > 1).count();
    }

    pub fn finalized(mut self) -> Self {
        self.finalize();
        self
    }

    /// `pat_found` with `-1` for patterns that were not found.
    pub fn pat_found_signed(&self) -> Vec<i64> {
        self.pat_found
            .iter()
            .map(|p| p.map_or(-1, |pos| pos as i64))
            .collect()
    }

    /// Checks the five report invariants against the pattern lengths.
    pub fn check_invariants(&self, pattern_lens: &[usize]) -> Result<(), String> {
        if pattern_lens.len() != self.pat_found.len() {
            return Err(format!(
                "report has {} patterns, expected {}",
                self.pat_found.len(),
                pattern_lens.len()
            ));
        }
        let found = self.pat_found.iter().flatten().count();
        if found != self.pat_matches {
            return Err(format!(
                "pat_matches {} != found count {found}",
                self.pat_matches
            ));
        }
        let covered: u64 = self.seq_matches.iter().map(|&c| c as u64).sum();
        let expected: u64 = self
            .pat_found
            .iter()
            .zip(pattern_lens)
            .filter(|(f, _)| f.is_some())
            .map(|(_, &len)| len as u64)
            .sum();
        if covered != expected {
            return Err(format!(
                "sum of seq_matches {covered} != sum of found lengths {expected}"
            ));
        }
        let checksum = self
            .pat_found
            .iter()
            .flatten()
            .map(|&p| p as u64)
            .sum::<u64>()
            % CHECKSUM_MODULUS;
        if checksum != self.checksum_found {
            return Err(format!("checksum {} != {checksum}", self.checksum_found));
        }
        let multi = self.seq_matches.iter().filter(|&&c| c > 1).count();
        if multi != self.multi_match_positions {
            return Err(format!("multi {} != {multi}", self.multi_match_positions));
        }
        Ok(())
    }

    /// Names the first field in which `self` and `other` differ.
    pub fn first_difference(&self, other: &SearchReport) -> Option<String> {
        if self.pat_matches != other.pat_matches {
            return Some(format!(
                "pat_matches: {} != {}",
                self.pat_matches, other.pat_matches
            ));
        }
        if self.checksum_found != other.checksum_found {
            return Some(format!(
                "checksum_found: {} != {}",
                self.checksum_found, other.checksum_found
            ));
        }
        if self.multi_match_positions != other.multi_match_positions {
            return Some(format!(
                "multi_match_positions: {} != {}",
                self.multi_match_positions, other.multi_match_positions
            ));
        }
        if self.pat_found.len() != other.pat_found.len() {
            return Some(format!(
                "pat_found length: {} != {}",
                self.pat_found.len(),
                other.pat_found.len()
            ));
        }
        let signed = (self.pat_found_signed(), other.pat_found_signed());
        if let Some(p) = (0..signed.0.len()).find(|&p| signed.0[p] != signed.1[p]) {
            return Some(format!(
                "pat_found[{p}]: {} != {}",
                signed.0[p], signed.1[p]
            ));
        }
        if self.seq_matches.len() != other.seq_matches.len() {
            return Some(format!(
                "seq_matches length: {} != {}",
                self.seq_matches.len(),
                other.seq_matches.len()
            ));
        }
        (0..self.seq_matches.len())
            .find(|&i| self.seq_matches[i] != other.seq_matches[i])
            .map(|i| {
                format!(
                    "seq_matches[{i}]: {} != {}",
                    self.seq_matches[i], other.seq_matches[i]
                )
            })
    }
}
