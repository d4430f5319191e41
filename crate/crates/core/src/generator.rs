//! Reproducible scenario generation.
//!
//! Every random datum has a fixed offset in one global draw stream:
//!
//! - sequence position `i` uses draw `i`;
//! - pattern `p` (randoms first, then samples) uses draws starting at
//!   `L + p * stride`, where `stride = 2 + max_len_bound`.
//!
//! A worker reaches any offset with [`Lcg::skip`], so the scenario does not
//! depend on how many workers generate it.

use std::fmt::Write as _;
use std::io;
use std::path::Path;

use thiserror::Error;

use crate::model::{Nucleotide, Pattern, PatternSet, Sequence};
use crate::rng::Lcg;

/// Slack allowed on the probability sum so decimal inputs like 0.1/0.2/0.7 pass.
const PROB_SUM_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParamError {
    #[error("sequence length must be at least 1")]
    ZeroLength,
    #[error("probability {name} = {value} is outside [0, 1]")]
    ProbabilityRange { name: &'static str, value: f64 },
    #[error("base probabilities sum to {0}, which exceeds 1")]
    ProbabilitySum(f64),
    #[error("{0} length mean must be at least 1 when patterns are requested")]
    ZeroLengthMean(&'static str),
    #[error("deviation {0} is too large")]
    DeviationTooLarge(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioParams {
    pub seq_length: usize,
    pub prob_a: f64,
    pub prob_c: f64,
    pub prob_g: f64,
    pub n_random_patterns: usize,
    pub rand_len_mean: usize,
    pub rand_len_dev: usize,
    pub n_sample_patterns: usize,
    pub samp_len_mean: usize,
    pub samp_len_dev: usize,
    pub samp_loc_mean: usize,
    pub samp_loc_dev: usize,
    pub seed: u64,
}

impl Default for ScenarioParams {
    fn default() -> Self {
        ScenarioParams {
            seq_length: 1000,
            prob_a: 0.25,
            prob_c: 0.25,
            prob_g: 0.25,
            n_random_patterns: 0,
            rand_len_mean: 1,
            rand_len_dev: 0,
            n_sample_patterns: 0,
            samp_len_mean: 1,
            samp_len_dev: 0,
            samp_loc_mean: 0,
            samp_loc_dev: 0,
            seed: 0,
        }
    }
}

const MAX_DEVIATION: usize = 1 << 40;

impl ScenarioParams {
    pub fn validate(&self) -> Result<(), ParamError> {
        if self.seq_length == 0 {
            return Err(ParamError::ZeroLength);
        }
        for (name, value) in [("A", self.prob_a), ("C", self.prob_c), ("G", self.prob_g)] {
            if !(0.0..=1.0).contains(&value) {
                return Err(ParamError::ProbabilityRange { name, value });
            }
        }
        let sum = self.prob_a + self.prob_c + self.prob_g;
        if sum > 1.0 + PROB_SUM_SLACK {
            return Err(ParamError::ProbabilitySum(sum));
        }
        if self.n_random_patterns > 0 && self.rand_len_mean == 0 {
            return Err(ParamError::ZeroLengthMean("random pattern"));
        }
        if self.n_sample_patterns > 0 && self.samp_len_mean == 0 {
            return Err(ParamError::ZeroLengthMean("sample pattern"));
        }
        for dev in [self.rand_len_dev, self.samp_len_dev, self.samp_loc_dev] {
            if dev > MAX_DEVIATION {
                return Err(ParamError::DeviationTooLarge(dev));
            }
        }
        Ok(())
    }

    pub fn n_patterns(&self) -> usize {
        self.n_random_patterns + self.n_sample_patterns
    }

    /// Upper bound of any pattern length; independent of the pattern counts.
    pub fn max_pattern_len_bound(&self) -> u64 {
        let rand = self.rand_len_mean as u64 + self.rand_len_dev as u64;
        let samp = self.samp_len_mean as u64 + self.samp_len_dev as u64;
        rand.max(samp).max(1)
    }

    /// Draws reserved per pattern in the global stream.
    pub fn pattern_stride(&self) -> u64 {
        2 + self.max_pattern_len_bound()
    }

    /// Stream offset of the first draw of pattern `p`.
    pub fn pattern_offset(&self, p: usize) -> u64 {
        self.seq_length as u64 + p as u64 * self.pattern_stride()
    }

    fn base_rng(&self) -> Lcg {
        Lcg::new(self.seed)
    }

    fn thresholds(&self) -> BaseThresholds {
        BaseThresholds::new(self.prob_a, self.prob_c, self.prob_g)
    }
}

/// Cumulative probability cut points scaled to `2^64`, in integer form.
#[derive(Debug, Clone, Copy)]
struct BaseThresholds {
    cuts: [u128; 3],
}

impl BaseThresholds {
    fn new(a: f64, c: f64, g: f64) -> Self {
        let scale = |p: f64| (p.clamp(0.0, 1.0) * 18446744073709551616.0).floor() as u128;
        BaseThresholds {
            cuts: [scale(a), scale(a + c), scale(a + c + g)],
        }
    }

    #[inline]
    fn pick(&self, draw: u64) -> Nucleotide {
        let d = draw as u128;
        if d < self.cuts[0] {
            Nucleotide::A
        } else if d < self.cuts[1] {
            Nucleotide::C
        } else if d < self.cuts[2] {
            Nucleotide::G
        } else {
            Nucleotide::T
        }
    }
}

/// Uniform integer in `[mean - dev, mean + dev]`, possibly negative. One draw.
fn draw_around(mean: usize, dev: usize, rng: &mut Lcg) -> i128 {
    let width = 2 * dev as u64 + 1;
    let offset = rng.uniform(width).expect("width is at least 1");
    mean as i128 - dev as i128 + offset as i128
}

/// Uniform integer in `[mean - dev, mean + dev]` clamped below at 1. One draw.
pub fn draw_bounded_deviate(mean: usize, dev: usize, rng: &mut Lcg) -> usize {
    draw_around(mean, dev, rng).max(1) as usize
}

/// The main sequence, generated by one worker.
pub fn generate_sequence(params: &ScenarioParams) -> Result<Sequence, ParamError> {
    generate_sequence_parallel(params, 1)
}

/// The main sequence, generated by `workers` threads over contiguous blocks.
///
/// The result is identical for every worker count.
pub fn generate_sequence_parallel(
    params: &ScenarioParams,
    workers: usize,
) -> Result<Sequence, ParamError> {
    params.validate()?;
    let len = params.seq_length;
    let thresholds = params.thresholds();
    let base = params.base_rng();
    let mut data = vec![Nucleotide::A; len];
    let workers = workers.clamp(1, len);
    let block = len.div_ceil(workers);
    std::thread::scope(|scope| {
        for (b, chunk) in data.chunks_mut(block).enumerate() {
            scope.spawn(move || {
                let mut rng = base.skipped((b * block) as u64);
                for slot in chunk {
                    *slot = thresholds.pick(rng.next_u64());
                }
            });
        }
    });
    Ok(Sequence::new(data))
}

/// Random pattern `p`: a length draw followed by one draw per symbol.
pub fn generate_random_pattern(p: usize, params: &ScenarioParams) -> Pattern {
    let mut rng = params.base_rng().skipped(params.pattern_offset(p));
    let len = draw_bounded_deviate(params.rand_len_mean, params.rand_len_dev, &mut rng);
    let thresholds = params.thresholds();
    let data = (0..len).map(|_| thresholds.pick(rng.next_u64())).collect();
    Pattern::random(data).expect("length is at least 1")
}

/// Sample pattern number `s` (global pattern index `n_random_patterns + s`),
/// cut out of `seq`.
pub fn extract_sample_pattern(s: usize, params: &ScenarioParams, seq: &Sequence) -> Pattern {
    let p = params.n_random_patterns + s;
    let mut rng = params.base_rng().skipped(params.pattern_offset(p));
    let seq_len = seq.len();
    let len =
        draw_bounded_deviate(params.samp_len_mean, params.samp_len_dev, &mut rng).min(seq_len);
    let loc = draw_around(params.samp_loc_mean, params.samp_loc_dev, &mut rng)
        .clamp(0, (seq_len - len) as i128) as usize;
    Pattern::sample(seq, loc, len).expect("length is at least 1")
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Scenario {
    pub sequence: Sequence,
    pub patterns: PatternSet,
}

impl Scenario {
    /// Plain-text dump: the sequence on line 1, then one pattern per line.
    pub fn to_dump(&self) -> String {
        let mut out = String::with_capacity(self.sequence.len() + 1);
        writeln!(out, "{}", self.sequence).unwrap();
        for pat in &self.patterns {
            writeln!(out, "{pat}").unwrap();
        }
        out
    }

    pub fn write_dump(&self, path: &Path) -> io::Result<()> {
        std::fs::write(path, self.to_dump())
    }
}

pub fn build_scenario(params: &ScenarioParams) -> Result<Scenario, ParamError> {
    build_scenario_parallel(params, 1)
}

/// Sequence, then random patterns, then sample patterns.
pub fn build_scenario_parallel(
    params: &ScenarioParams,
    workers: usize,
) -> Result<Scenario, ParamError> {
    let sequence = generate_sequence_parallel(params, workers)?;
    let patterns = (0..params.n_random_patterns)
        .map(|p| generate_random_pattern(p, params))
        .chain((0..params.n_sample_patterns).map(|s| extract_sample_pattern(s, params, &sequence)))
        .collect();
    Ok(Scenario {
        sequence,
        patterns: PatternSet::new(patterns),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Provenance;

    fn params() -> ScenarioParams {
        ScenarioParams {
            seq_length: 500,
            n_random_patterns: 4,
            rand_len_mean: 6,
            rand_len_dev: 3,
            n_sample_patterns: 4,
            samp_len_mean: 20,
            samp_len_dev: 10,
            samp_loc_mean: 250,
            samp_loc_dev: 200,
            seed: 17,
            ..Default::default()
        }
    }

    #[test]
    fn validation_rejects_bad_params() {
        let mut p = params();
        p.prob_a = 0.5;
        p.prob_c = 0.4;
        p.prob_g = 0.3;
        assert!(matches!(p.validate(), Err(ParamError::ProbabilitySum(_))));
        let p = ScenarioParams {
            seq_length: 0,
            ..params()
        };
        assert_eq!(p.validate(), Err(ParamError::ZeroLength));
        let p = ScenarioParams {
            rand_len_mean: 0,
            ..params()
        };
        assert!(p.validate().is_err());
        let p = ScenarioParams {
            prob_a: -0.1,
            ..params()
        };
        assert!(p.validate().is_err());
        let p = ScenarioParams {
            prob_a: 0.1,
            prob_c: 0.2,
            prob_g: 0.7,
            ..params()
        };
        assert!(p.validate().is_ok());
    }

    #[test]
    fn all_a_distribution() {
        let p = ScenarioParams {
            prob_a: 1.0,
            prob_c: 0.0,
            prob_g: 0.0,
            ..params()
        };
        let seq = generate_sequence(&p).unwrap();
        assert!(seq.as_slice().iter().all(|&n| n == Nucleotide::A));
    }

    #[test]
    fn all_t_when_probabilities_are_zero() {
        let p = ScenarioParams {
            prob_a: 0.0,
            prob_c: 0.0,
            prob_g: 0.0,
            ..params()
        };
        let seq = generate_sequence(&p).unwrap();
        assert!(seq.as_slice().iter().all(|&n| n == Nucleotide::T));
    }

    #[test]
    fn uniform_bases_are_balanced() {
        let p = ScenarioParams {
            seq_length: 1 << 16,
            ..params()
        };
        let seq = generate_sequence(&p).unwrap();
        let mut counts = [0usize; 4];
        for n in seq.as_slice() {
            counts[n.code() as usize] += 1;
        }
        let expected = (1 << 16) as f64 / 4.0;
        for c in counts {
            assert!((c as f64 - expected).abs() <= 0.03 * expected, "{counts:?}");
        }
    }

    #[test]
    fn sequence_matches_stream_offsets() {
        let p = params();
        let seq = generate_sequence(&p).unwrap();
        let t = p.thresholds();
        for i in [0usize, 1, 77, 499] {
            let draw = Lcg::new(p.seed).skipped(i as u64).next_u64();
            assert_eq!(seq.as_slice()[i], t.pick(draw));
        }
    }

    #[test]
    fn worker_count_does_not_change_sequence() {
        let p = ScenarioParams {
            seq_length: 10_007,
            ..params()
        };
        let one = generate_sequence_parallel(&p, 1).unwrap();
        for workers in [2, 3, 8, 64] {
            assert_eq!(generate_sequence_parallel(&p, workers).unwrap(), one);
        }
    }

    #[test]
    fn deviate_examples() {
        let mut rng = Lcg::new(5);
        for _ in 0..1000 {
            assert_eq!(draw_bounded_deviate(10, 0, &mut rng), 10);
            let v = draw_bounded_deviate(3, 5, &mut rng);
            assert!((1..=8).contains(&v));
        }
        let n = 1 << 14;
        let total: usize = (0..n)
            .map(|_| draw_bounded_deviate(100, 50, &mut rng))
            .sum();
        let mean = total as f64 / n as f64;
        assert!((mean - 100.0).abs() <= 2.0, "mean {mean}");
    }

    #[test]
    fn deviate_consumes_one_draw() {
        let mut rng = Lcg::new(8);
        let before = rng;
        draw_bounded_deviate(50, 49, &mut rng);
        assert_eq!(rng, before.skipped(1));
    }

    #[test]
    fn fixed_length_random_patterns() {
        let p = ScenarioParams {
            rand_len_mean: 4,
            rand_len_dev: 0,
            n_random_patterns: 30,
            ..params()
        };
        let sc = build_scenario(&p).unwrap();
        assert!(sc.patterns.iter().take(30).all(|pat| pat.len() == 4));
        assert_eq!(sc, build_scenario(&p).unwrap());
    }

    #[test]
    fn random_patterns_stable_when_count_grows() {
        let small = ScenarioParams {
            n_random_patterns: 10,
            ..params()
        };
        let large = ScenarioParams {
            n_random_patterns: 20,
            ..params()
        };
        let a = build_scenario(&small).unwrap();
        let b = build_scenario(&large).unwrap();
        for p in 0..10 {
            assert_eq!(a.patterns[p], b.patterns[p]);
        }
        assert_eq!(a.sequence, b.sequence);
    }

    #[test]
    fn sample_count_does_not_disturb_other_content() {
        let a = build_scenario(&params()).unwrap();
        let b = build_scenario(&ScenarioParams {
            n_sample_patterns: 40,
            ..params()
        })
        .unwrap();
        assert_eq!(a.sequence, b.sequence);
        for p in 0..params().n_patterns() {
            assert_eq!(a.patterns[p], b.patterns[p]);
        }
    }

    #[test]
    fn whole_sequence_sample_clamp() {
        let p = ScenarioParams {
            seq_length: 30,
            n_random_patterns: 0,
            n_sample_patterns: 3,
            samp_len_mean: 1000,
            samp_len_dev: 0,
            samp_loc_mean: 17,
            samp_loc_dev: 5,
            ..params()
        };
        let sc = build_scenario(&p).unwrap();
        for pat in &sc.patterns {
            assert_eq!(pat.len(), 30);
            assert_eq!(pat.source_location(), Some(0));
            assert_eq!(pat.as_slice(), sc.sequence.as_slice());
        }
    }

    #[test]
    fn zero_location_deviation_cuts_same_place() {
        let p = ScenarioParams {
            n_sample_patterns: 10,
            samp_len_mean: 5,
            samp_len_dev: 0,
            samp_loc_mean: 123,
            samp_loc_dev: 0,
            ..params()
        };
        let sc = build_scenario(&p).unwrap();
        for pat in sc.patterns.iter().skip(p.n_random_patterns) {
            assert_eq!(pat.source_location(), Some(123));
        }
    }

    #[test]
    fn location_mean_zero_is_allowed() {
        let p = ScenarioParams {
            n_sample_patterns: 10,
            samp_loc_mean: 0,
            samp_loc_dev: 3,
            ..params()
        };
        let sc = build_scenario(&p).unwrap();
        for pat in sc.patterns.iter().skip(p.n_random_patterns) {
            let loc = pat.source_location().unwrap();
            assert!(loc <= 3);
            assert_eq!(
                pat.as_slice(),
                &sc.sequence.as_slice()[loc..loc + pat.len()]
            );
        }
    }

    #[test]
    fn ordering_randoms_then_samples() {
        let p = ScenarioParams {
            n_random_patterns: 2,
            n_sample_patterns: 3,
            ..params()
        };
        let sc = build_scenario(&p).unwrap();
        let kinds: Vec<bool> = sc
            .patterns
            .iter()
            .map(|pat| matches!(pat.provenance(), Provenance::Random))
            .collect();
        assert_eq!(kinds, [true, true, false, false, false]);
        let empty = build_scenario(&ScenarioParams {
            n_random_patterns: 0,
            n_sample_patterns: 0,
            ..params()
        })
        .unwrap();
        assert!(empty.patterns.is_empty());
    }

    #[test]
    fn dump_format() {
        let p = ScenarioParams {
            seq_length: 12,
            n_random_patterns: 1,
            n_sample_patterns: 1,
            samp_len_mean: 3,
            samp_len_dev: 0,
            samp_loc_mean: 2,
            samp_loc_dev: 0,
            ..params()
        };
        let sc = build_scenario(&p).unwrap();
        let dump = sc.to_dump();
        let lines: Vec<&str> = dump.lines().collect();
        assert_eq!(lines.len(), 3);
        assert_eq!(lines[0], sc.sequence.to_string());
        assert_eq!(lines[2], &lines[0][2..5]);
    }
}
