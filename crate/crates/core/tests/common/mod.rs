#![allow(dead_code)]

use dnasearch::generator::{build_scenario, Scenario, ScenarioParams};
use dnasearch::parallel::{Accumulation, Decomposition, Strategy, DEFAULT_CHUNK};
use dnasearch::rng::Lcg;

pub const WORKER_COUNTS: [usize; 4] = [1, 2, 4, 8];
pub const RANK_COUNTS: [usize; 5] = [1, 2, 3, 4, 8];

fn pick(rng: &mut Lcg, lo: u64, hi: u64) -> u64 {
    lo + rng.uniform(hi - lo + 1).unwrap()
}

fn prob(rng: &mut Lcg) -> f64 {
    pick(rng, 0, 1000) as f64 / 1000.0
}

/// Randomized parameters: L in [16, 10_000], at most 64 patterns mixing
/// random and sampled ones, random base probabilities.
pub fn random_params(case: u64) -> ScenarioParams {
    let mut rng = Lcg::new(0x5eed_0000 + case);
    let seq_length = pick(&mut rng, 16, 10_000) as usize;
    let (mut a, mut c, mut g) = (prob(&mut rng), prob(&mut rng), prob(&mut rng));
    let sum = a + c + g + prob(&mut rng);
    if sum > 0.0 {
        a /= sum;
        c /= sum;
        g /= sum;
    }
    let total = pick(&mut rng, 0, 64) as usize;
    let n_random = pick(&mut rng, 0, total as u64) as usize;
    ScenarioParams {
        seq_length,
        prob_a: a,
        prob_c: c,
        prob_g: g,
        n_random_patterns: n_random,
        rand_len_mean: pick(&mut rng, 1, 12) as usize,
        rand_len_dev: pick(&mut rng, 0, 6) as usize,
        n_sample_patterns: total - n_random,
        samp_len_mean: pick(&mut rng, 1, 3 * seq_length as u64 / 2) as usize,
        samp_len_dev: pick(&mut rng, 0, 200) as usize,
        samp_loc_mean: pick(&mut rng, 0, seq_length as u64) as usize,
        samp_loc_dev: pick(&mut rng, 0, seq_length as u64) as usize,
        seed: rng.next_u64(),
    }
}

pub fn random_scenario(case: u64) -> Scenario {
    build_scenario(&random_params(case)).unwrap()
}

/// Chunk size for a sweep case: small enough to split most patterns.
pub fn sweep_chunk(case: u64, seq_len: usize) -> usize {
    let mut rng = Lcg::new(0xc4a2_0000 + case);
    pick(&mut rng, 1, (seq_len as u64 / 3).max(1)) as usize
}

pub fn strategies(workers: usize, chunk: usize) -> Vec<Strategy> {
    let mut out = Vec::new();
    for d in Decomposition::ALL {
        for a in Accumulation::ALL {
            for chunk in [chunk, DEFAULT_CHUNK] {
                out.push(Strategy::new(d, workers, chunk, a).unwrap());
            }
        }
    }
    out
}

/// Prints one result line and fails the test if the criterion failed.
pub fn verdict(criterion: &str, failures: &[String]) {
    if failures.is_empty() {
        println!("PASS  {criterion}");
    } else {
        println!("FAIL  {criterion}");
        for f in failures.iter().take(10) {
            println!("      {f}");
        }
        panic!(
            "{criterion}: {} failures, first: {}",
            failures.len(),
            failures[0]
        );
    }
}
