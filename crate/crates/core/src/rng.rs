//! 64-bit linear congruential generator with logarithmic skip-ahead.
//!
//! The state advances as `state' = a * state + c (mod 2^64)`. Outputs are a
//! scrambled copy of the state before the transition, so the low bits are
//! usable. Skipping `n` steps composes the affine map with itself by
//! square-and-multiply.

use thiserror::Error;

pub const MULTIPLIER: u64 = 6364136223846793005;
pub const INCREMENT: u64 = 1442695040888963407;

const SCRAMBLE_SHIFT: u32 = 33;
const SCRAMBLE_MULTIPLIER: u64 = 0xff51_afd7_ed55_8ccd;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("uniform bound must be at least 1")]
pub struct ZeroBound;

/// An affine map `x -> mul * x + add (mod 2^64)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Affine {
    mul: u64,
    add: u64,
}

impl Affine {
    const IDENTITY: Affine = Affine { mul: 1, add: 0 };
    const STEP: Affine = Affine {
        mul: MULTIPLIER,
        add: INCREMENT,
    };

    /// `self ∘ inner`: apply `inner` first.
    fn compose(self, inner: Affine) -> Affine {
        Affine {
            mul: self.mul.wrapping_mul(inner.mul),
            add: self.mul.wrapping_mul(inner.add).wrapping_add(self.add),
        }
    }

    fn apply(self, x: u64) -> u64 {
        self.mul.wrapping_mul(x).wrapping_add(self.add)
    }

    fn pow(self, mut n: u64) -> Affine {
        let mut acc = Affine::IDENTITY;
        let mut base = self;
        while n > 0 {
            if n & 1 == 1 {
                acc = base.compose(acc);
            }
            base = base.compose(base);
            n >>= 1;
        }
        acc
    }
}

/// Output scramble: xorshift-high, odd multiply, xor-fold.
#[inline]
pub fn scramble(state: u64) -> u64 {
    let x = (state ^ (state >> SCRAMBLE_SHIFT)).wrapping_mul(SCRAMBLE_MULTIPLIER);
    x ^ (x >> SCRAMBLE_SHIFT)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Lcg {
    state: u64,
}

impl Lcg {
    /// Seeds with `seed + c` and applies one transition.
    pub fn new(seed: u64) -> Self {
        let mut rng = Lcg {
            state: seed.wrapping_add(INCREMENT),
        };
        rng.step();
        rng
    }

    pub fn from_state(state: u64) -> Self {
        Lcg { state }
    }

    pub fn state(&self) -> u64 {
        self.state
    }

    #[inline]
    fn step(&mut self) {
        self.state = Affine::STEP.apply(self.state);
    }

    /// Returns the scrambled current state and advances one transition.
    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        let out = scramble(self.state);
        self.step();
        out
    }

    /// Advances `n` transitions in O(log n).
    pub fn skip(&mut self, n: u64) {
        self.state = Affine::STEP.pow(n).apply(self.state);
    }

    pub fn skipped(mut self, n: u64) -> Self {
        self.skip(n);
        self
    }

    /// Uniform integer in `[0, bound)` from exactly one raw draw.
    #[inline]
    pub fn uniform(&mut self, bound: u64) -> Result<u64, ZeroBound> {
        if bound == 0 {
            return Err(ZeroBound);
        }
        Ok(scale(self.next_u64(), bound))
    }
}

/// `floor(draw * bound / 2^64)`.
#[inline]
pub fn scale(draw: u64, bound: u64) -> u64 {
    ((draw as u128 * bound as u128) >> 64) as u64
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn iterate(mut rng: Lcg, n: u64) -> Lcg {
        for _ in 0..n {
            rng.next_u64();
        }
        rng
    }

    #[test]
    fn constants_are_odd() {
        assert_eq!(MULTIPLIER & 1, 1);
        assert_eq!(INCREMENT & 1, 1);
        assert_eq!(SCRAMBLE_MULTIPLIER & 1, 1);
    }

    #[test]
    fn seeding_is_deterministic_and_distinguishes_small_seeds() {
        assert_eq!(Lcg::new(7), Lcg::new(7));
        assert_ne!(Lcg::new(0), Lcg::new(1));
        assert_eq!(
            Lcg::new(0).state(),
            INCREMENT.wrapping_mul(MULTIPLIER).wrapping_add(INCREMENT)
        );
    }

    #[test]
    fn next_is_affine_transition() {
        let mut rng = Lcg::from_state(12345);
        let out = rng.next_u64();
        assert_eq!(out, scramble(12345));
        assert_eq!(
            rng.state(),
            12345u64.wrapping_mul(MULTIPLIER).wrapping_add(INCREMENT)
        );
    }

    #[test]
    fn skip_zero_and_one() {
        let rng = Lcg::new(99);
        assert_eq!(rng.skipped(0), rng);
        assert_eq!(rng.skipped(1), iterate(rng, 1));
    }

    #[test]
    fn skip_million_matches_iteration() {
        let mut seeder = Lcg::new(2024);
        for _ in 0..100 {
            let rng = Lcg::new(seeder.next_u64());
            assert_eq!(rng.skipped(1_000_000), iterate(rng, 1_000_000));
        }
    }

    #[test]
    fn top_two_bits_are_balanced() {
        let mut rng = Lcg::new(42);
        let mut counts = [0u32; 4];
        let draws = 1 << 16;
        for _ in 0..draws {
            counts[(rng.next_u64() >> 62) as usize] += 1;
        }
        let expected = draws as f64 / 4.0;
        for c in counts {
            assert!((c as f64 - expected).abs() <= 0.05 * expected, "{counts:?}");
        }
    }

    #[test]
    fn uniform_degenerate_and_zero_bound() {
        let mut rng = Lcg::new(3);
        for _ in 0..100 {
            assert_eq!(rng.uniform(1), Ok(0));
        }
        assert_eq!(rng.uniform(0), Err(ZeroBound));
    }

    #[test]
    fn uniform_four_is_balanced() {
        let mut rng = Lcg::new(11);
        let mut counts = [0u32; 4];
        let draws = 1 << 16;
        for _ in 0..draws {
            counts[rng.uniform(4).unwrap() as usize] += 1;
        }
        let expected = draws as f64 / 4.0;
        for c in counts {
            assert!((c as f64 - expected).abs() <= 0.05 * expected, "{counts:?}");
        }
    }

    proptest! {
        #[test]
        fn uniform_in_range_and_one_step(seed in any::<u64>(), bound in 1u64..) {
            let mut rng = Lcg::new(seed);
            let before = rng;
            let v = rng.uniform(bound).unwrap();
            prop_assert!(v < bound);
            prop_assert_eq!(rng, before.skipped(1));
        }

        #[test]
        fn skip_composes(seed in any::<u64>(), p in any::<u64>(), q in any::<u64>()) {
            let rng = Lcg::new(seed);
            let total = p.wrapping_add(q);
            // p + q wraps mod 2^64, and so does the period of the generator
            prop_assert_eq!(rng.skipped(p).skipped(q), rng.skipped(total));
        }

        #[test]
        fn small_skips_match_iteration(seed in any::<u64>(), n in 0u64..600) {
            let rng = Lcg::new(seed);
            prop_assert_eq!(rng.skipped(n), iterate(rng, n));
        }
    }
}
