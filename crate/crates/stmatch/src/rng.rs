//! Minimal, portable pseudo-random generator for reproducible instances.
//!
//! SplitMix64 (Steele, Lea and Flood, "Fast splittable pseudorandom number
//! generators"): the 64-bit state advances by the golden-ratio increment and
//! the output is a finalization of the new state. A handful of integer
//! operations, trivially reimplementable bit-for-bit in any language:
//!
//! ```text
//! state += 0x9E3779B97F4A7C15
//! z = state
//! z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//! z = (z ^ (z >> 27)) * 0x94D049BB133111EB
//! output = z ^ (z >> 31)
//! ```
//!
//! Derived draws (`uniform*`, `gaussian`) consume a documented number of
//! `next_u64` calls so streams stay aligned across implementations. Integer
//! draws are exactly reproducible everywhere; float draws additionally
//! depend on the platform's `ln`/`cos`, which may differ in the last ulp.

const GOLDEN: u64 = 0x9E3779B97F4A7C15;
const MIX1: u64 = 0xBF58476D1CE4E5B9;
const MIX2: u64 = 0x94D049BB133111EB;
const TWO_POW_NEG53: f64 = 1.0 / 9007199254740992.0;

#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(MIX1);
        z = (z ^ (z >> 27)).wrapping_mul(MIX2);
        z ^ (z >> 31)
    }

    /// Uniform in [0, 1): the top 53 bits scaled by 2^-53. One draw.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * TWO_POW_NEG53
    }

    /// Uniform integer in [lo, hi] by modulo reduction. One draw. The modulo
    /// bias is below 2^-50 for the ranges used here.
    pub fn uniform_int(&mut self, lo: i64, hi: i64) -> i64 {
        debug_assert!(lo <= hi);
        let span = (hi - lo) as u64 + 1;
        lo + (self.next_u64() % span) as i64
    }

    /// Standard normal via Box-Muller. Two draws; the sine branch of the
    /// pair is discarded.
    pub fn gaussian(&mut self) -> f64 {
        // map to (0, 1] so the logarithm stays finite
        let u1 = ((self.next_u64() >> 11) + 1) as f64 * TWO_POW_NEG53;
        let u2 = (self.next_u64() >> 11) as f64 * TWO_POW_NEG53;
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }
}
