//! SplitMix64, the seeded generator behind the lossy channel and the PPG
//! noise fixture.
//!
//! The algorithm is part of the reproducibility contract: given the same
//! seed, every implementation of the link must draw the same sequence.
//!
//! ```text
//! state  = state + 0x9E3779B97F4A7C15            (wrapping)
//! z      = state
//! z      = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9  (wrapping)
//! z      = (z ^ (z >> 27)) * 0x94D049BB133111EB  (wrapping)
//! output = z ^ (z >> 31)
//! ```
//!
//! Uniform floats take the top 53 bits: `(output >> 11) * 2^-53`, in `[0, 1)`.

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform in `[0, 1)`.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// One Bernoulli draw. Always consumes exactly one output, even for
    /// `p` of 0 or 1, so draw positions stay aligned across configurations.
    pub fn chance(&mut self, p: f64) -> bool {
        self.next_f64() < p
    }
}
