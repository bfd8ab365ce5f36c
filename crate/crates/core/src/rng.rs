//! Portable seeded randomness.
//!
//! Every random draw in the toolchain comes from the algorithms here, so that
//! any language that reimplements them reproduces datasets bit for bit:
//!
//! * SplitMix64 derives per-image (and per-record) seeds from a master seed.
//! * xoshiro256++ is the per-image stream, seeded by four SplitMix64 outputs.
//! * Uniform reals take the top 53 bits of a draw: `(x >> 11) * 2^-53`.
//! * Bounded integers use rejection sampling on the full 64-bit draw.
//! * Beta variates use Jöhnk's algorithm.

const GOLDEN_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

/// SplitMix64 generator.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN_GAMMA);
        mix64(self.state)
    }
}

fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed for item `index` of a dataset built from `master_seed`.
///
/// This is output number `index` (zero-based) of a SplitMix64 stream seeded
/// with `master_seed`, computed in O(1).
pub fn derive_seed(master_seed: u64, index: u64) -> u64 {
    mix64(master_seed.wrapping_add(index.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA)))
}

/// xoshiro256++ 1.0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Xoshiro256PlusPlus {
    s: [u64; 4],
}

impl Xoshiro256PlusPlus {
    /// Seeds the state with four consecutive SplitMix64 outputs.
    pub fn seed_from_u64(seed: u64) -> Self {
        let mut sm = SplitMix64::new(seed);
        let s = [sm.next_u64(), sm.next_u64(), sm.next_u64(), sm.next_u64()];
        Self::from_state(s)
    }

    /// Raw state constructor. The all-zero state is a fixed point and is
    /// replaced by the stream for seed 0.
    pub fn from_state(s: [u64; 4]) -> Self {
        if s == [0; 4] {
            return Self::seed_from_u64(0);
        }
        Self { s }
    }

    pub fn next_u64(&mut self) -> u64 {
        let s = &mut self.s;
        let result = s[0].wrapping_add(s[3]).rotate_left(23).wrapping_add(s[0]);
        let t = s[1] << 17;
        s[2] ^= s[0];
        s[3] ^= s[1];
        s[1] ^= s[2];
        s[0] ^= s[3];
        s[2] ^= t;
        s[3] = s[3].rotate_left(45);
        result
    }

    /// Uniform real in `[0, 1)` with 53 bits of precision.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform real in `[low, high)`. Requires `low < high`.
    pub fn uniform(&mut self, low: f64, high: f64) -> f64 {
        let v = low + (high - low) * self.next_f64();
        // low + span * u can round up to `high` when u is close to 1.
        if v >= high {
            high.next_down()
        } else {
            v
        }
    }

    /// Uniform integer in `0..n`. Requires `n > 0`.
    pub fn below(&mut self, n: u64) -> u64 {
        assert!(n > 0, "below(0) has no valid outcome");
        // Largest multiple of n that fits, expressed as a lower threshold.
        let threshold = n.wrapping_neg() % n;
        loop {
            let r = self.next_u64();
            if r >= threshold {
                return r % n;
            }
        }
    }

    /// `true` with probability `p`; consumes exactly one draw.
    pub fn coin(&mut self, p: f64) -> bool {
        self.next_f64() < p
    }

    /// Beta(alpha, beta) by Jöhnk's algorithm.
    ///
    /// Each attempt consumes two uniforms `u`, `v`; with `x = u^(1/alpha)` and
    /// `y = v^(1/beta)` the attempt is accepted when `0 < x + y <= 1` and the
    /// variate is `x / (x + y)`.
    pub fn beta(&mut self, alpha: f64, beta: f64) -> f64 {
        debug_assert!(alpha > 0.0 && beta > 0.0);
        let inv_a = 1.0 / alpha;
        let inv_b = 1.0 / beta;
        loop {
            let u = self.next_f64();
            let v = self.next_f64();
            let x = u.powf(inv_a);
            let y = v.powf(inv_b);
            let sum = x + y;
            if sum <= 1.0 && sum > 0.0 {
                return x / sum;
            }
        }
    }
}
