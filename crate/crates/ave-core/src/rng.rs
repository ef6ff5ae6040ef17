//! Portable splittable pseudo-random generator.
//!
//! Suites must regenerate bit-identically from their seeds on every platform,
//! so randomness comes from this small 64-bit counter-based generator (the
//! SplitMix64 finalizer) instead of a platform RNG. All derived floating-point
//! draws use only IEEE-exact operations.

const GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;
const MIX_A: u64 = 0xBF58_476D_1CE4_E5B9;
const MIX_B: u64 = 0x94D0_49BB_1331_11EB;
const SPLIT_SALT: u64 = 0xA076_1D64_78BD_642F;

fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(MIX_A);
    z = (z ^ (z >> 27)).wrapping_mul(MIX_B);
    z ^ (z >> 31)
}

/// Deterministic stream of pseudo-random values.
#[derive(Debug, Clone)]
pub struct Rng {
    state: u64,
}

impl Rng {
    pub fn from_seed(seed: u64) -> Self {
        Rng {
            state: mix(seed.wrapping_add(GAMMA)),
        }
    }

    /// Derive an independent child stream. Children with distinct `stream`
    /// ids never collide regardless of how many values either consumes.
    pub fn split(&self, stream: u64) -> Rng {
        Rng {
            state: mix(self.state ^ stream.wrapping_mul(SPLIT_SALT).wrapping_add(GAMMA)),
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GAMMA);
        mix(self.state)
    }

    /// Uniform draw from [0, 1) with 53 random bits.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform draw from the open interval (0, 1).
    pub fn next_open01(&mut self) -> f64 {
        loop {
            let f = self.next_f64();
            if f != 0.0 {
                return f;
            }
        }
    }

    /// Uniform draw from [lo, hi).
    pub fn range_f64(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    /// Uniform integer in [0, n). Rejection sampling keeps the draw unbiased.
    pub fn below(&mut self, n: u64) -> u64 {
        assert!(n > 0);
        if n.is_power_of_two() {
            return self.next_u64() & (n - 1);
        }
        let zone = u64::MAX - (u64::MAX % n) - 1;
        loop {
            let v = self.next_u64();
            if v <= zone {
                return v % n;
            }
        }
    }

    /// Two distinct indices in [0, n), returned in increasing order.
    pub fn index_pair(&mut self, n: usize) -> (usize, usize) {
        assert!(n >= 2);
        let i = self.below(n as u64) as usize;
        let mut j = self.below((n - 1) as u64) as usize;
        if j >= i {
            j += 1;
        }
        if i < j {
            (i, j)
        } else {
            (j, i)
        }
    }
}
