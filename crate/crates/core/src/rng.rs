//! Deterministic, platform-independent random number generation.
//!
//! Every stochastic choice in the simulator (vertex selection, forgetfulness
//! subsets, random initial words) flows through [`Xoshiro256PlusPlus`], seeded
//! via [`SplitMix64`]. Both are pure 64-bit integer arithmetic, so identical
//! seeds produce identical trajectories on every platform.
//!
//! Stream splitting: each run of a sweep gets its own generator, seeded by
//! [`derive_run_seed`] from the master seed and the run coordinates
//! (radius, p, replicate index). Runs are therefore independent of execution
//! order and can be dispatched to worker threads freely.

/// SplitMix64 state mixer. Used to expand a single `u64` seed into
/// generator state and to hash run coordinates into per-run seeds.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
}

/// xoshiro256++ generator (Blackman & Vigna), seeded through SplitMix64.
///
/// State is exactly four words, exposed for snapshot round-trips.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Xoshiro256PlusPlus {
    s: [u64; 4],
}

impl Xoshiro256PlusPlus {
    pub fn from_seed(seed: u64) -> Self {
        let mut mixer = SplitMix64::new(seed);
        let s = [
            mixer.next_u64(),
            mixer.next_u64(),
            mixer.next_u64(),
            mixer.next_u64(),
        ];
        Xoshiro256PlusPlus { s }
    }

    /// Restores a generator from raw state words (snapshot load).
    /// An all-zero state is degenerate and never produced by `from_seed`.
    pub fn from_state(s: [u64; 4]) -> Self {
        debug_assert!(s.iter().any(|&w| w != 0), "all-zero xoshiro state");
        Xoshiro256PlusPlus { s }
    }

    pub fn state(&self) -> [u64; 4] {
        self.s
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

    /// Uniform integer in `0..bound` without modulo bias
    /// (Lemire's widening-multiply rejection method).
    pub fn below(&mut self, bound: u64) -> u64 {
        debug_assert!(bound > 0);
        let mut product = (self.next_u64() as u128) * (bound as u128);
        let mut low = product as u64;
        if low < bound {
            let threshold = bound.wrapping_neg() % bound;
            while low < threshold {
                product = (self.next_u64() as u128) * (bound as u128);
                low = product as u64;
            }
        }
        (product >> 64) as u64
    }
}

/// Seed for one run of a sweep, derived from the master seed and the run
/// coordinates. Each field is folded through a SplitMix64 step so that
/// neighboring coordinates give unrelated streams.
pub fn derive_run_seed(master_seed: u64, radius: u32, p: f64, replicate: u32) -> u64 {
    let mut h = master_seed;
    h = SplitMix64::new(h ^ radius as u64).next_u64();
    h = SplitMix64::new(h ^ p.to_bits()).next_u64();
    h = SplitMix64::new(h ^ replicate as u64).next_u64();
    h
}
