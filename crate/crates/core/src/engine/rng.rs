//! SplitMix64, the generator behind every chance draw.
//!
//! The state lives inside `GameState`, so a copied state diverges from its
//! original only through explicit draws. The same generator seeds agents and
//! tools; it implements `rand_core::RngCore` so the `rand` adaptors work on it.

use rand_core::{impls, RngCore};

pub const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// Output function applied to an already-advanced state.
#[inline]
pub fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Top 53 bits of a 64-bit draw mapped into `[0, 1)`.
#[inline]
pub fn to_unit(bits: u64) -> f64 {
    (bits >> 11) as f64 / (1u64 << 53) as f64
}

/// One SplitMix64 step: returns `(raw 64-bit output, new state)`.
#[inline]
pub fn next_raw(state: u64) -> (u64, u64) {
    let s = state.wrapping_add(GOLDEN_GAMMA);
    (mix(s), s)
}

/// One draw in `[0, 1)` plus the advanced state.
#[inline]
pub fn draw_uniform(state: u64) -> (f64, u64) {
    let (raw, s) = next_raw(state);
    (to_unit(raw), s)
}

/// Derive an independent stream seed from a base seed and a salt.
#[inline]
pub fn derive_seed(base: u64, salt: u64) -> u64 {
    mix(base ^ mix(salt.wrapping_add(GOLDEN_GAMMA)))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn state(&self) -> u64 {
        self.state
    }

    pub fn next_uniform(&mut self) -> f64 {
        let (u, s) = draw_uniform(self.state);
        self.state = s;
        u
    }

    /// Spawn an independent child stream.
    pub fn fork(&mut self) -> SplitMix64 {
        SplitMix64::new(self.next_u64())
    }
}

impl RngCore for SplitMix64 {
    fn next_u32(&mut self) -> u32 {
        (self.next_u64() >> 32) as u32
    }

    fn next_u64(&mut self) -> u64 {
        let (raw, s) = next_raw(self.state);
        self.state = s;
        raw
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        impls::fill_bytes_via_next(self, dest)
    }

    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> Result<(), rand_core::Error> {
        self.fill_bytes(dest);
        Ok(())
    }
}
