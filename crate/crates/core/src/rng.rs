//! Per-element pseudo-random streams.
//!
//! Every element is hashed to a 64-bit seed (FNV-1a, one SplitMix64
//! finalizer round, XOR the global seed) and then expanded with the
//! SplitMix64 sequence. The draws an element produces are therefore a pure
//! function of its bytes and the global seed, which is what makes signatures
//! reproducible, mergeable and order independent.

use crate::error::Error;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;
const GOLDEN_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

/// 2^-53
const UNIT_SCALE: f64 = 1.0 / (1u64 << 53) as f64;

/// 64-bit FNV-1a over raw bytes.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    bytes.iter().fold(FNV_OFFSET, |h, &b| {
        (h ^ u64::from(b)).wrapping_mul(FNV_PRIME)
    })
}

/// The SplitMix64 output finalizer.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Maps a 64-bit word to `[0, 1)` using its top 53 bits.
#[inline]
pub fn word_to_unit(word: u64) -> f64 {
    (word >> 11) as f64 * UNIT_SCALE
}

/// Deterministic SplitMix64 stream with a word counter.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ElementStream {
    state: u64,
    draws: u64,
}

impl ElementStream {
    /// Stream starting from a raw generator state.
    pub fn from_state(state: u64) -> Self {
        Self { state, draws: 0 }
    }

    /// Stream for `element` under `global_seed`.
    pub fn seed_from_element(element: &[u8], global_seed: u64) -> Self {
        Self::from_state(mix64(fnv1a64(element)) ^ global_seed)
    }

    pub fn state(&self) -> u64 {
        self.state
    }

    /// Number of 64-bit words consumed so far.
    pub fn draws(&self) -> u64 {
        self.draws
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN_GAMMA);
        self.draws += 1;
        mix64(self.state)
    }

    /// Uniform double in `[0, 1)`; consumes exactly one word.
    #[inline]
    pub fn next_uniform_double(&mut self) -> f64 {
        word_to_unit(self.next_u64())
    }

    /// Uniform integer in `lo..=hi` by masked rejection.
    pub fn next_uniform_int(&mut self, lo: u64, hi: u64) -> Result<u64, Error> {
        if lo > hi {
            return Err(Error::EmptyRange { lo, hi });
        }
        Ok(self.uniform_in(lo, hi))
    }

    /// Unchecked variant used on the hot path; requires `lo <= hi`.
    #[inline]
    pub(crate) fn uniform_in(&mut self, lo: u64, hi: u64) -> u64 {
        debug_assert!(lo <= hi);
        let span = hi - lo;
        if span == 0 {
            return lo;
        }
        if span == u64::MAX {
            return self.next_u64();
        }
        // s = span + 1 values; mask covers ceil(log2 s) bits
        let mask = u64::MAX >> span.leading_zeros();
        loop {
            let v = self.next_u64() & mask;
            if v <= span {
                return lo + v;
            }
        }
    }

    #[inline]
    pub(crate) fn index_in(&mut self, lo: usize, hi: usize) -> usize {
        self.uniform_in(lo as u64, hi as u64) as usize
    }
}
