//! SplitMix64 generator with a counter-addressable stream and Box–Muller
//! normals.
//!
//! `SplitMix64::at(seed, i)` returns the `i`-th output of the stream seeded
//! by `seed` without walking the stream, so per-pixel noise can be drawn in
//! any order (or in parallel) and still be reproducible.

use std::f64::consts::TAU;

const GOLDEN_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

#[inline]
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Maps 64 random bits to a uniform value in `(0, 1]`.
#[inline]
fn to_unit_open_closed(bits: u64) -> f64 {
    ((bits >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
}

#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    /// Output number `index` (zero-based) of the stream seeded by `seed`.
    #[inline]
    pub fn at(seed: u64, index: u64) -> u64 {
        mix(seed.wrapping_add(index.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA)))
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN_GAMMA);
        mix(self.state)
    }

    /// Independent child stream; the parent advances by one step.
    pub fn split(&mut self) -> Self {
        Self::new(mix(self.next_u64() ^ 0x5851_f42d_4c95_7f2d))
    }

    /// Uniform in `[0, 1)`.
    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn uniform(&mut self, low: f64, high: f64) -> f64 {
        low + (high - low) * self.next_f64()
    }

    /// Uniform integer in `low..=high`.
    pub fn range_inclusive(&mut self, low: usize, high: usize) -> usize {
        debug_assert!(low <= high);
        low + (self.next_u64() % (high - low + 1) as u64) as usize
    }

    /// Standard normal sample (cosine branch of Box–Muller).
    pub fn standard_normal(&mut self) -> f64 {
        let u1 = to_unit_open_closed(self.next_u64());
        let u2 = self.next_f64();
        box_muller(u1, u2)
    }
}

#[inline]
fn box_muller(u1: f64, u2: f64) -> f64 {
    (-2.0 * u1.ln()).sqrt() * (TAU * u2).cos()
}

/// Standard normal sample number `index` of the stream keyed by `seed`.
///
/// Consumes stream positions `2·index` and `2·index + 1`.
#[inline]
pub fn normal_at(seed: u64, index: u64) -> f64 {
    let u1 = to_unit_open_closed(SplitMix64::at(seed, 2 * index));
    let u2 = (SplitMix64::at(seed, 2 * index + 1) >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
    box_muller(u1, u2)
}
