//! Counter-based random substreams.
//!
//! Every Monte Carlo draw in this crate is keyed by `(seed, purpose, index)`:
//! the generator for one sample is derived purely from those three values, so
//! results are identical no matter how work is split across threads. The
//! `purpose` tag separates independent uses of randomness (data sampling vs.
//! adversary coin flips), which lets an attack be replayed against different
//! classifiers on identical data.
//!
//! The core primitive is the SplitMix64 finalizer, a bijective 64-bit mixer:
//! a stream is just the mixer applied to an incrementing counter offset by a
//! hashed key.

/// Purpose tag for data (sample) generation.
pub const PURPOSE_DATA: u64 = 0x1;
/// Purpose tag for adversary randomness.
pub const PURPOSE_ADVERSARY: u64 = 0x2;
/// Purpose tag for auxiliary test/validation draws.
pub const PURPOSE_AUX: u64 = 0x3;

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

#[inline]
fn mix(z: u64) -> u64 {
    let z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    let z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// A deterministic substream of 64-bit words derived from `(seed, purpose, index)`.
#[derive(Clone, Debug)]
pub struct Stream {
    state: u64,
}

impl Stream {
    /// Open the substream for a given seed, purpose tag, and sample index.
    pub fn substream(seed: u64, purpose: u64, index: u64) -> Self {
        let k = mix(seed ^ GOLDEN);
        let k = mix(k ^ purpose.wrapping_mul(0xd605_bbb5_8c8a_bc2d));
        let k = mix(k ^ index.wrapping_mul(0xa24b_aed4_963e_e407));
        Stream { state: k }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN);
        mix(self.state)
    }

    /// Uniform draw in `[0, 1)` with 53 random bits.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform draw in the open interval `(0, 1)`, safe to feed to a quantile
    /// function.
    #[inline]
    pub fn uniform_open(&mut self) -> f64 {
        ((self.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform draw in `[lo, hi)`.
    #[inline]
    pub fn uniform_in(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    /// Standard normal draw via the inverse-CDF method.
    #[inline]
    pub fn standard_normal(&mut self) -> f64 {
        crate::special::inv_phi(self.uniform_open())
    }

    /// A fair sign: `+1` or `-1`.
    #[inline]
    pub fn sign(&mut self) -> i8 {
        if self.next_u64() & 1 == 0 {
            1
        } else {
            -1
        }
    }
}
