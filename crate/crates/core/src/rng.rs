//! Counter-based seeding.
//!
//! Nothing here keeps state: a [`Stream`] is a 64-bit key, and every random
//! quantity is a pure function of that key and a second key (an edge, a
//! child stream tag, ...). Edge coins therefore come out the same no matter
//! which endpoint examines the edge first, and per-sample results are
//! independent of execution order.

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

/// SplitMix64 finalizer. A bijection on `u64`.
#[inline]
pub const fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Per-sample seed. Injective in `index` for a fixed `master_seed`.
#[inline]
pub fn sample_seed(master_seed: u64, index: u64) -> u64 {
    mix64(mix64(master_seed ^ GOLDEN).wrapping_add(index.wrapping_mul(GOLDEN)))
}

/// Maps the top 53 bits to `[0, 1)`.
#[inline]
pub fn unit_f64(bits: u64) -> f64 {
    (bits >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Maps the top 52 bits to the open interval `(0, 1)`.
#[inline]
pub fn open_unit_f64(bits: u64) -> f64 {
    ((bits >> 12) as f64 + 0.5) * (1.0 / (1u64 << 52) as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Stream(u64);

impl Stream {
    pub fn new(seed: u64) -> Self {
        Stream(seed)
    }

    pub fn for_sample(master_seed: u64, index: u64) -> Self {
        Stream(sample_seed(master_seed, index))
    }

    pub fn seed(self) -> u64 {
        self.0
    }

    /// Independent child stream labelled by `tag`.
    #[inline]
    pub fn fork(self, tag: u64) -> Self {
        Stream(mix64(self.0 ^ mix64(tag.wrapping_add(GOLDEN))).rotate_left(17) ^ GOLDEN)
    }

    #[inline]
    pub fn bits(self, key: u64) -> u64 {
        mix64(self.0 ^ mix64(key))
    }

    /// Uniform in `[0, 1)` attached to `key`.
    #[inline]
    pub fn uniform(self, key: u64) -> f64 {
        unit_f64(self.bits(key))
    }
}
