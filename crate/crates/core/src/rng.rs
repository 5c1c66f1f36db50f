//! Deterministic stream splitting.
//!
//! Every random stream in the library is a ChaCha12 generator seeded by a
//! stable 64-bit hash of `(master seed, stream label)`. Labels are plain
//! strings like `"walk/joint/r1234"`, so independent experiments, replicas and
//! operator rows get independent streams while the whole run stays
//! reproducible from a single seed — and results do not depend on how work is
//! scheduled across threads.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

/// Derive a child seed from a master seed and a stream label (FNV-1a over the
/// little-endian seed bytes followed by the label bytes).
pub fn split(seed: u64, label: &str) -> u64 {
    let mut h = FNV_OFFSET;
    for b in seed.to_le_bytes() {
        h = (h ^ u64::from(b)).wrapping_mul(FNV_PRIME);
    }
    for &b in label.as_bytes() {
        h = (h ^ u64::from(b)).wrapping_mul(FNV_PRIME);
    }
    h
}

/// Derive a child seed for an indexed substream, e.g. one replica of a
/// Monte Carlo batch. Equivalent to hashing the label and then the index.
pub fn split_indexed(seed: u64, label: &str, index: u64) -> u64 {
    let mut h = split(seed, label);
    for b in index.to_le_bytes() {
        h = (h ^ u64::from(b)).wrapping_mul(FNV_PRIME);
    }
    h
}

/// A generator for the stream identified by `label`.
pub fn stream(seed: u64, label: &str) -> ChaCha12Rng {
    ChaCha12Rng::seed_from_u64(split(seed, label))
}

/// A generator for the `index`-th substream of `label`.
pub fn stream_indexed(seed: u64, label: &str, index: u64) -> ChaCha12Rng {
    ChaCha12Rng::seed_from_u64(split_indexed(seed, label, index))
}

/// Map raw generator output to the open interval (0, 1).
///
/// The top 52 bits form a dyadic rational in [0, 1); the half-step offset
/// excludes both endpoints (and stays exactly representable), so
/// inverse-transform sampling never sees a degenerate uniform.
pub fn unit_open(bits: u64) -> f64 {
    ((bits >> 12) as f64 + 0.5) * (1.0 / 4_503_599_627_370_496.0)
}

/// Draw a uniform variate in the open interval (0, 1).
pub fn draw_open<R: rand::RngCore + ?Sized>(rng: &mut R) -> f64 {
    unit_open(rng.next_u64())
}
