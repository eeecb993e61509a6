//! Deterministic randomness.
//!
//! Every operation takes a `u64` seed and builds its own ChaCha20 generator
//! with `ChaCha20Rng::seed_from_u64(seed)`. Operations that need independent
//! streams under one seed select a ChaCha stream id (see [`Stream`]), and
//! loops that fan out derive child seeds with [`derive_seed`] (SplitMix64).
//! Both are fixed so that runs can be cross-checked between implementations.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

pub type PrcRng = ChaCha20Rng;

/// Stream ids used by the library. Values are part of the reproducibility contract.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    Keygen = 1,
    Encode = 2,
    Channel = 3,
    Mitm = 4,
    Isd = 5,
    Overlay = 6,
    PkFree = 7,
    Simulate = 8,
    Batch = 9,
}

pub fn rng_from_seed(seed: u64) -> PrcRng {
    ChaCha20Rng::seed_from_u64(seed)
}

pub fn rng_for(seed: u64, stream: Stream) -> PrcRng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream as u64);
    rng
}

/// SplitMix64 finalizer applied to `seed + (index+1)·γ`.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
