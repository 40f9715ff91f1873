//! Counter-based substream seeding.
//!
//! Parallel Monte Carlo and per-UE randomness use one master seed plus an
//! index; the pair is mixed into an independent ChaCha stream. Trials can then
//! run in any order, on any number of threads, and still produce bitwise
//! identical results.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// SplitMix64 finalizer; decorrelates consecutive counters.
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Independent RNG for stream `index` under `master_seed`.
pub fn substream(master_seed: u64, index: u64) -> ChaCha8Rng {
    let mut seed = [0u8; 32];
    let mut state = splitmix64(master_seed ^ 0x517c_c1b7_2722_0a95);
    state = splitmix64(state ^ index);
    for chunk in seed.chunks_exact_mut(8) {
        state = splitmix64(state);
        chunk.copy_from_slice(&state.to_le_bytes());
    }
    ChaCha8Rng::from_seed(seed)
}

/// Two-level substream (e.g. per round and per UE within the round).
pub fn substream2(master_seed: u64, a: u64, b: u64) -> ChaCha8Rng {
    substream(splitmix64(master_seed ^ splitmix64(a)), b)
}
