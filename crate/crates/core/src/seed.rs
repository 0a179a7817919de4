//! Counter-based seed derivation.
//!
//! Every random quantity in the crate is drawn from a ChaCha8 stream keyed by
//! a 64-bit seed and a stream tag, so sub-streams are independent and a run is
//! a pure function of its master seed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream tags for the independent parts of a problem instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    Matrix = 1,
    Signal = 2,
    Noise = 3,
    RowSelection = 4,
    PowerIteration = 5,
}

/// RNG for `stream` under `seed`.
pub fn rng(seed: u64, stream: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream as u64);
    rng
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mixes a base seed with a sequence of indices into a child seed.
///
/// Used for experiment cells: `derive(base, &[delta_idx, rho_idx, rep])`.
pub fn derive(base: u64, indices: &[u64]) -> u64 {
    indices
        .iter()
        .fold(splitmix64(base), |acc, &i| splitmix64(acc ^ splitmix64(i)))
}
