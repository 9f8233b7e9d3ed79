//! Deterministic random streams.
//!
//! Coupling `W[i][j]` (i < j) is a function of `(seed, i, j)` only: row `i`
//! is ChaCha8 stream `i`, and entry `j` occupies words `4j..4j+4` of that
//! stream (two `u64` fed to Box–Muller). Instances therefore do not depend on
//! generation order or thread layout.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

const GOLDEN_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN_GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of substream `index` of `master` (replica, sample, ...).
pub fn derive_seed(master: u64, index: u64) -> u64 {
    splitmix64(splitmix64(master) ^ index.wrapping_mul(GOLDEN_GAMMA).rotate_left(17))
}

/// Box–Muller on two raw words; uses the cosine branch only.
fn normal_from_bits(a: u64, b: u64) -> f64 {
    // u1 in (0, 1], u2 in [0, 1)
    let u1 = ((a >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64);
    let u2 = (b >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

const WORDS_PER_ENTRY: u128 = 4;

pub(crate) struct CouplingStream {
    rng: ChaCha8Rng,
}

impl CouplingStream {
    pub(crate) fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Fill `out[k]` with `W[i][first + k]`.
    pub(crate) fn fill_row(&mut self, i: usize, first: usize, out: &mut [f64]) {
        self.rng.set_stream(i as u64);
        self.rng.set_word_pos(WORDS_PER_ENTRY * first as u128);
        for w in out.iter_mut() {
            let a = self.rng.next_u64();
            let b = self.rng.next_u64();
            *w = normal_from_bits(a, b);
        }
    }
}

/// General-purpose seeded generator for starts and tie-breaking.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
