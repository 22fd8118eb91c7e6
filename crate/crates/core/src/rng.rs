//! Seed derivation for reproducible sub-streams.
//!
//! Every stochastic step (fold shuffles, swap index selection, alternate value
//! draws) gets its own generator seeded from the master seed plus the
//! coordinates of the task, so results do not depend on execution order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Generator used throughout the crate. ChaCha output is stable across
/// platforms and crate releases, unlike `StdRng`.
pub type AuditRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> AuditRng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mixes a master seed with a list of task coordinates into a child seed.
pub fn derive_seed(master: u64, parts: &[u64]) -> u64 {
    parts
        .iter()
        .fold(splitmix64(master), |acc, &p| splitmix64(acc ^ splitmix64(p)))
}

/// Stream tags keep seeds of different pipeline stages apart.
pub(crate) mod tag {
    pub const FOLDS: u64 = 1;
    pub const CDI: u64 = 2;
    pub const PAIR: u64 = 3;
}

/// Sentinel used in seed coordinates where no mediator applies.
pub(crate) const NO_MEDIATOR: u64 = u64::MAX;
