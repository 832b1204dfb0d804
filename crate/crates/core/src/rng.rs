//! Deterministic random streams derived from one root seed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// What a derived stream is used for. Streams with different purposes or
/// indices never overlap.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Purpose {
    RffWeights = 1,
    TrpProjection = 2,
    StochasticGreedy = 3,
    Dpp = 4,
    RandomSubset = 5,
}

/// Independent generator for `(root, index, purpose)`.
pub fn substream(root: u64, index: u64, purpose: Purpose) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(root);
    rng.set_stream(((purpose as u64) << 48) ^ index);
    rng
}
