//! Child-seed derivation.
//!
//! `derive_seed(master, id)` is the first eight bytes (little endian) of
//! `SHA-256(master.to_le_bytes() || id)`. It is a pure function, so results
//! do not depend on the order in which cells or streams are created.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

pub fn derive_seed(master: u64, id: &str) -> u64 {
    let mut h = Sha256::new();
    h.update(master.to_le_bytes());
    h.update(id.as_bytes());
    let digest = h.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("8 bytes"))
}

/// Generator for the named stream of a run.
pub fn stream(master: u64, id: &str) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(master, id))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derivation_is_stable() {
        assert_eq!(derive_seed(1, "a"), derive_seed(1, "a"));
        assert_ne!(derive_seed(1, "a"), derive_seed(1, "b"));
        assert_ne!(derive_seed(1, "a"), derive_seed(2, "a"));
    }
}
