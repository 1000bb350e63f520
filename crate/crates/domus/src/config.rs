//! Versioning, content hashing, and seed derivation.
//!
//! Every output file carries `format_version` plus the hashes of the run
//! configuration and the corpus it was computed from, so identical inputs
//! reproduce byte-identical outputs. All randomness flows from a single
//! root seed through [`derive_seed`]/[`derive_rng`], which makes parallel
//! and serial execution agree: each job's generator depends only on the
//! root seed and the job's label, never on scheduling order.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha20Rng;
use sha2::{Digest, Sha256};

/// Version tag written into every serialized artifact.
pub const FORMAT_VERSION: u32 = 1;

/// Name of the generator recorded in state files. ChaCha20 is specified by
/// RFC 8439 and produces the same stream on every platform.
pub const RNG_ALGORITHM: &str = "chacha20";

const SEED_DOMAIN: &[u8] = b"domus/1";

/// Hex-encoded SHA-256 of a byte string.
pub fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    let mut out = String::with_capacity(64);
    for b in digest {
        out.push_str(&format!("{b:02x}"));
    }
    out
}

fn seed_bytes(root: u64, label: &str) -> [u8; 32] {
    let mut hasher = Sha256::new();
    hasher.update(SEED_DOMAIN);
    hasher.update(root.to_le_bytes());
    hasher.update(label.as_bytes());
    hasher.finalize().into()
}

/// Derive a 64-bit sub-seed from the root seed and a job label.
pub fn derive_seed(root: u64, label: &str) -> u64 {
    let bytes = seed_bytes(root, label);
    u64::from_le_bytes(bytes[..8].try_into().unwrap())
}

/// Derive a full 256-bit-seeded generator for a labelled job.
pub fn derive_rng(root: u64, label: &str) -> ChaCha20Rng {
    ChaCha20Rng::from_seed(seed_bytes(root, label))
}

/// Generator seeded directly from a 64-bit value (chain seeds, CLI seeds).
pub fn rng_from_seed(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn derived_seeds_are_stable_and_label_sensitive() {
        let a = derive_seed(7, "chain/fold=0/k=10/s=0");
        let b = derive_seed(7, "chain/fold=0/k=10/s=0");
        let c = derive_seed(7, "chain/fold=0/k=10/s=1");
        let d = derive_seed(8, "chain/fold=0/k=10/s=0");
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_ne!(a, d);
    }

    #[test]
    fn derived_rng_streams_are_reproducible() {
        let mut r1 = derive_rng(42, "x");
        let mut r2 = derive_rng(42, "x");
        let v1: Vec<u64> = (0..4).map(|_| r1.random()).collect();
        let v2: Vec<u64> = (0..4).map(|_| r2.random()).collect();
        assert_eq!(v1, v2);
    }

    #[test]
    fn sha256_hex_known_value() {
        // sha256("") is a fixed constant.
        assert_eq!(
            sha256_hex(b""),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
    }
}
