//! State signatures for hash compaction.
//!
//! The signature function is SplitMix64 finalization over the packed
//! descriptor XORed with a fixed seed. It is documented, deterministic and
//! never randomized per run, so search results are reproducible. Because the
//! finalizer is a bijection on 64-bit words, two distinct descriptors always
//! produce distinct 64-bit signatures; collisions only become possible once
//! signatures are combined with the time index or truncated.

use crate::pack::PackedState;
use serde::{Deserialize, Serialize};

/// Fixed signature seed (the SplitMix64 increment constant).
pub const SIGNATURE_SEED: u64 = 0x9E37_79B9_7F4A_7C15;

const TICK_SALT: u64 = 0xD1B5_4A32_D192_ED03;

/// 64-bit signature of a packed state.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
pub struct StateSignature(pub u64);

#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Deterministic 64-bit digest of a packed state.
pub fn signature(p: PackedState) -> StateSignature {
    StateSignature(mix64(p.0 ^ SIGNATURE_SEED))
}

/// Digest of a search node, i.e. a (state, elapsed-ticks) pair.
pub fn node_signature(p: PackedState, tick: u32) -> u64 {
    mix64(signature(p).0 ^ (tick as u64).wrapping_mul(TICK_SALT))
}

/// Width of the signatures kept in a compacted visited set.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub enum SignatureMode {
    /// Full 64-bit signatures (the default compaction mode).
    Full64,
    /// Signatures truncated to 16 bits. Collision rates become large enough
    /// to observe false pruning; kept for negative tests only.
    Truncated16,
}

impl SignatureMode {
    pub fn node_key(self, p: PackedState, tick: u32) -> u64 {
        let sig = node_signature(p, tick);
        match self {
            SignatureMode::Full64 => sig,
            SignatureMode::Truncated16 => sig & 0xFFFF,
        }
    }

    /// Bytes of signature payload stored per visited entry.
    pub fn entry_bytes(self) -> u64 {
        match self {
            SignatureMode::Full64 => 8,
            SignatureMode::Truncated16 => 2,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn signatures_are_deterministic() {
        let p = PackedState(0xDEAD_BEEF);
        assert_eq!(signature(p), signature(p));
        assert_eq!(node_signature(p, 7), node_signature(p, 7));
        assert_ne!(node_signature(p, 7), node_signature(p, 8));
    }

    #[test]
    fn finalizer_is_injective_on_small_range() {
        let mut seen = std::collections::HashSet::new();
        for x in 0..10_000u64 {
            assert!(seen.insert(signature(PackedState(x)).0));
        }
    }
}
