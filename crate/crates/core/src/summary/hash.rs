use std::fmt;
use std::hash::Hasher;

use serde::{Deserialize, Serialize};
use siphasher::sip::SipHasher24;

/// Fixed SipHash-2-4 key: the bytes 0x00..=0x0f, little-endian into two words.
///
/// This is the key of the SipHash reference test vectors, so the primitive can
/// be checked against them directly.
pub const SIPHASH_KEY: [u8; 16] = [
    0x00, 0x01, 0x02, 0x03, 0x04, 0x05, 0x06, 0x07, 0x08, 0x09, 0x0a, 0x0b, 0x0c, 0x0d, 0x0e, 0x0f,
];

/// Identifier of an equivalence class. `EqcHash(0)` is the class of vertices
/// without considered outgoing edges.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EqcHash(pub u64);

impl EqcHash {
    pub const EMPTY: EqcHash = EqcHash(0);

    pub fn to_hex(self) -> String {
        format!("{:016x}", self.0)
    }

    pub fn from_hex(s: &str) -> Option<EqcHash> {
        if s.len() != 16 {
            return None;
        }
        u64::from_str_radix(s, 16).ok().map(EqcHash)
    }
}

impl fmt::Display for EqcHash {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:016x}", self.0)
    }
}

fn keyed() -> SipHasher24 {
    SipHasher24::new_with_key(&SIPHASH_KEY)
}

/// SipHash-2-4 of `predicate ‖ 0x00 ‖ child.to_le_bytes()`.
pub fn hash_pair(predicate: &str, child: EqcHash) -> u64 {
    PredicateHasher::new(predicate).hash(child)
}

/// SipHash state primed with one predicate and the separator byte, so that
/// hashing a (predicate, child) pair only processes the eight child bytes.
#[derive(Clone, Debug)]
pub struct PredicateHasher {
    state: SipHasher24,
}

impl PredicateHasher {
    pub fn new(predicate: &str) -> Self {
        let mut state = keyed();
        state.write(predicate.as_bytes());
        state.write(&[0x00]);
        Self { state }
    }

    #[inline]
    pub fn hash(&self, child: EqcHash) -> u64 {
        let mut s = self.state;
        s.write(&child.0.to_le_bytes());
        s.finish()
    }
}
