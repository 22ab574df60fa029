//! Keyed polynomial hash over GF(2^64) used to confirm that a decoded
//! block equals Alice's.
//!
//! The tag of a block of `L` words `w_1..w_L` is
//! `((w_1 k + w_2) k + ... + w_L) k + L` evaluated in GF(2^64) with the
//! reduction polynomial `x^64 + x^4 + x^3 + x + 1`. Two distinct blocks of
//! the same length collide for at most `L + 1` of the `2^64` keys.

use crate::bits::BitBlock;
use crate::channel::stream_id;

/// Multiplication in GF(2^64).
pub fn gf64_mul(a: u64, b: u64) -> u64 {
    let (mut lo, mut hi) = (0u64, 0u64);
    for i in 0..64 {
        if (b >> i) & 1 == 1 {
            lo ^= a << i;
            if i > 0 {
                hi ^= a >> (64 - i);
            }
        }
    }
    // Fold the high half twice; x^64 = x^4 + x^3 + x + 1.
    for _ in 0..2 {
        let h = hi;
        hi = 0;
        lo ^= h ^ (h << 1) ^ (h << 3) ^ (h << 4);
        hi ^= (h >> 63) ^ (h >> 61) ^ (h >> 60);
    }
    debug_assert_eq!(hi, 0);
    lo
}

/// Hash key for a block of a session.
pub fn tag_key(session_id: u64, block_index: u32) -> u64 {
    // The zero key maps every block to its length.
    stream_id(&[0x7461_6700, session_id, block_index as u64]) | 1
}

/// Full 64-bit tag of `block` under `key`.
pub fn block_tag(block: &BitBlock, key: u64) -> u64 {
    let words = block.words();
    let acc = words.iter().fold(0u64, |acc, &w| gf64_mul(acc, key) ^ w);
    gf64_mul(acc, key) ^ block.len() as u64
}

/// The low `bits` bits of the tag, as `ceil(bits / 8)` little-endian bytes.
pub fn truncated_tag(block: &BitBlock, key: u64, bits: u32) -> Vec<u8> {
    if bits == 0 {
        return Vec::new();
    }
    let tag = block_tag(block, key);
    let masked = if bits >= 64 { tag } else { tag & ((1u64 << bits) - 1) };
    masked.to_le_bytes()[..(bits as usize).div_ceil(8)].to_vec()
}
