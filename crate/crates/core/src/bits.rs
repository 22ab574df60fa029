//! Packed bit vectors used for keys, syndromes and error patterns.

use std::fmt;

use crate::error::{Error, Result};

const WORD_BITS: usize = 64;

/// A fixed-length packed bit vector.
///
/// Bit `i` lives in word `i / 64` at position `i % 64`. Padding bits past
/// `len` in the final word are always zero, so word-wise equality and
/// popcount are exact.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitBlock {
    words: Vec<u64>,
    len: usize,
}

impl BitBlock {
    /// All-zero block of `len` bits. Panics if `len == 0`.
    pub fn zeros(len: usize) -> Self {
        assert!(len > 0, "BitBlock length must be positive");
        BitBlock {
            words: vec![0; len.div_ceil(WORD_BITS)],
            len,
        }
    }

    pub fn from_bools<I: IntoIterator<Item = bool>>(bits: I) -> Result<Self> {
        let mut words = Vec::new();
        let mut len = 0;
        for b in bits {
            if len % WORD_BITS == 0 {
                words.push(0);
            }
            if b {
                words[len / WORD_BITS] |= 1 << (len % WORD_BITS);
            }
            len += 1;
        }
        if len == 0 {
            return Err(Error::Contract("empty bit block".into()));
        }
        Ok(BitBlock { words, len })
    }

    /// Builds a block from raw words, clearing padding bits.
    pub fn from_words(mut words: Vec<u64>, len: usize) -> Result<Self> {
        if len == 0 || words.len() != len.div_ceil(WORD_BITS) {
            return Err(Error::Contract(format!(
                "{} words cannot hold a {len}-bit block",
                words.len()
            )));
        }
        let tail = len % WORD_BITS;
        if tail != 0 {
            *words.last_mut().unwrap() &= (1u64 << tail) - 1;
        }
        Ok(BitBlock { words, len })
    }

    /// Unpacks `len` bits stored little-endian within each byte
    /// (bit `i` is bit `i % 8` of byte `i / 8`).
    pub fn from_bytes_le(bytes: &[u8], len: usize) -> Result<Self> {
        if len == 0 || bytes.len() != len.div_ceil(8) {
            return Err(Error::Contract(format!(
                "{} bytes cannot hold a {len}-bit block",
                bytes.len()
            )));
        }
        let mut words = vec![0u64; len.div_ceil(WORD_BITS)];
        for (i, &b) in bytes.iter().enumerate() {
            words[i / 8] |= (b as u64) << (8 * (i % 8));
        }
        Self::from_words(words, len)
    }

    /// Packs into `ceil(len / 8)` bytes, little-endian bit order.
    pub fn to_bytes_le(&self) -> Vec<u8> {
        let nbytes = self.len.div_ceil(8);
        let mut out = Vec::with_capacity(nbytes);
        for i in 0..nbytes {
            out.push((self.words[i / 8] >> (8 * (i % 8))) as u8);
        }
        out
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    /// Always false; blocks have at least one bit.
    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn words(&self) -> &[u64] {
        &self.words
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        (self.words[i / WORD_BITS] >> (i % WORD_BITS)) & 1 == 1
    }

    /// Bit `i` as 0 or 1.
    #[inline]
    pub fn bit(&self, i: usize) -> u8 {
        ((self.words[i / WORD_BITS] >> (i % WORD_BITS)) & 1) as u8
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.len, "bit index {i} out of range for {} bits", self.len);
        let mask = 1u64 << (i % WORD_BITS);
        if value {
            self.words[i / WORD_BITS] |= mask;
        } else {
            self.words[i / WORD_BITS] &= !mask;
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        assert!(i < self.len, "bit index {i} out of range for {} bits", self.len);
        self.words[i / WORD_BITS] ^= 1u64 << (i % WORD_BITS);
    }

    /// Hamming weight.
    pub fn weight(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn xor(&self, other: &BitBlock) -> Result<BitBlock> {
        if self.len != other.len {
            return Err(Error::Contract(format!(
                "xor of blocks with lengths {} and {}",
                self.len, other.len
            )));
        }
        let words = self
            .words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| a ^ b)
            .collect();
        Ok(BitBlock {
            words,
            len: self.len,
        })
    }

    /// Number of positions where the blocks differ. Panics on length mismatch.
    pub fn hamming_distance(&self, other: &BitBlock) -> usize {
        assert_eq!(self.len, other.len, "hamming distance of unequal lengths");
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a ^ b).count_ones() as usize)
            .sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    /// Copies bits `[start, start + len)` into a new block.
    pub fn slice(&self, start: usize, len: usize) -> Result<BitBlock> {
        if len == 0 || start + len > self.len {
            return Err(Error::Contract(format!(
                "slice [{start}, {}) out of range for {} bits",
                start + len,
                self.len
            )));
        }
        let mut out = BitBlock::zeros(len);
        if start.is_multiple_of(WORD_BITS) {
            let w0 = start / WORD_BITS;
            out.words
                .copy_from_slice(&self.words[w0..w0 + len.div_ceil(WORD_BITS)]);
            let tail = len % WORD_BITS;
            if tail != 0 {
                *out.words.last_mut().unwrap() &= (1u64 << tail) - 1;
            }
        } else {
            for i in 0..len {
                if self.get(start + i) {
                    out.set(i, true);
                }
            }
        }
        Ok(out)
    }

    /// Concatenates blocks in order.
    pub fn concat<'a, I: IntoIterator<Item = &'a BitBlock>>(blocks: I) -> Result<BitBlock> {
        let blocks: Vec<&BitBlock> = blocks.into_iter().collect();
        let total: usize = blocks.iter().map(|b| b.len).sum();
        if total == 0 {
            return Err(Error::Contract("concatenation of no blocks".into()));
        }
        let mut out = BitBlock::zeros(total);
        let mut pos = 0;
        for b in blocks {
            if pos % WORD_BITS == 0 {
                let w0 = pos / WORD_BITS;
                out.words[w0..w0 + b.words.len()].copy_from_slice(&b.words);
            } else {
                for i in 0..b.len {
                    if b.get(i) {
                        out.set(pos + i, true);
                    }
                }
            }
            pos += b.len;
        }
        Ok(out)
    }
}

impl fmt::Debug for BitBlock {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        const SHOWN: usize = 64;
        write!(f, "BitBlock({} bits: ", self.len)?;
        for b in self.iter().take(SHOWN) {
            f.write_str(if b { "1" } else { "0" })?;
        }
        if self.len > SHOWN {
            f.write_str("...")?;
        }
        f.write_str(")")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn padding_is_cleared() {
        let b = BitBlock::from_words(vec![u64::MAX], 10).unwrap();
        assert_eq!(b.weight(), 10);
        assert_eq!(b.to_bytes_le(), vec![0xff, 0x03]);
    }

    #[test]
    fn byte_order_is_little_endian() {
        let mut b = BitBlock::zeros(12);
        b.set(0, true);
        b.set(9, true);
        assert_eq!(b.to_bytes_le(), vec![0x01, 0x02]);
        assert_eq!(BitBlock::from_bytes_le(&[0x01, 0x02], 12).unwrap(), b);
    }

    #[test]
    fn empty_and_mismatched_inputs_fail() {
        assert!(BitBlock::from_bools(std::iter::empty()).is_err());
        assert!(BitBlock::from_bytes_le(&[0, 0], 20).is_err());
        assert!(BitBlock::zeros(3).xor(&BitBlock::zeros(4)).is_err());
        assert!(BitBlock::zeros(8).slice(4, 5).is_err());
    }

    proptest! {
        #[test]
        fn bytes_roundtrip(bits in proptest::collection::vec(any::<bool>(), 1..300)) {
            let b = BitBlock::from_bools(bits.iter().copied()).unwrap();
            let back = BitBlock::from_bytes_le(&b.to_bytes_le(), b.len()).unwrap();
            prop_assert_eq!(&back, &b);
            prop_assert_eq!(back.iter().collect::<Vec<_>>(), bits);
        }

        #[test]
        fn slice_concat_roundtrip(bits in proptest::collection::vec(any::<bool>(), 2..400), cut in 1usize..399) {
            let b = BitBlock::from_bools(bits.iter().copied()).unwrap();
            let cut = cut.min(b.len() - 1);
            let left = b.slice(0, cut).unwrap();
            let right = b.slice(cut, b.len() - cut).unwrap();
            prop_assert_eq!(BitBlock::concat([&left, &right]).unwrap(), b);
        }
    }
}
