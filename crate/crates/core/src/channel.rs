//! Binary symmetric channel simulation, key handling and the
//! information-theoretic bookkeeping around it.
//!
//! Randomness comes from ChaCha8 streams: a `(seed, stream)` pair always
//! yields the same bits no matter which thread draws them, which keeps
//! simulations reproducible across thread counts.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bits::BitBlock;
use crate::error::{Error, Result};

/// Sifted key length of a full reconciliation run.
pub const DEFAULT_KEY_BITS: usize = 1 << 20;
/// Block length each sifted key is split into.
pub const DEFAULT_BLOCK_BITS: usize = 1 << 16;

/// Shannon binary entropy in bits, with `0 log 0 = 0`.
pub fn binary_entropy(e: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&e) {
        return Err(Error::Domain(format!("probability {e} outside [0, 1]")));
    }
    if e == 0.0 || e == 1.0 {
        return Ok(0.0);
    }
    // ln_1p keeps log(1 - e) accurate for small e.
    let nats = -e * e.ln() - (1.0 - e) * (-e).ln_1p();
    Ok(nats / std::f64::consts::LN_2)
}

/// Reconciliation efficiency `f = m / (n h(e))`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Efficiency(pub f64);

impl Efficiency {
    pub fn value(self) -> f64 {
        self.0
    }

    /// `f <= 1` discloses less than the Shannon limit requires, so no
    /// decoder can succeed reliably there.
    pub fn is_sub_shannon(self) -> bool {
        self.0 <= 1.0
    }
}

pub fn efficiency(m: usize, n: usize, e: f64) -> Result<Efficiency> {
    if n == 0 || m >= n {
        return Err(Error::Domain(format!("efficiency needs m < n, got m = {m}, n = {n}")));
    }
    efficiency_of_bits(m as f64, n, e)
}

/// Efficiency for an arbitrary number of disclosed bits per `n`-bit block.
pub fn efficiency_of_bits(disclosed: f64, n: usize, e: f64) -> Result<Efficiency> {
    if !(e > 0.0 && e < 0.5) {
        return Err(Error::Domain(format!("crossover probability {e} outside (0, 0.5)")));
    }
    let h = binary_entropy(e)?;
    if h == 0.0 {
        return Err(Error::Domain(format!("h({e}) = 0")));
    }
    Ok(Efficiency(disclosed / (n as f64 * h)))
}

/// The crossover probability in `(0, 0.5)` at which disclosing `m/n` bits
/// per key bit gives efficiency `f`. Found by bisection on the increasing
/// branch of `h`.
pub fn crossover_for_efficiency(disclosure_ratio: f64, f: f64) -> Result<f64> {
    let target = disclosure_ratio / f;
    if !(target > 0.0 && target < 1.0) {
        return Err(Error::Domain(format!(
            "no e in (0, 0.5) has h(e) = {target}"
        )));
    }
    let (mut lo, mut hi) = (0.0f64, 0.5f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if binary_entropy(mid)? < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= f64::EPSILON * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Independent ChaCha8 stream `stream` of generator `seed`.
pub fn substream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Mixes a tuple of identifiers into one 64-bit stream id (splitmix64).
pub fn stream_id(parts: &[u64]) -> u64 {
    let mut h = 0x9E37_79B9_7F4A_7C15u64;
    for &p in parts {
        h ^= p;
        h = h.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = h;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        h = z ^ (z >> 31);
    }
    h
}

/// Uniformly random key of `length` bits, determined by `seed`.
pub fn generate_key(length: usize, seed: u64) -> Result<BitBlock> {
    generate_key_with(length, &mut substream(seed, 0))
}

pub fn generate_key_with<R: RngCore>(length: usize, rng: &mut R) -> Result<BitBlock> {
    if length == 0 {
        return Err(Error::Contract("key length must be positive".into()));
    }
    let words = (0..length.div_ceil(64)).map(|_| rng.next_u64()).collect();
    BitBlock::from_words(words, length)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelModel {
    e: f64,
    seed: u64,
}

impl ChannelModel {
    pub fn new(e: f64, seed: u64) -> Result<Self> {
        if !(e > 0.0 && e < 0.5) {
            return Err(Error::Domain(format!("crossover probability {e} outside (0, 0.5)")));
        }
        Ok(ChannelModel { e, seed })
    }

    pub fn e(&self) -> f64 {
        self.e
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

/// Flips each bit of `key` independently with probability `e`.
/// Returns `(noisy, error_pattern)` with `noisy = key ^ error_pattern`.
pub fn bsc_corrupt(key: &BitBlock, channel: &ChannelModel) -> (BitBlock, BitBlock) {
    bsc_corrupt_with(key, channel.e, &mut substream(channel.seed, 1))
}

pub fn bsc_corrupt_with<R: Rng>(key: &BitBlock, e: f64, rng: &mut R) -> (BitBlock, BitBlock) {
    let mut pattern = BitBlock::zeros(key.len());
    for i in 0..key.len() {
        if rng.gen::<f64>() < e {
            pattern.set(i, true);
        }
    }
    let noisy = key.xor(&pattern).expect("pattern has the key's length");
    (noisy, pattern)
}

/// A sifted key cut into `k` equal blocks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrameSet {
    blocks: Vec<BitBlock>,
}

impl FrameSet {
    pub fn new(blocks: Vec<BitBlock>) -> Result<Self> {
        let n = blocks
            .first()
            .ok_or_else(|| Error::Contract("a frame set needs at least one block".into()))?
            .len();
        if blocks.iter().any(|b| b.len() != n) {
            return Err(Error::Contract("frame blocks differ in length".into()));
        }
        Ok(FrameSet { blocks })
    }

    pub fn blocks(&self) -> &[BitBlock] {
        &self.blocks
    }

    pub fn into_blocks(self) -> Vec<BitBlock> {
        self.blocks
    }

    /// Number of blocks.
    pub fn k(&self) -> usize {
        self.blocks.len()
    }

    pub fn block_len(&self) -> usize {
        self.blocks[0].len()
    }

    pub fn total_length(&self) -> usize {
        self.k() * self.block_len()
    }
}

pub fn split_key(key: &BitBlock, n: usize) -> Result<FrameSet> {
    if n == 0 || !key.len().is_multiple_of(n) {
        return Err(Error::Contract(format!(
            "key of {} bits does not split into blocks of {n}",
            key.len()
        )));
    }
    let blocks = (0..key.len() / n)
        .map(|b| key.slice(b * n, n))
        .collect::<Result<Vec<_>>>()?;
    FrameSet::new(blocks)
}

pub fn join_frames(frames: &FrameSet) -> Result<BitBlock> {
    BitBlock::concat(frames.blocks())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::RngCore;

    #[test]
    fn entropy_reference_points() {
        assert_eq!(binary_entropy(0.5).unwrap(), 1.0);
        assert_eq!(binary_entropy(0.0).unwrap(), 0.0);
        assert_eq!(binary_entropy(1.0).unwrap(), 0.0);
        // 50-digit value: 0.46899559358928122...
        assert!((binary_entropy(0.1).unwrap() - 0.468_995_593_589_281_2).abs() < 1e-15);
        assert!(binary_entropy(-0.1).is_err());
        assert!(binary_entropy(1.5).is_err());
    }

    #[test]
    fn efficiency_reference_points() {
        let f = efficiency(1 << 15, 1 << 16, 0.1).unwrap();
        assert!((f.value() - 1.066_108_097_463_002).abs() < 1e-12);
        assert!(!f.is_sub_shannon());
        assert!(efficiency(1 << 15, 1 << 16, 0.2).unwrap().is_sub_shannon());
        assert!(efficiency(4, 4, 0.1).is_err());
        assert!(efficiency(1, 4, 0.5).is_err());
    }

    #[test]
    fn band_boundary_root() {
        let e = crossover_for_efficiency(0.5, 1.15).unwrap();
        assert!((binary_entropy(e).unwrap() - 0.5 / 1.15).abs() < 1e-14);
        let f = efficiency(1 << 15, 1 << 16, e).unwrap().value();
        assert!((f - 1.15).abs() < 1e-12);
        assert!(crossover_for_efficiency(0.5, 0.4).is_err());
    }

    #[test]
    fn keys_are_seeded() {
        assert_eq!(generate_key(1000, 3).unwrap(), generate_key(1000, 3).unwrap());
        assert_ne!(generate_key(1000, 3).unwrap(), generate_key(1000, 4).unwrap());
        assert!(generate_key(0, 1).is_err());
        let big = generate_key(DEFAULT_KEY_BITS, 11).unwrap();
        assert_eq!(big.len(), 1 << 20);
        // Binomial(2^20, 1/2) has sigma 512; 6 sigma is well inside 0.01.
        let mean = big.weight() as f64 / big.len() as f64;
        assert!((mean - 0.5).abs() < 0.01);
    }

    #[test]
    fn corruption_statistics() {
        let key = generate_key(1 << 16, 5).unwrap();
        let (noisy, pattern) = bsc_corrupt(&key, &ChannelModel::new(0.1, 9).unwrap());
        assert_eq!(key.xor(&pattern).unwrap(), noisy);
        let sigma = ((1u64 << 16) as f64 * 0.1 * 0.9).sqrt();
        let w = pattern.weight() as f64;
        assert!((w - 6553.6).abs() < 6.0 * sigma, "weight {w}");

        let small = generate_key(1 << 10, 5).unwrap();
        let (clean, none) = bsc_corrupt(&small, &ChannelModel::new(1e-12, 1).unwrap());
        assert_eq!(none.weight(), 0);
        assert_eq!(clean, small);
        assert!(ChannelModel::new(0.5, 0).is_err());
    }

    #[test]
    fn weight_matches_binomial_mean_over_trials() {
        let (n, e, trials) = (4096usize, 0.05, 200u64);
        let key = generate_key(n, 1).unwrap();
        let total: usize = (0..trials)
            .map(|t| bsc_corrupt(&key, &ChannelModel::new(e, t).unwrap()).1.weight())
            .sum();
        let mean = total as f64 / trials as f64;
        let sigma_of_mean = (n as f64 * e * (1.0 - e) / trials as f64).sqrt();
        assert!((mean - n as f64 * e).abs() < 4.0 * sigma_of_mean, "mean {mean}");
    }

    #[test]
    fn default_geometry_splits_into_sixteen() {
        let key = generate_key(DEFAULT_KEY_BITS, 2).unwrap();
        let frames = split_key(&key, DEFAULT_BLOCK_BITS).unwrap();
        assert_eq!(frames.k(), 16);
        assert_eq!(frames.total_length(), 1 << 20);
        assert_eq!(join_frames(&frames).unwrap(), key);
        assert_eq!(frames.blocks()[3], key.slice(3 << 16, 1 << 16).unwrap());
        assert!(split_key(&key, 3).is_err());
    }

    #[test]
    fn streams_are_independent_of_draw_order() {
        let a: Vec<u64> = (0..4).map(|s| substream(7, s).next_u64()).collect();
        let b: Vec<u64> = (0..4).rev().map(|s| substream(7, s).next_u64()).collect();
        assert_eq!(a, b.into_iter().rev().collect::<Vec<_>>());
        assert_ne!(stream_id(&[1, 2]), stream_id(&[2, 1]));
    }

    proptest! {
        #[test]
        fn entropy_is_symmetric(e in 0.0f64..=1.0) {
            let a = binary_entropy(e).unwrap();
            let b = binary_entropy(1.0 - e).unwrap();
            prop_assert!((a - b).abs() < 1e-12);
        }

        #[test]
        fn efficiency_decreases_in_e(a in 0.001f64..0.499, b in 0.001f64..0.499) {
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            prop_assume!(hi - lo > 1e-9);
            let f_lo = efficiency(500, 1000, lo).unwrap().value();
            let f_hi = efficiency(500, 1000, hi).unwrap().value();
            prop_assert!(f_lo > f_hi);
        }

        #[test]
        fn split_join_roundtrip(blocks in 1usize..9, n in 1usize..130, seed in any::<u64>()) {
            let key = generate_key(blocks * n, seed).unwrap();
            let frames = split_key(&key, n).unwrap();
            prop_assert_eq!(frames.k(), blocks);
            prop_assert_eq!(join_frames(&frames).unwrap(), key);
        }
    }
}
