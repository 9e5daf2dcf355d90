//! Bit and soft-bit containers.
//!
//! Bits are stored one per byte (`0` or `1`). Packing to bytes is MSB-first.
//! LLRs are positive when bit `0` is more likely.

use alloc::vec::Vec;
use core::ops::{Deref, DerefMut};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct BitStream(Vec<u8>);

impl BitStream {
    pub fn new() -> Self {
        BitStream(Vec::new())
    }

    /// Wraps a vector of `0`/`1` values. Any non-zero byte is treated as `1`.
    pub fn from_bits(mut bits: Vec<u8>) -> Self {
        for b in bits.iter_mut() {
            *b = (*b != 0) as u8;
        }
        BitStream(bits)
    }

    pub fn from_bytes(bytes: &[u8]) -> Self {
        let mut bits = Vec::with_capacity(bytes.len() * 8);
        for &byte in bytes {
            for shift in (0..8).rev() {
                bits.push((byte >> shift) & 1);
            }
        }
        BitStream(bits)
    }

    /// Packs MSB-first; a trailing partial byte is zero-filled.
    pub fn to_bytes(&self) -> Vec<u8> {
        self.0
            .chunks(8)
            .map(|chunk| {
                chunk
                    .iter()
                    .enumerate()
                    .fold(0u8, |acc, (i, &b)| acc | (b << (7 - i)))
            })
            .collect()
    }

    pub fn into_inner(self) -> Vec<u8> {
        self.0
    }

    pub fn count_ones(&self) -> usize {
        self.0.iter().filter(|&&b| b != 0).count()
    }
}

impl Deref for BitStream {
    type Target = [u8];
    fn deref(&self) -> &[u8] {
        &self.0
    }
}

impl DerefMut for BitStream {
    fn deref_mut(&mut self) -> &mut [u8] {
        &mut self.0
    }
}

impl From<Vec<u8>> for BitStream {
    fn from(bits: Vec<u8>) -> Self {
        BitStream::from_bits(bits)
    }
}

impl FromIterator<u8> for BitStream {
    fn from_iter<I: IntoIterator<Item = u8>>(iter: I) -> Self {
        BitStream::from_bits(iter.into_iter().collect())
    }
}

impl Extend<u8> for BitStream {
    fn extend<I: IntoIterator<Item = u8>>(&mut self, iter: I) {
        self.0.extend(iter.into_iter().map(|b| (b != 0) as u8));
    }
}

/// Per-bit log-likelihood ratios; doubles as the Chase-combining buffer.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LlrStream(Vec<f64>);

impl LlrStream {
    pub fn new(llrs: Vec<f64>) -> Self {
        LlrStream(llrs)
    }

    pub fn zeros(len: usize) -> Self {
        LlrStream(alloc::vec![0.0; len])
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    /// Sign decisions: non-negative LLR decides `0`.
    pub fn hard_decisions(&self) -> BitStream {
        BitStream(self.0.iter().map(|&l| (l < 0.0) as u8).collect())
    }

    /// Adds `other` element-wise into `self`.
    pub fn accumulate(&mut self, other: &LlrStream) -> Result<()> {
        if other.len() != self.len() {
            return Err(Error::LengthMismatch {
                expected: self.len(),
                actual: other.len(),
            });
        }
        for (a, b) in self.0.iter_mut().zip(other.iter()) {
            *a += b;
        }
        Ok(())
    }
}

impl Deref for LlrStream {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl DerefMut for LlrStream {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }
}

impl From<Vec<f64>> for LlrStream {
    fn from(v: Vec<f64>) -> Self {
        LlrStream(v)
    }
}

/// Number of positions where two bit slices differ.
pub fn hamming_distance(a: &[u8], b: &[u8]) -> usize {
    a.iter().zip(b).filter(|(x, y)| x != y).count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use proptest::prelude::*;

    #[test]
    fn msb_first_packing() {
        let bits = BitStream::from_bytes(&[0b1010_0001]);
        assert_eq!(&bits[..], &[1, 0, 1, 0, 0, 0, 0, 1]);
        assert_eq!(bits.to_bytes(), vec![0b1010_0001]);
    }

    #[test]
    fn partial_byte_zero_filled() {
        let bits = BitStream::from_bits(vec![1, 1, 1]);
        assert_eq!(bits.to_bytes(), vec![0b1110_0000]);
    }

    #[test]
    fn zero_llr_decides_zero() {
        let llr = LlrStream::new(vec![0.0, -0.1, 3.0]);
        assert_eq!(&llr.hard_decisions()[..], &[0, 1, 0]);
    }

    proptest! {
        #[test]
        fn bytes_round_trip(bytes in proptest::collection::vec(any::<u8>(), 0..64)) {
            prop_assert_eq!(BitStream::from_bytes(&bytes).to_bytes(), bytes);
        }
    }
}
