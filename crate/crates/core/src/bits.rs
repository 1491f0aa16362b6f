//! Bit sequences with the ASCII `0`/`1` wire form used throughout the crate.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BitsError {
    #[error("invalid character {ch:?} at offset {offset} in bit string")]
    InvalidChar { ch: char, offset: usize },
    #[error(
        "bit position {position} is out of range for a {len}-bit vector (positions are 1-based)"
    )]
    PositionOutOfRange { position: usize, len: usize },
}

/// An ordered sequence of bits, stored one bit per byte (each byte is 0 or 1).
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct BitVec(Vec<u8>);

impl BitVec {
    pub fn new() -> Self {
        Self(Vec::new())
    }

    pub fn zeros(len: usize) -> Self {
        Self(vec![0; len])
    }

    /// Builds from any iterator of truthy values; nonzero means 1.
    pub fn from_bits<I, T>(bits: I) -> Self
    where
        I: IntoIterator<Item = T>,
        T: Into<u32>,
    {
        Self(bits.into_iter().map(|b| u8::from(b.into() != 0)).collect())
    }

    /// The low `len` bits of `word`, most significant first.
    pub fn from_word_msb_first(word: u64, len: usize) -> Self {
        Self((0..len).rev().map(|i| ((word >> i) & 1) as u8).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[u8] {
        &self.0
    }

    pub fn get(&self, index: usize) -> Option<u8> {
        self.0.get(index).copied()
    }

    pub fn push(&mut self, bit: u8) {
        self.0.push(u8::from(bit != 0));
    }

    pub fn extend_from(&mut self, other: &BitVec) {
        self.0.extend_from_slice(&other.0);
    }

    pub fn iter(&self) -> impl Iterator<Item = u8> + '_ {
        self.0.iter().copied()
    }

    /// Consecutive non-overlapping pairs packed as `first << 1 | second`.
    /// A trailing odd bit is ignored.
    pub fn pairs(&self) -> impl Iterator<Item = u8> + '_ {
        self.0.chunks_exact(2).map(|p| (p[0] << 1) | p[1])
    }

    pub fn hamming_distance(&self, other: &BitVec) -> usize {
        let common = self.0.iter().zip(&other.0).filter(|(a, b)| a != b).count();
        common + self.len().abs_diff(other.len())
    }

    pub fn xor(&self, other: &BitVec) -> BitVec {
        assert_eq!(self.len(), other.len(), "xor of unequal-length bit vectors");
        Self(self.0.iter().zip(&other.0).map(|(a, b)| a ^ b).collect())
    }

    /// Packs the bits into a word, first bit most significant.
    pub fn to_word_msb_first(&self) -> u64 {
        assert!(self.len() <= 64, "bit vector too long to pack into a word");
        self.0
            .iter()
            .fold(0u64, |acc, &b| (acc << 1) | u64::from(b))
    }

    /// Flips the bits at the given 1-based positions. Repeated positions
    /// toggle repeatedly.
    pub fn flip_bits(&self, positions: &[usize]) -> Result<BitVec, BitsError> {
        let mut out = self.clone();
        for &position in positions {
            if position == 0 || position > self.len() {
                return Err(BitsError::PositionOutOfRange {
                    position,
                    len: self.len(),
                });
            }
            out.0[position - 1] ^= 1;
        }
        Ok(out)
    }

    /// Unspaced form, e.g. `110100`.
    pub fn to_plain_string(&self) -> String {
        self.0
            .iter()
            .map(|&b| if b == 1 { '1' } else { '0' })
            .collect()
    }

    /// Space-separated pairs, e.g. `10 01 11`.
    pub fn to_pair_string(&self) -> String {
        let plain = self.to_plain_string();
        let mut out = String::with_capacity(plain.len() * 3 / 2);
        for (i, ch) in plain.chars().enumerate() {
            if i > 0 && i % 2 == 0 {
                out.push(' ');
            }
            out.push(ch);
        }
        out
    }
}

/// Flips bits at 1-based positions; see [`BitVec::flip_bits`].
pub fn flip_bits(codeword: &BitVec, positions: &[usize]) -> Result<BitVec, BitsError> {
    codeword.flip_bits(positions)
}

impl fmt::Display for BitVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_plain_string())
    }
}

impl FromStr for BitVec {
    type Err = BitsError;

    /// Accepts `0`/`1` with any ASCII whitespace between bits.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut bits = Vec::with_capacity(s.len());
        for (offset, ch) in s.char_indices() {
            match ch {
                '0' => bits.push(0),
                '1' => bits.push(1),
                c if c.is_ascii_whitespace() => {}
                ch => return Err(BitsError::InvalidChar { ch, offset }),
            }
        }
        Ok(Self(bits))
    }
}

impl From<BitVec> for String {
    fn from(bits: BitVec) -> String {
        bits.to_plain_string()
    }
}

impl TryFrom<String> for BitVec {
    type Error = BitsError;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<Vec<u8>> for BitVec {
    fn from(bits: Vec<u8>) -> Self {
        Self::from_bits(bits)
    }
}

impl std::ops::Index<usize> for BitVec {
    type Output = u8;

    fn index(&self, index: usize) -> &u8 {
        &self.0[index]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bv(s: &str) -> BitVec {
        s.parse().unwrap()
    }

    #[test]
    fn parses_spaced_and_unspaced() {
        assert_eq!(bv("10 01 11"), bv("100111"));
        assert_eq!(bv("10 01 11").to_pair_string(), "10 01 11");
        assert!(matches!(
            "10x1".parse::<BitVec>(),
            Err(BitsError::InvalidChar { ch: 'x', offset: 2 })
        ));
    }

    #[test]
    fn flips_third_and_seventh_bits() {
        let c = bv("10 01 11 10 11 00");
        assert_eq!(c.flip_bits(&[3, 7]).unwrap(), bv("10 11 11 00 11 00"));
    }

    #[test]
    fn empty_flip_is_identity() {
        let c = bv("1011");
        assert_eq!(c.flip_bits(&[]).unwrap(), c);
    }

    #[test]
    fn out_of_range_flip_names_index_and_length() {
        let err = bv("1011").flip_bits(&[5]).unwrap_err();
        assert_eq!(
            err,
            BitsError::PositionOutOfRange {
                position: 5,
                len: 4
            }
        );
        assert!(err.to_string().contains('5') && err.to_string().contains('4'));
        assert!(bv("1011").flip_bits(&[0]).is_err());
    }

    #[test]
    fn word_packing() {
        assert_eq!(bv("110100").to_word_msb_first(), 0b110100);
        assert_eq!(BitVec::from_word_msb_first(0b110100, 6), bv("110100"));
        assert_eq!(bv("10 11").pairs().collect::<Vec<_>>(), vec![2, 3]);
    }

    proptest::proptest! {
        #[test]
        fn flip_is_an_involution(bits in proptest::collection::vec(0u8..2, 1..64), picks in proptest::collection::vec(proptest::prelude::any::<proptest::sample::Index>(), 0..8)) {
            let c = BitVec::from_bits(bits);
            let positions: Vec<usize> = picks.iter().map(|i| i.index(c.len()) + 1).collect();
            let twice = c.flip_bits(&positions).unwrap().flip_bits(&positions).unwrap();
            proptest::prop_assert_eq!(twice, c);
        }
    }
}
