//! Fixed-length bitsets over `0..len`.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BitSetError {
    #[error("hex payload has {found} bytes, expected {expected} for length {len}")]
    Length { len: usize, expected: usize, found: usize },
    #[error("invalid hex payload: {0}")]
    Hex(String),
    #[error("bit {bit} set beyond declared length {len}")]
    Overflow { bit: usize, len: usize },
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitSet {
    len: usize,
    blocks: Vec<u64>,
}

impl BitSet {
    pub fn new(len: usize) -> Self {
        BitSet {
            len,
            blocks: vec![0; len.div_ceil(64)],
        }
    }

    pub fn full(len: usize) -> Self {
        let mut s = BitSet {
            len,
            blocks: vec![!0; len.div_ceil(64)],
        };
        s.trim();
        s
    }

    pub fn from_indices<I: IntoIterator<Item = usize>>(len: usize, idx: I) -> Self {
        let mut s = BitSet::new(len);
        for i in idx {
            s.insert(i);
        }
        s
    }

    fn trim(&mut self) {
        let r = self.len % 64;
        if r != 0 {
            if let Some(last) = self.blocks.last_mut() {
                *last &= (1u64 << r) - 1;
            }
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.iter().all(|&b| b == 0)
    }

    pub fn is_full(&self) -> bool {
        self.count() == self.len
    }

    pub fn insert(&mut self, i: usize) {
        assert!(i < self.len, "bit {i} out of range {}", self.len);
        self.blocks[i / 64] |= 1 << (i % 64);
    }

    pub fn remove(&mut self, i: usize) {
        assert!(i < self.len);
        self.blocks[i / 64] &= !(1 << (i % 64));
    }

    pub fn contains(&self, i: usize) -> bool {
        i < self.len && self.blocks[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn count(&self) -> usize {
        self.blocks.iter().map(|b| b.count_ones() as usize).sum()
    }

    pub fn union_with(&mut self, other: &BitSet) {
        debug_assert_eq!(self.len, other.len);
        for (a, b) in self.blocks.iter_mut().zip(&other.blocks) {
            *a |= b;
        }
    }

    pub fn intersect_with(&mut self, other: &BitSet) {
        debug_assert_eq!(self.len, other.len);
        for (a, b) in self.blocks.iter_mut().zip(&other.blocks) {
            *a &= b;
        }
    }

    pub fn difference_with(&mut self, other: &BitSet) {
        for (a, b) in self.blocks.iter_mut().zip(&other.blocks) {
            *a &= !b;
        }
    }

    pub fn intersection_count(&self, other: &BitSet) -> usize {
        self.blocks
            .iter()
            .zip(&other.blocks)
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum()
    }

    /// Number of bits of `self` not present in `covered`.
    pub fn count_outside(&self, covered: &BitSet) -> usize {
        self.blocks
            .iter()
            .zip(&covered.blocks)
            .map(|(a, b)| (a & !b).count_ones() as usize)
            .sum()
    }

    pub fn intersects(&self, other: &BitSet) -> bool {
        self.blocks.iter().zip(&other.blocks).any(|(a, b)| a & b != 0)
    }

    pub fn is_subset(&self, other: &BitSet) -> bool {
        self.blocks.iter().zip(&other.blocks).all(|(a, b)| a & !b == 0)
    }

    pub fn complement(&self) -> BitSet {
        let mut s = BitSet {
            len: self.len,
            blocks: self.blocks.iter().map(|b| !b).collect(),
        };
        s.trim();
        s
    }

    pub fn first_missing(&self) -> Option<usize> {
        for (bi, &b) in self.blocks.iter().enumerate() {
            if b != !0 {
                let i = bi * 64 + (!b).trailing_zeros() as usize;
                return (i < self.len).then_some(i);
            }
        }
        None
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.blocks.iter().enumerate().flat_map(|(bi, &b)| {
            let mut rest = b;
            std::iter::from_fn(move || {
                if rest == 0 {
                    return None;
                }
                let t = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                Some(bi * 64 + t)
            })
        })
    }

    /// Little-endian byte image (bit `i` lives in byte `i / 8`, bit `i % 8`), hex encoded.
    pub fn to_hex(&self) -> String {
        let bytes: Vec<u8> = (0..self.len.div_ceil(8))
            .map(|k| (self.blocks[k / 8] >> (8 * (k % 8))) as u8)
            .collect();
        hex::encode(bytes)
    }

    pub fn from_hex(len: usize, s: &str) -> Result<Self, BitSetError> {
        let bytes = hex::decode(s).map_err(|e| BitSetError::Hex(e.to_string()))?;
        let expected = len.div_ceil(8);
        if bytes.len() != expected {
            return Err(BitSetError::Length {
                len,
                expected,
                found: bytes.len(),
            });
        }
        let mut out = BitSet::new(len);
        for (k, &byte) in bytes.iter().enumerate() {
            out.blocks[k / 8] |= (byte as u64) << (8 * (k % 8));
        }
        let before = out.clone();
        out.trim();
        if out != before {
            let bit = (len..expected * 8).find(|&i| before.blocks[i / 64] >> (i % 64) & 1 == 1);
            return Err(BitSetError::Overflow {
                bit: bit.unwrap_or(len),
                len,
            });
        }
        Ok(out)
    }
}

impl fmt::Debug for BitSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

/// Serialized as `{ "len": n, "hex": "..." }`.
#[derive(Serialize, Deserialize)]
struct HexForm {
    len: usize,
    hex: String,
}

impl Serialize for BitSet {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        HexForm {
            len: self.len,
            hex: self.to_hex(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for BitSet {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let h = HexForm::deserialize(d)?;
        BitSet::from_hex(h.len, &h.hex).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn basic_ops() {
        let mut s = BitSet::new(70);
        s.insert(0);
        s.insert(69);
        assert_eq!(s.count(), 2);
        assert_eq!(s.iter().collect::<Vec<_>>(), [0, 69]);
        assert_eq!(s.complement().count(), 68);
        assert_eq!(s.first_missing(), Some(1));
        assert!(BitSet::full(70).first_missing().is_none());
        assert!(BitSet::full(64).is_full());
    }

    #[test]
    fn hex_layout() {
        let s = BitSet::from_indices(12, [0, 1, 9]);
        assert_eq!(s.to_hex(), "0302");
        assert!(matches!(BitSet::from_hex(12, "03"), Err(BitSetError::Length { .. })));
        assert!(matches!(BitSet::from_hex(12, "0310"), Err(BitSetError::Overflow { bit: 12, .. })));
    }

    proptest! {
        #[test]
        fn hex_round_trip(len in 1usize..300, bits in proptest::collection::vec(any::<usize>(), 0..40)) {
            let s = BitSet::from_indices(len, bits.into_iter().map(|b| b % len));
            let back = BitSet::from_hex(len, &s.to_hex()).unwrap();
            prop_assert_eq!(back, s);
        }
    }
}
