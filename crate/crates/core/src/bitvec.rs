//! Fixed-length dense bit-vectors.
//!
//! Every vector keeps the bits past `len` zeroed, so population counts never
//! need masking. Binary operations require equal lengths.

use std::fmt;

use crate::error::{Error, Result};

const WORD_BITS: usize = 64;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitVector {
    len: usize,
    words: Vec<u64>,
}

#[inline]
fn words_for(len: usize) -> usize {
    len.div_ceil(WORD_BITS)
}

impl BitVector {
    /// All-zero vector of `len` bits.
    pub fn zeros(len: usize) -> Self {
        BitVector {
            len,
            words: vec![0; words_for(len)],
        }
    }

    /// All-one vector of `len` bits.
    pub fn ones(len: usize) -> Self {
        let mut v = BitVector {
            len,
            words: vec![u64::MAX; words_for(len)],
        };
        v.clear_padding();
        v
    }

    pub fn from_bools<I>(bits: I) -> Self
    where
        I: IntoIterator<Item = bool>,
    {
        let mut words = Vec::new();
        let mut len = 0;
        for bit in bits {
            if len % WORD_BITS == 0 {
                words.push(0);
            }
            if bit {
                *words.last_mut().unwrap() |= 1 << (len % WORD_BITS);
            }
            len += 1;
        }
        BitVector { len, words }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit index {i} out of range for length {}", self.len);
        self.words[i / WORD_BITS] >> (i % WORD_BITS) & 1 == 1
    }

    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.len, "bit index {i} out of range for length {}", self.len);
        let mask = 1u64 << (i % WORD_BITS);
        if value {
            self.words[i / WORD_BITS] |= mask;
        } else {
            self.words[i / WORD_BITS] &= !mask;
        }
    }

    #[inline]
    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    fn check_len(&self, other: &BitVector) -> Result<()> {
        if self.len != other.len {
            return Err(Error::Usage(format!(
                "bit-vector length mismatch: {} vs {}",
                self.len, other.len
            )));
        }
        Ok(())
    }

    fn zip_with(&self, other: &BitVector, f: impl Fn(u64, u64) -> u64) -> Result<BitVector> {
        self.check_len(other)?;
        let words = self
            .words
            .iter()
            .zip(&other.words)
            .map(|(&a, &b)| f(a, b))
            .collect();
        Ok(BitVector {
            len: self.len,
            words,
        })
    }

    pub fn and(&self, other: &BitVector) -> Result<BitVector> {
        self.zip_with(other, |a, b| a & b)
    }

    pub fn and_not(&self, other: &BitVector) -> Result<BitVector> {
        self.zip_with(other, |a, b| a & !b)
    }

    pub fn or(&self, other: &BitVector) -> Result<BitVector> {
        self.zip_with(other, |a, b| a | b)
    }

    pub fn xor(&self, other: &BitVector) -> Result<BitVector> {
        self.zip_with(other, |a, b| a ^ b)
    }

    /// Complement within `len` bits.
    pub fn not(&self) -> BitVector {
        let mut v = BitVector {
            len: self.len,
            words: self.words.iter().map(|w| !w).collect(),
        };
        v.clear_padding();
        v
    }

    /// `count_ones(self & other)` without materializing the conjunction.
    pub fn and_count(&self, other: &BitVector) -> Result<usize> {
        self.check_len(other)?;
        Ok(self
            .words
            .iter()
            .zip(&other.words)
            .map(|(&a, &b)| (a & b).count_ones() as usize)
            .sum())
    }

    /// `count_ones(self & !other)` without materializing the difference.
    pub fn and_not_count(&self, other: &BitVector) -> Result<usize> {
        self.check_len(other)?;
        Ok(self
            .words
            .iter()
            .zip(&other.words)
            .map(|(&a, &b)| (a & !b).count_ones() as usize)
            .sum())
    }

    /// Pairs of counts `(|self & other|, |self & other & third|)`.
    pub(crate) fn and_counts3(&self, other: &BitVector, third: &BitVector) -> (usize, usize) {
        debug_assert!(self.len == other.len && self.len == third.len);
        let mut both = 0usize;
        let mut all = 0usize;
        for ((&a, &b), &c) in self.words.iter().zip(&other.words).zip(&third.words) {
            let ab = a & b;
            both += ab.count_ones() as usize;
            all += (ab & c).count_ones() as usize;
        }
        (both, all)
    }

    pub fn is_disjoint(&self, other: &BitVector) -> Result<bool> {
        Ok(self.and_count(other)? == 0)
    }

    /// Indices of set bits in ascending order.
    pub fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut word = w;
            std::iter::from_fn(move || {
                if word == 0 {
                    return None;
                }
                let tz = word.trailing_zeros() as usize;
                word &= word - 1;
                Some(wi * WORD_BITS + tz)
            })
        })
    }

    pub fn to_bools(&self) -> Vec<bool> {
        (0..self.len).map(|i| self.get(i)).collect()
    }

    fn clear_padding(&mut self) {
        let rem = self.len % WORD_BITS;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }
}

impl fmt::Debug for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitVector[")?;
        for i in 0..self.len {
            write!(f, "{}", u8::from(self.get(i)))?;
        }
        write!(f, "]")
    }
}
