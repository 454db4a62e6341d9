//! Bit masks over qubit registers.
//!
//! A mask stores one bit per qubit in little-endian 64-bit words. Ordering is
//! numeric (most significant word first), so sorted containers iterate in
//! ascending bitmask value.

use smallvec::SmallVec;
use std::cmp::Ordering;

/// Occupation bitmask; bit `q` set means qubit `q` is excited.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct Mask(SmallVec<[u64; 2]>);

fn words_for(nbits: usize) -> usize {
    nbits.div_ceil(64).max(1)
}

impl Mask {
    /// All-zero mask wide enough for `nbits` qubits.
    pub fn zeros(nbits: usize) -> Self {
        Mask(SmallVec::from_elem(0, words_for(nbits)))
    }

    /// Mask with the listed bits set.
    pub fn from_bits(nbits: usize, bits: impl IntoIterator<Item = usize>) -> Self {
        let mut m = Self::zeros(nbits);
        for b in bits {
            m.set(b, true);
        }
        m
    }

    /// Number of stored words.
    pub fn n_words(&self) -> usize {
        self.0.len()
    }

    pub fn words(&self) -> &[u64] {
        &self.0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        (self.0[i / 64] >> (i % 64)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, v: bool) {
        let w = &mut self.0[i / 64];
        if v {
            *w |= 1 << (i % 64);
        } else {
            *w &= !(1 << (i % 64));
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        self.0[i / 64] ^= 1 << (i % 64);
    }

    pub fn count_ones(&self) -> usize {
        self.0.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&w| w == 0)
    }

    /// True when the two masks share a set bit.
    pub fn intersects(&self, other: &Mask) -> bool {
        self.0.iter().zip(other.0.iter()).any(|(a, b)| a & b != 0)
    }

    /// Number of set bits shared with `other`.
    pub fn and_count(&self, other: &Mask) -> usize {
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum()
    }

    /// Bitwise or, in place.
    pub fn or_assign(&mut self, other: &Mask) {
        for (a, b) in self.0.iter_mut().zip(other.0.iter()) {
            *a |= b;
        }
    }

    /// Bitwise xor, in place.
    pub fn xor_assign(&mut self, other: &Mask) {
        for (a, b) in self.0.iter_mut().zip(other.0.iter()) {
            *a ^= b;
        }
    }

    /// Bitwise and.
    pub fn and(&self, other: &Mask) -> Mask {
        Mask(self.0.iter().zip(other.0.iter()).map(|(a, b)| a & b).collect())
    }

    /// Clear every bit of `other`.
    pub fn clear_bits(&mut self, other: &Mask) {
        for (a, b) in self.0.iter_mut().zip(other.0.iter()) {
            *a &= !b;
        }
    }

    /// Copy widened or truncated to hold `nbits` qubits.
    pub fn resized(&self, nbits: usize) -> Mask {
        let mut m = Mask::zeros(nbits);
        for (i, w) in self.0.iter().enumerate().take(m.0.len()) {
            m.0[i] = *w;
        }
        let rem = nbits % 64;
        if rem != 0 {
            let last = m.0.len() - 1;
            m.0[last] &= (1u64 << rem) - 1;
        }
        m
    }

    /// Indices of set bits in ascending order.
    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    None
                } else {
                    let t = w.trailing_zeros() as usize;
                    w &= w - 1;
                    Some(wi * 64 + t)
                }
            })
        })
    }

    /// Big-endian hex string with `ceil(nbits/4)` digits.
    pub fn to_hex(&self, nbits: usize) -> String {
        let digits = nbits.div_ceil(4).max(1);
        let mut s = String::with_capacity(digits);
        for d in (0..digits).rev() {
            let mut nib = 0u8;
            for k in 0..4 {
                let bit = d * 4 + k;
                if bit < nbits && self.get(bit) {
                    nib |= 1 << k;
                }
            }
            s.push(char::from_digit(nib as u32, 16).expect("nibble"));
        }
        s
    }

    /// Parse the output of [`Mask::to_hex`].
    pub fn from_hex(s: &str, nbits: usize) -> Option<Mask> {
        let mut m = Mask::zeros(nbits);
        for (pos, ch) in s.chars().rev().enumerate() {
            let nib = ch.to_digit(16)?;
            for k in 0..4 {
                if nib >> k & 1 == 1 {
                    let bit = pos * 4 + k;
                    if bit >= nbits {
                        return None;
                    }
                    m.set(bit, true);
                }
            }
        }
        Some(m)
    }
}

impl Ord for Mask {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0
            .len()
            .cmp(&other.0.len())
            .then_with(|| self.0.iter().rev().cmp(other.0.iter().rev()))
    }
}

impl PartialOrd for Mask {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hex_round_trip_and_order() {
        let a = Mask::from_bits(70, [0, 3, 65]);
        let h = a.to_hex(70);
        assert_eq!(h.len(), 18);
        assert_eq!(Mask::from_hex(&h, 70).unwrap(), a);
        let b = Mask::from_bits(70, [66]);
        assert!(a < b);
        assert_eq!(a.ones().collect::<Vec<_>>(), vec![0, 3, 65]);
    }

    #[test]
    fn resize_truncates_high_bits() {
        let a = Mask::from_bits(100, [2, 90]);
        let b = a.resized(64);
        assert_eq!(b.ones().collect::<Vec<_>>(), vec![2]);
    }
}
