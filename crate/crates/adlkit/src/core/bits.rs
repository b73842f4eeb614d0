//! Bit-level primitives: growable bitstrings, a sequential read cursor, and
//! the Elias gamma code used for unbounded non-negative payloads.
//!
//! Every codec in the crate is prefix-free, so concatenated codewords decode
//! unambiguously from a single cursor; the cursor errors (rather than pads)
//! on truncated input.

use crate::error::{AdlError, Result};

/// A sequence of bits, most-significant-first within pushed words.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct BitString {
    bits: Vec<bool>,
}

impl BitString {
    pub fn new() -> Self {
        BitString { bits: Vec::new() }
    }

    pub fn push(&mut self, bit: bool) {
        self.bits.push(bit);
    }

    /// Append the low `width` bits of `value`, most significant first.
    pub fn push_bits(&mut self, value: u64, width: usize) {
        assert!(width <= 64, "width {width} exceeds u64");
        for shift in (0..width).rev() {
            self.bits.push((value >> shift) & 1 == 1);
        }
    }

    pub fn extend(&mut self, other: &BitString) {
        self.bits.extend_from_slice(&other.bits);
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bit(&self, i: usize) -> bool {
        self.bits[i]
    }

    pub fn cursor(&self) -> BitCursor<'_> {
        BitCursor { bits: self, pos: 0 }
    }

    /// "0"/"1" rendering, for reports and worked examples.
    pub fn to_compact_string(&self) -> String {
        self.bits
            .iter()
            .map(|&b| if b { '1' } else { '0' })
            .collect()
    }
}

/// Sequential reader over a [`BitString`].
#[derive(Debug)]
pub struct BitCursor<'a> {
    bits: &'a BitString,
    pos: usize,
}

impl<'a> BitCursor<'a> {
    pub fn read_bit(&mut self) -> Result<bool> {
        if self.pos >= self.bits.len() {
            return Err(AdlError::decode("truncated bitstring: cursor exhausted"));
        }
        let b = self.bits.bit(self.pos);
        self.pos += 1;
        Ok(b)
    }

    /// Read `width` bits as an unsigned integer, most significant first.
    pub fn read_bits(&mut self, width: usize) -> Result<u64> {
        if width > 64 {
            return Err(AdlError::decode(format!("field width {width} exceeds u64")));
        }
        let mut v = 0u64;
        for _ in 0..width {
            v = (v << 1) | u64::from(self.read_bit()?);
        }
        Ok(v)
    }

    pub fn position(&self) -> usize {
        self.pos
    }

    pub fn remaining(&self) -> usize {
        self.bits.len() - self.pos
    }

    pub fn is_exhausted(&self) -> bool {
        self.remaining() == 0
    }
}

/// Append the Elias gamma code of `n >= 1`: `floor(log2 n)` zeros followed by
/// the binary expansion of `n` (whose leading bit is always 1).
pub fn encode_gamma(out: &mut BitString, n: u64) {
    assert!(n >= 1, "gamma code undefined for 0");
    let k = 63 - n.leading_zeros() as usize; // floor(log2 n)
    for _ in 0..k {
        out.push(false);
    }
    out.push_bits(n, k + 1);
}

/// Inverse of [`encode_gamma`].
pub fn decode_gamma(cur: &mut BitCursor) -> Result<u64> {
    let mut zeros = 0usize;
    while !cur.read_bit()? {
        zeros += 1;
        if zeros > 63 {
            return Err(AdlError::decode("gamma prefix longer than 63 zeros"));
        }
    }
    let rest = cur.read_bits(zeros)?;
    Ok((1u64 << zeros) | rest)
}

/// Length in bits of the gamma code of `n >= 1`.
pub fn gamma_len(n: u64) -> usize {
    assert!(n >= 1, "gamma code undefined for 0");
    2 * (63 - n.leading_zeros() as usize) + 1
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_first_values() {
        // n: codeword
        let expected = [
            (1u64, "1"),
            (2, "010"),
            (3, "011"),
            (4, "00100"),
            (5, "00101"),
            (6, "00110"),
            (7, "00111"),
            (8, "0001000"),
        ];
        for (n, code) in expected {
            let mut b = BitString::new();
            encode_gamma(&mut b, n);
            assert_eq!(b.to_compact_string(), code, "gamma({n})");
            assert_eq!(b.len(), gamma_len(n));
            let mut cur = b.cursor();
            assert_eq!(decode_gamma(&mut cur).unwrap(), n);
            assert!(cur.is_exhausted());
        }
    }

    #[test]
    fn gamma_roundtrip_concatenated() {
        let ns: Vec<u64> = (1..200).chain([1 << 20, u64::MAX >> 1, u64::MAX]).collect();
        let mut b = BitString::new();
        for &n in &ns {
            encode_gamma(&mut b, n);
        }
        let mut cur = b.cursor();
        for &n in &ns {
            assert_eq!(decode_gamma(&mut cur).unwrap(), n);
        }
        assert!(cur.is_exhausted());
    }

    #[test]
    fn cursor_errors_on_truncation() {
        let mut b = BitString::new();
        b.push_bits(0b0010, 4); // gamma prefix for a 3-bit payload, then nothing
        let mut cur = b.cursor();
        assert!(decode_gamma(&mut cur).is_err());
    }

    #[test]
    fn push_bits_msb_first() {
        let mut b = BitString::new();
        b.push_bits(0b1011, 4);
        assert_eq!(b.to_compact_string(), "1011");
        let mut cur = b.cursor();
        assert_eq!(cur.read_bits(4).unwrap(), 0b1011);
    }
}
