use std::fmt;

use base64::engine::general_purpose::STANDARD;
use base64::Engine;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Packed bit sequence, most significant bit first within each byte.
///
/// Unused trailing bits of the last byte are always zero, so equality and
/// hashing are structural.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Bitstring {
    bytes: Vec<u8>,
    len: usize,
}

impl Bitstring {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.bytes
    }

    pub fn push(&mut self, bit: bool) {
        if self.len.is_multiple_of(8) {
            self.bytes.push(0);
        }
        if bit {
            *self.bytes.last_mut().unwrap() |= 0x80 >> (self.len % 8);
        }
        self.len += 1;
    }

    /// Appends the low `width` bits of `value`, most significant first.
    pub fn push_bits(&mut self, value: u64, width: u32) {
        for k in (0..width).rev() {
            self.push((value >> k) & 1 == 1);
        }
    }

    pub fn extend(&mut self, other: &Bitstring) {
        for i in 0..other.len {
            self.push(other.get(i));
        }
    }

    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        self.bytes[i / 8] & (0x80 >> (i % 8)) != 0
    }

    pub fn flip(&mut self, i: usize) {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        self.bytes[i / 8] ^= 0x80 >> (i % 8);
    }

    /// Reads `width` bits starting at `cursor` as an unsigned integer.
    pub fn read_bits(&self, cursor: usize, width: u32) -> Result<u64> {
        if cursor + width as usize > self.len {
            return Err(Error::TruncatedStream);
        }
        Ok((0..width as usize).fold(0u64, |acc, k| (acc << 1) | self.get(cursor + k) as u64))
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(|i| self.get(i))
    }

    pub fn from_bytes(bytes: Vec<u8>, len: usize) -> Result<Self> {
        if bytes.len() != len.div_ceil(8) {
            return Err(Error::ParseError(format!(
                "{} bytes cannot hold exactly {len} bits",
                bytes.len()
            )));
        }
        if !len.is_multiple_of(8) && bytes.last().is_some_and(|b| b & (0xff >> (len % 8)) != 0) {
            return Err(Error::ParseError("non-zero padding bits".into()));
        }
        Ok(Self { bytes, len })
    }
}

impl std::str::FromStr for Bitstring {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut b = Bitstring::new();
        for c in s.chars() {
            match c {
                '0' => b.push(false),
                '1' => b.push(true),
                other => return Err(Error::ParseError(format!("invalid bit '{other}'"))),
            }
        }
        Ok(b)
    }
}

impl fmt::Display for Bitstring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.iter()
            .try_for_each(|b| f.write_str(if b { "1" } else { "0" }))
    }
}

impl fmt::Debug for Bitstring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Bitstring(\"{self}\")")
    }
}

#[derive(Serialize, Deserialize)]
struct WireBits {
    bits: String,
    len: usize,
}

impl Serialize for Bitstring {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        WireBits {
            bits: STANDARD.encode(&self.bytes),
            len: self.len,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Bitstring {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let wire = WireBits::deserialize(d)?;
        let bytes = STANDARD
            .decode(wire.bits)
            .map_err(serde::de::Error::custom)?;
        Bitstring::from_bytes(bytes, wire.len).map_err(serde::de::Error::custom)
    }
}
