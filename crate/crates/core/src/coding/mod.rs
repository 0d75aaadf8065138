//! Bit-level primitives: packed bitstrings, prefix codes and the modular
//! one-time pad.

mod bits;
mod huffman;
mod otp;

pub use bits::Bitstring;
#[doc(hidden)]
pub use huffman::huffman_build_largest_first;
pub use huffman::{huffman_build, PrefixCode};
pub use otp::{ceil_log2, otp_decode, otp_encode, OneTimePad};
