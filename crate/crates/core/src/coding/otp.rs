use crate::coding::Bitstring;
use crate::error::{Error, Result};

/// `⌈log2 m⌉`, with `ceil_log2(0) = ceil_log2(1) = 0`.
pub fn ceil_log2(m: usize) -> u32 {
    if m <= 1 {
        0
    } else {
        usize::BITS - (m - 1).leading_zeros()
    }
}

fn check(index: usize, modulus: usize) -> Result<()> {
    if index >= modulus {
        return Err(Error::IndexOutOfRange { index, modulus });
    }
    Ok(())
}

/// `(x + w) mod m`.
pub fn otp_encode(x: usize, w: usize, m: usize) -> Result<usize> {
    check(x, m)?;
    check(w, m)?;
    Ok((x + w) % m)
}

/// Inverse of [`otp_encode`]: `(x̃ - w) mod m`.
pub fn otp_decode(ciphered: usize, w: usize, m: usize) -> Result<usize> {
    check(ciphered, m)?;
    check(w, m)?;
    Ok((ciphered + m - w) % m)
}

/// One-time pad over `Z_m` emitted as a fixed `⌈log2 m⌉`-bit field.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OneTimePad {
    pub modulus: usize,
}

impl OneTimePad {
    pub fn new(modulus: usize) -> Self {
        Self { modulus }
    }

    pub fn width(&self) -> u32 {
        ceil_log2(self.modulus)
    }

    pub fn emit(&self, x: usize, w: usize, out: &mut Bitstring) -> Result<()> {
        let c = otp_encode(x, w, self.modulus)?;
        out.push_bits(c as u64, self.width());
        Ok(())
    }

    /// Parses the field at `cursor` and removes the pad; returns `(x, next cursor)`.
    pub fn parse(&self, bits: &Bitstring, cursor: usize, w: usize) -> Result<(usize, usize)> {
        let c = bits.read_bits(cursor, self.width())? as usize;
        if c >= self.modulus {
            return Err(Error::MalformedCodeword(format!(
                "pad field {c} outside Z_{}",
                self.modulus
            )));
        }
        Ok((
            otp_decode(c, w, self.modulus)?,
            cursor + self.width() as usize,
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modular_arithmetic() {
        assert_eq!(otp_encode(7, 9, 12).unwrap(), 4);
        assert_eq!(otp_decode(4, 9, 12).unwrap(), 7);
        assert_eq!(otp_encode(5, 0, 12).unwrap(), 5);
        assert_eq!(
            otp_encode(12, 0, 12),
            Err(Error::IndexOutOfRange {
                index: 12,
                modulus: 12
            })
        );
        assert!(otp_decode(0, 13, 12).is_err());
    }

    #[test]
    fn widths() {
        assert_eq!(ceil_log2(1), 0);
        assert_eq!(ceil_log2(2), 1);
        assert_eq!(ceil_log2(11), 4);
        assert_eq!(ceil_log2(12), 4);
        assert_eq!(ceil_log2(16), 4);
        assert_eq!(ceil_log2(17), 5);
        for m in 1..40 {
            let pad = OneTimePad::new(m);
            for x in 0..m {
                let mut b = Bitstring::new();
                pad.emit(x, m - 1, &mut b).unwrap();
                assert_eq!(b.len(), ceil_log2(m) as usize);
                assert_eq!(pad.parse(&b, 0, m - 1).unwrap(), (x, b.len()));
            }
        }
    }

    #[test]
    fn out_of_group_field_is_malformed() {
        let pad = OneTimePad::new(12);
        let b: Bitstring = "1111".parse().unwrap();
        assert!(matches!(
            pad.parse(&b, 0, 0),
            Err(Error::MalformedCodeword(_))
        ));
    }

    #[test]
    fn uniform_key_hides_plaintext() {
        // enumerate all (x, w) pairs for a skewed pmf on Z_12
        let m = 12;
        let px: Vec<f64> = (1..=m).map(|i| i as f64 / 78.0).collect();
        let mut joint = vec![vec![0.0; m]; m];
        for x in 0..m {
            for w in 0..m {
                joint[x][otp_encode(x, w, m).unwrap()] += px[x] / m as f64;
            }
        }
        for x in 0..m {
            for c in 0..m {
                assert!((joint[x][c] - px[x] / m as f64).abs() < 1e-15);
            }
        }
    }
}
