use std::fmt;

use crate::quantize::decompose;
use crate::real::exp2i;
use crate::{PositConfig, PositError};

/// An n-bit posit pattern. Negative values are the two's complement of
/// the positive pattern, so patterns ordered as n-bit signed integers
/// are ordered by value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PositBits {
    bits: u64,
    config: PositConfig,
}

/// Unpacked fields of a finite nonzero posit.
///
/// `rb` is the in-word regime width including the terminating bit (it
/// equals `k+2` for `k >= 0` and `-k+1` for `k < 0`, capped at `n-1`
/// when the run fills the word). `e` is the full exponent value with
/// truncated low bits restored as zeros, so `0 <= e < 2^es`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PositFields {
    /// Sign, +1 or -1.
    pub s: i32,
    /// Regime value.
    pub k: i32,
    /// Exponent value.
    pub e: u32,
    /// Fraction in [0, 1).
    pub f: f64,
    /// Regime field width.
    pub rb: u32,
    /// Exponent field width (<= es).
    pub eb: u32,
    /// Fraction field width.
    pub fb: u32,
}

/// Result of unpacking a bit pattern.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Decoded {
    Zero,
    NaR,
    Finite(PositFields),
}

impl PositBits {
    /// Wraps a raw pattern, masking to n bits.
    pub fn from_bits(bits: u64, config: PositConfig) -> Self {
        PositBits {
            bits: bits & config.mask(),
            config,
        }
    }

    /// Encode a finite real: the pattern whose decoded value equals
    /// `quantize_real(x, config)`.
    pub fn from_real(x: f64, config: PositConfig) -> Result<Self, PositError> {
        let d = match decompose(x, config)? {
            None => return Ok(PositBits { bits: 0, config }),
            Some(d) => d,
        };
        let n = config.n();
        // Assemble the n-1 bits below the sign: regime run, terminator,
        // surviving exponent bits, surviving fraction bits.
        let mut field: u64 = 0;
        let mut pos = n - 1; // bits remaining in the field
        if d.k >= 0 {
            let run = (d.k + 1) as u32;
            if run >= pos {
                field = (1u64 << pos) - 1; // saturated: maxpos
                pos = 0;
            } else {
                field |= ((1u64 << run) - 1) << (pos - run);
                pos -= run + 1; // run + terminating zero
            }
        } else {
            let run = (-d.k) as u32;
            // run + terminating one always fits for k >= 2-n
            pos -= run;
            field |= 1u64 << (pos - 1);
            pos -= 1;
        }
        if pos > 0 {
            debug_assert_eq!(pos, d.eb + d.fb);
            field |= (d.e_bits as u64) << (pos - d.eb);
            field |= d.frac_bits;
        }
        let bits = if d.negative {
            (field.wrapping_neg()) & config.mask()
        } else {
            field
        };
        Ok(PositBits { bits, config })
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }

    pub fn config(&self) -> PositConfig {
        self.config
    }

    pub fn is_zero(&self) -> bool {
        self.bits == 0
    }

    pub fn is_nar(&self) -> bool {
        self.bits == self.config.nar_bits()
    }

    /// The pattern reinterpreted as an n-bit two's-complement integer.
    pub fn as_signed(&self) -> i64 {
        let shift = 64 - self.config.n();
        ((self.bits << shift) as i64) >> shift
    }

    /// Unpack sign, regime, exponent and fraction.
    pub fn decode_fields(&self) -> Decoded {
        if self.is_zero() {
            return Decoded::Zero;
        }
        if self.is_nar() {
            return Decoded::NaR;
        }
        let config = self.config;
        let n = config.n();
        let es = config.es();
        let negative = self.bits >> (n - 1) == 1;
        let mag = if negative {
            self.bits.wrapping_neg() & config.mask()
        } else {
            self.bits
        };

        // Regime: run of identical bits below the sign bit.
        let width = n - 1;
        let field = mag & ((1u64 << width) - 1);
        let leading = field >> (width - 1);
        let mut run = 1u32;
        while run < width && (field >> (width - 1 - run)) & 1 == leading {
            run += 1;
        }
        let k = if leading == 1 {
            run as i32 - 1
        } else {
            -(run as i32)
        };

        let rb = (run + 1).min(width); // terminator, unless the run fills the word
        let rem = width - rb;
        let eb = rem.min(es);
        let fb = rem - eb;
        let e_field = if eb == 0 {
            0
        } else {
            ((field >> fb) & ((1u64 << eb) - 1)) as u32
        };
        // Truncated low exponent bits read as zero.
        let e = e_field << (es - eb);
        let frac = if fb == 0 {
            0
        } else {
            field & ((1u64 << fb) - 1)
        };
        let f = frac as f64 * exp2i(-(fb as i32));

        Decoded::Finite(PositFields {
            s: if negative { -1 } else { 1 },
            k,
            e,
            f,
            rb,
            eb,
            fb,
        })
    }

    /// Value per the posit equation; NaR decodes to NaN.
    pub fn to_real(&self) -> f64 {
        match self.decode_fields() {
            Decoded::Zero => 0.0,
            Decoded::NaR => f64::NAN,
            Decoded::Finite(fl) => fl.value(self.config),
        }
    }

    /// Binary string of the pattern, MSB first.
    pub fn to_binary_string(&self) -> String {
        (0..self.config.n())
            .rev()
            .map(|i| if (self.bits >> i) & 1 == 1 { '1' } else { '0' })
            .collect()
    }
}

impl PositFields {
    /// (-1)^s * useed^k * 2^e * (1+f), exact in f64.
    pub fn value(&self, config: PositConfig) -> f64 {
        let exp = self.k * config.regime_scale() + self.e as i32;
        let v = (1.0 + self.f) * exp2i(exp);
        if self.s < 0 {
            -v
        } else {
            v
        }
    }
}

impl fmt::Display for PositBits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_binary_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(n: u32, es: u32) -> PositConfig {
        PositConfig::new(n, es).unwrap()
    }

    fn enc(x: f64, c: PositConfig) -> u64 {
        PositBits::from_real(x, c).unwrap().bits()
    }

    #[test]
    fn encode_table_i_rows() {
        let c = cfg(5, 1);
        assert_eq!(enc(0.0, c), 0b00000);
        assert_eq!(enc(3.0, c), 0b01011);
        assert_eq!(enc(1.0, c), 0b01000);
        assert_eq!(enc(64.0, c), 0b01111);
        assert_eq!(enc(1.0 / 64.0, c), 0b00001);
        assert_eq!(enc(0.375, c), 0b00101);
        assert_eq!(enc(1.5, c), 0b01001);
    }

    #[test]
    fn negative_is_twos_complement() {
        let c = cfg(5, 1);
        assert_eq!(enc(-1.0, c), 0b11000);
        assert_eq!(PositBits::from_bits(0b11000, c).to_real(), -1.0);
    }

    #[test]
    fn decode_fields_examples() {
        let c = cfg(5, 1);
        match PositBits::from_bits(0b01101, c).decode_fields() {
            Decoded::Finite(fl) => {
                assert_eq!((fl.s, fl.k, fl.e, fl.f), (1, 1, 1, 0.0));
                assert_eq!(fl.value(c), 8.0);
            }
            other => panic!("expected finite, got {other:?}"),
        }
        match PositBits::from_bits(0b00010, c).decode_fields() {
            Decoded::Finite(fl) => {
                assert_eq!((fl.s, fl.k, fl.e, fl.f), (1, -2, 0, 0.0));
                assert_eq!(fl.value(c), 1.0 / 16.0);
            }
            other => panic!("expected finite, got {other:?}"),
        }
        assert_eq!(
            PositBits::from_bits(0b10000, c).decode_fields(),
            Decoded::NaR
        );
    }

    #[test]
    fn decode_to_real_examples() {
        let c = cfg(5, 1);
        assert_eq!(PositBits::from_bits(0b00101, c).to_real(), 0.375);
        assert_eq!(PositBits::from_bits(0b01001, c).to_real(), 1.5);
        assert_eq!(PositBits::from_bits(0b00000, c).to_real(), 0.0);
        assert!(PositBits::from_bits(0b10000, c).to_real().is_nan());
    }

    #[test]
    fn field_widths_fit_word() {
        let c = cfg(5, 1);
        for b in 1..32u64 {
            if b == c.nar_bits() {
                continue;
            }
            if let Decoded::Finite(fl) = PositBits::from_bits(b, c).decode_fields() {
                assert!(1 + fl.rb + fl.eb + fl.fb <= 5, "pattern {b:05b}");
                assert!(fl.eb <= 1);
                assert!(fl.e < 2);
                assert!((0.0..1.0).contains(&fl.f));
            }
        }
    }

    #[test]
    fn minimal_format() {
        let c = cfg(2, 0);
        assert_eq!(PositBits::from_bits(0b01, c).to_real(), 1.0);
        assert_eq!(PositBits::from_bits(0b11, c).to_real(), -1.0);
        assert_eq!(enc(1.0, c), 0b01);
        assert_eq!(enc(0.7, c), 0b00);
    }
}
