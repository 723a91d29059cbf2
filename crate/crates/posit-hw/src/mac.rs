use num_bigint::BigInt;
use num_bigint::Sign;

use posit_core::{PositBits, PositConfig};

use crate::decoder::decoder_optimized;
use crate::encoder::encoder_optimized;
use crate::fields::FpFields;

/// The FP core's accumulator, `mantissa * 2^exp` held exactly so that
/// rounding happens only in the encoder. A single product of two n-bit
/// posits always fits; sums keep growing the mantissa instead of
/// rounding, the way an exact-MAC accumulator does.
#[derive(Debug, Clone, PartialEq)]
pub struct FpAccumulator {
    mantissa: BigInt,
    exp: i64,
    nar: bool,
}

impl FpAccumulator {
    pub fn zero() -> Self {
        FpAccumulator {
            mantissa: BigInt::ZERO,
            exp: 0,
            nar: false,
        }
    }

    pub fn nar() -> Self {
        FpAccumulator {
            mantissa: BigInt::ZERO,
            exp: 0,
            nar: true,
        }
    }

    /// Seed the accumulator with an exact wide value. Every finite f64
    /// is dyadic, so this never rounds.
    pub fn from_real(v: f64) -> Self {
        if !v.is_finite() {
            return FpAccumulator::nar();
        }
        if v == 0.0 {
            return FpAccumulator::zero();
        }
        let bits = v.to_bits();
        let raw_exp = ((bits >> 52) & 0x7ff) as i64;
        let frac = bits & ((1u64 << 52) - 1);
        let (mant, exp) = if raw_exp == 0 {
            (frac, -1074i64)
        } else {
            (frac | (1u64 << 52), raw_exp - 1075)
        };
        let mant = BigInt::from(mant);
        let mut acc = FpAccumulator {
            mantissa: if v < 0.0 { -mant } else { mant },
            exp,
            nar: false,
        };
        acc.normalize();
        acc
    }

    /// Seed the accumulator from a decoded posit.
    pub fn from_fields(f: &FpFields, config: PositConfig) -> Self {
        if f.nar {
            return FpAccumulator::nar();
        }
        if f.zero {
            return FpAccumulator::zero();
        }
        let mant = BigInt::from(f.mantissa);
        let mant = if f.sign == 1 { -mant } else { mant };
        FpAccumulator {
            mantissa: mant,
            exp: f.eff_exp - (config.n() as i64 - 2),
            nar: false,
        }
    }

    pub fn is_nar(&self) -> bool {
        self.nar
    }

    pub fn is_zero(&self) -> bool {
        !self.nar && self.mantissa == BigInt::ZERO
    }

    fn add_scaled(&mut self, mant: BigInt, exp: i64) {
        if self.nar {
            return;
        }
        if self.mantissa == BigInt::ZERO {
            self.mantissa = mant;
            self.exp = exp;
        } else if exp >= self.exp {
            self.mantissa += mant << (exp - self.exp) as u32;
        } else {
            self.mantissa = (&self.mantissa << (self.exp - exp) as u32) + mant;
            self.exp = exp;
        }
        self.normalize();
    }

    /// Keep the representation canonical: zero at exp 0, otherwise an
    /// odd mantissa.
    fn normalize(&mut self) {
        if self.mantissa == BigInt::ZERO {
            self.exp = 0;
            return;
        }
        let tz = self.mantissa.trailing_zeros().unwrap_or(0);
        if tz > 0 {
            self.mantissa >>= tz as u32;
            self.exp += tz as i64;
        }
    }

    /// Present the exact value to the encoder: sign, effective
    /// exponent, and the top n-1 mantissa bits truncated toward zero.
    pub fn to_fields(&self, config: PositConfig) -> FpFields {
        if self.nar {
            return FpFields::nar();
        }
        if self.mantissa == BigInt::ZERO {
            return FpFields::zero();
        }
        let sign = if self.mantissa.sign() == Sign::Minus {
            1
        } else {
            0
        };
        let mag = self.mantissa.magnitude();
        let bitlen = mag.bits();
        let target = config.n() as u64 - 1;
        let mantissa = if bitlen >= target {
            let top: num_bigint::BigUint = mag >> (bitlen - target);
            top.iter_u64_digits().next().unwrap_or(0)
        } else {
            let top: num_bigint::BigUint = mag << (target - bitlen);
            top.iter_u64_digits().next().unwrap_or(0)
        };
        FpFields {
            sign,
            eff_exp: self.exp + bitlen as i64 - 1,
            mantissa,
            zero: false,
            nar: false,
        }
    }

    /// Approximate value for reporting; exact while it fits in f64.
    pub fn value(&self) -> f64 {
        if self.nar {
            return f64::NAN;
        }
        let mut v = 0.0f64;
        for (i, digit) in self.mantissa.magnitude().iter_u64_digits().enumerate() {
            v += digit as f64 * 2f64.powi(64 * i as i32);
        }
        if self.mantissa.sign() == Sign::Minus {
            v = -v;
        }
        v * 2f64.powi(self.exp.clamp(-2000, 2000) as i32)
    }

    /// Whether the exact value converts to f64 without rounding.
    pub fn fits_f64(&self) -> bool {
        !self.nar
            && self.mantissa.magnitude().bits() <= 53
            && (self.exp + self.mantissa.bits() as i64).abs() < 1000
    }
}

/// One multiply-accumulate step: decode both operands, add their exact
/// product into the accumulator, and encode the new value. NaR in any
/// operand poisons the result; a zero operand leaves the accumulator
/// untouched.
pub fn mac(
    a: PositBits,
    b: PositBits,
    acc: &FpAccumulator,
) -> (FpAccumulator, PositBits) {
    let config = a.config();
    debug_assert_eq!(config, b.config());
    let fa = decoder_optimized(a);
    let fb = decoder_optimized(b);

    let mut next = acc.clone();
    if fa.nar || fb.nar || acc.is_nar() {
        next = FpAccumulator::nar();
    } else if !fa.zero && !fb.zero {
        let prod = BigInt::from(fa.mantissa) * BigInt::from(fb.mantissa);
        let prod = if fa.sign ^ fb.sign == 1 { -prod } else { prod };
        let exp = fa.eff_exp + fb.eff_exp - 2 * (config.n() as i64 - 2);
        next.add_scaled(prod, exp);
    }

    let out = encoder_optimized(&next.to_fields(config), config);
    (next, out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(n: u32, es: u32) -> PositConfig {
        PositConfig::new(n, es).unwrap()
    }

    fn p(x: f64, c: PositConfig) -> PositBits {
        PositBits::from_real(x, c).unwrap()
    }

    #[test]
    fn two_times_three_truncates_to_four() {
        let c = cfg(5, 1);
        let (acc, out) = mac(p(2.0, c), p(3.0, c), &FpAccumulator::zero());
        assert_eq!(acc.value(), 6.0);
        assert_eq!(out.bits(), 0b01100);
        assert_eq!(out.to_real(), 4.0);
    }

    #[test]
    fn zero_operand_keeps_accumulator() {
        let c = cfg(5, 1);
        let seed = FpAccumulator::from_fields(
            &crate::decoder::decoder_original(p(2.0, c)),
            c,
        );
        let (acc, out) = mac(p(0.0, c), p(3.0, c), &seed);
        assert_eq!(acc, seed);
        assert_eq!(out.to_real(), 2.0);
    }

    #[test]
    fn nar_poisons() {
        let c = cfg(5, 1);
        let nar = PositBits::from_bits(c.nar_bits(), c);
        let (acc, out) = mac(nar, p(3.0, c), &FpAccumulator::zero());
        assert!(acc.is_nar());
        assert!(out.is_nar());
    }

    #[test]
    fn accumulates_exactly() {
        let c = cfg(8, 1);
        let mut acc = FpAccumulator::zero();
        // 16 * (0.5 * 0.5) = 4, every step exact
        for _ in 0..16 {
            let (next, _) = mac(p(0.5, c), p(0.5, c), &acc);
            acc = next;
        }
        assert_eq!(acc.value(), 4.0);
        let out = encoder_optimized(&acc.to_fields(c), c);
        assert_eq!(out.to_real(), 4.0);
    }

    #[test]
    fn widely_spread_sum_is_exact() {
        let c = cfg(16, 2);
        let (acc, _) = mac(p(c.maxpos(), c), p(1.0, c), &FpAccumulator::zero());
        let (acc, _) = mac(p(c.minpos(), c), p(1.0, c), &acc);
        // maxpos + minpos needs 225 bits; f64 would have dropped minpos
        assert!(!acc.fits_f64());
        let (acc, out) = mac(p(c.minpos(), c), p(-1.0, c), &acc);
        assert_eq!(acc.value(), c.maxpos());
        assert_eq!(out.to_real(), c.maxpos());
    }
}
