use std::fmt;

use num_bigint::BigUint;

use crate::{Decoded, PositBits, PositConfig, PositError};

/// A nonnegative dyadic rational `num / 2^den_pow2`, kept reduced.
/// Exact-fraction rendering for table output; big integers because
/// maxpos reaches 2^160 at (12, 4).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dyadic {
    num: BigUint,
    den_pow2: u32,
}

impl Dyadic {
    pub fn zero() -> Self {
        Dyadic {
            num: BigUint::ZERO,
            den_pow2: 0,
        }
    }

    /// num * 2^exp with num a small integer.
    pub fn new(num: u64, exp: i32) -> Self {
        let mut d = if exp >= 0 {
            Dyadic {
                num: BigUint::from(num) << exp as u32,
                den_pow2: 0,
            }
        } else {
            Dyadic {
                num: BigUint::from(num),
                den_pow2: (-exp) as u32,
            }
        };
        d.reduce();
        d
    }

    fn reduce(&mut self) {
        if self.num == BigUint::ZERO {
            self.den_pow2 = 0;
            return;
        }
        let tz = self.num.trailing_zeros().unwrap_or(0) as u32;
        let shift = tz.min(self.den_pow2);
        self.num >>= shift;
        self.den_pow2 -= shift;
    }

    pub fn to_f64(&self) -> f64 {
        // exact for every table-range value
        let mut v = 0.0f64;
        for (i, digit) in self.num.iter_u64_digits().enumerate() {
            v += digit as f64 * 2f64.powi(64 * i as i32);
        }
        v * 2f64.powi(-(self.den_pow2 as i32))
    }
}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den_pow2 == 0 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, BigUint::from(1u32) << self.den_pow2)
        }
    }
}

/// One row of the positive-pattern enumeration. `regime`, `exponent`
/// and `mantissa` are None for the zero pattern (printed as `x`).
#[derive(Debug, Clone, PartialEq)]
pub struct TableRow {
    pub bits: u64,
    pub pattern: String,
    pub regime: Option<i32>,
    pub exponent: Option<u32>,
    pub mantissa: Option<Dyadic>,
    pub value: Dyadic,
}

/// Enumerate all 2^(n-1) nonnegative patterns of a format, in pattern
/// order. Refuses formats above n=12.
pub fn enumerate_table(config: PositConfig) -> Result<Vec<TableRow>, PositError> {
    let n = config.n();
    if n > 12 {
        return Err(PositError::TableTooLarge(n));
    }
    let mut rows = Vec::with_capacity(1usize << (n - 1));
    for bits in 0..(1u64 << (n - 1)) {
        let p = PositBits::from_bits(bits, config);
        let row = match p.decode_fields() {
            Decoded::Zero => TableRow {
                bits,
                pattern: p.to_binary_string(),
                regime: None,
                exponent: None,
                mantissa: None,
                value: Dyadic::zero(),
            },
            Decoded::NaR => unreachable!("NaR has the sign bit set"),
            Decoded::Finite(fl) => {
                let frac_num = (fl.f * 2f64.powi(fl.fb as i32)) as u64;
                let exp = fl.k * config.regime_scale() + fl.e as i32;
                // (1+f) * 2^exp = (2^fb + frac) * 2^(exp-fb)
                let value = Dyadic::new((1u64 << fl.fb) + frac_num, exp - fl.fb as i32);
                TableRow {
                    bits,
                    pattern: p.to_binary_string(),
                    regime: Some(fl.k),
                    exponent: Some(fl.e),
                    mantissa: Some(Dyadic::new(frac_num, -(fl.fb as i32))),
                    value,
                }
            }
        };
        rows.push(row);
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dyadic_display() {
        assert_eq!(Dyadic::new(3, -1).to_string(), "3/2");
        assert_eq!(Dyadic::new(1, -6).to_string(), "1/64");
        assert_eq!(Dyadic::new(1, 6).to_string(), "64");
        assert_eq!(Dyadic::new(2, -1).to_string(), "1");
        assert_eq!(Dyadic::zero().to_string(), "0");
    }

    #[test]
    fn five_one_table_has_sixteen_rows() {
        let rows = enumerate_table(PositConfig::new(5, 1).unwrap()).unwrap();
        assert_eq!(rows.len(), 16);
        assert_eq!(rows[0].value.to_string(), "0");
        assert_eq!(rows[5].value.to_string(), "3/8");
        assert_eq!(rows[5].mantissa.as_ref().unwrap().to_string(), "1/2");
        assert_eq!(rows[15].value.to_string(), "64");
    }

    #[test]
    fn three_zero_table() {
        let rows = enumerate_table(PositConfig::new(3, 0).unwrap()).unwrap();
        let values: Vec<String> = rows.iter().map(|r| r.value.to_string()).collect();
        assert_eq!(values, ["0", "1/2", "1", "2"]);
    }

    #[test]
    fn two_zero_table() {
        let rows = enumerate_table(PositConfig::new(2, 0).unwrap()).unwrap();
        let values: Vec<String> = rows.iter().map(|r| r.value.to_string()).collect();
        assert_eq!(values, ["0", "1"]);
    }

    #[test]
    fn refuses_large_tables() {
        assert_eq!(
            enumerate_table(PositConfig::new(13, 1).unwrap()).unwrap_err(),
            PositError::TableTooLarge(13)
        );
    }

    #[test]
    fn values_round_trip_to_f64() {
        let cfg = PositConfig::new(10, 2).unwrap();
        for row in enumerate_table(cfg).unwrap() {
            let direct = PositBits::from_bits(row.bits, cfg).to_real();
            assert_eq!(row.value.to_f64(), direct, "pattern {}", row.pattern);
        }
    }
}
