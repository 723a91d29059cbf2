use crate::real::{exp2i, floor_log2};
use crate::{PositConfig, PositError};

/// The field decomposition of a quantized nonzero value.
///
/// `e_bits` holds the surviving top `eb` bits of the exponent (the low
/// `es - eb` bits are truncated away), `frac_bits` the surviving `fb`
/// fraction bits. Field widths follow the regime width `rb`, with the
/// exponent clamped into the word and the fraction taking whatever is
/// left: `eb = clamp(n-1-rb, 0, es)`, `fb = max(n-1-rb-eb, 0)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Decomposed {
    pub negative: bool,
    pub k: i32,
    pub e_bits: u32,
    pub frac_bits: u64,
    pub rb: u32,
    pub eb: u32,
    pub fb: u32,
}

impl Decomposed {
    /// Exponent value after rounding: pe = e_bits << (es - eb).
    pub fn pe(&self, config: PositConfig) -> i32 {
        (self.e_bits << (config.es() - self.eb)) as i32
    }

    /// Reconstruct s * useed^k * 2^pe * (1 + pf) exactly.
    pub fn value(&self, config: PositConfig) -> f64 {
        let exp = self.k * config.regime_scale() + self.pe(config);
        let significand = 1.0 + self.frac_bits as f64 * exp2i(-(self.fb as i32));
        let magnitude = significand * exp2i(exp);
        if self.negative {
            -magnitude
        } else {
            magnitude
        }
    }
}

/// Transform a finite real into posit field form, or None when it maps
/// to zero. Round-to-zero throughout: magnitudes below minpos vanish,
/// magnitudes above maxpos clip, and exponent/fraction bits that do not
/// fit are truncated.
pub(crate) fn decompose(x: f64, config: PositConfig) -> Result<Option<Decomposed>, PositError> {
    if !x.is_finite() {
        return Err(PositError::NonFinite(x));
    }
    if x == 0.0 {
        return Ok(None);
    }
    let negative = x < 0.0;
    let mut a = x.abs();
    if a < config.minpos() {
        return Ok(None);
    }
    if a > config.maxpos() {
        a = config.maxpos();
    }

    let n = config.n() as i32;
    let es = config.es();
    let rs = config.regime_scale();

    let exp = floor_log2(a);
    let k = exp.div_euclid(rs);
    let e = (exp - k * rs) as u32;
    // a / 2^exp - 1, exact: a is normal here and the quotient lands in [1, 2)
    let f = a * exp2i(-exp) - 1.0;

    let rb = if k >= 0 { k + 2 } else { -k + 1 };
    let eb = (n - 1 - rb).clamp(0, es as i32) as u32;
    let fb = (n - 1 - rb - eb as i32).max(0) as u32;

    let e_bits = e >> (es - eb);
    // f * 2^fb is exact (power-of-two scaling), so the floor is the
    // true truncation of the fraction.
    let frac_bits = (f * exp2i(fb as i32)) as u64;

    Ok(Some(Decomposed {
        negative,
        k,
        e_bits,
        frac_bits,
        rb: rb.min(n - 1) as u32,
        eb,
        fb,
    }))
}

/// Round a finite real to the nearest posit value toward zero.
///
/// Returns 0 for magnitudes below minpos, clips to ±maxpos, and
/// truncates exponent and fraction bits that do not fit the word. The
/// result is always exactly representable in `config`.
pub fn quantize_real(x: f64, config: PositConfig) -> Result<f64, PositError> {
    Ok(match decompose(x, config)? {
        None => 0.0,
        Some(d) => d.value(config),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(n: u32, es: u32) -> PositConfig {
        PositConfig::new(n, es).unwrap()
    }

    #[test]
    fn below_minpos_is_zero() {
        assert_eq!(quantize_real(0.01, cfg(5, 1)).unwrap(), 0.0);
        assert_eq!(quantize_real(-0.01, cfg(5, 1)).unwrap(), 0.0);
    }

    #[test]
    fn clips_to_maxpos() {
        assert_eq!(quantize_real(100.0, cfg(5, 1)).unwrap(), 64.0);
        assert_eq!(quantize_real(-100.0, cfg(5, 1)).unwrap(), -64.0);
    }

    #[test]
    fn truncates_fraction() {
        // 0.4: exp=-2, k=-1, e=0, f=0.6, rb=2, eb=1, fb=1 -> 1.5 * 1/4
        assert_eq!(quantize_real(0.4, cfg(5, 1)).unwrap(), 0.375);
        assert_eq!(quantize_real(-0.4, cfg(5, 1)).unwrap(), -0.375);
        // 0.6: exp=-1, k=-1, e=1, f=0.2 -> pf truncates to 0
        assert_eq!(quantize_real(0.6, cfg(5, 1)).unwrap(), 0.5);
    }

    #[test]
    fn field_trace_matches_hand_computation() {
        let d = decompose(0.4, cfg(5, 1)).unwrap().unwrap();
        assert_eq!((d.k, d.rb, d.eb, d.fb), (-1, 2, 1, 1));
        assert_eq!(d.e_bits, 0);
        assert_eq!(d.frac_bits, 1); // pf = 1/2
        assert_eq!(d.value(cfg(5, 1)), 0.375);
    }

    #[test]
    fn rejects_non_finite() {
        assert!(matches!(
            quantize_real(f64::NAN, cfg(8, 1)),
            Err(PositError::NonFinite(_))
        ));
        assert!(matches!(
            quantize_real(f64::INFINITY, cfg(8, 1)),
            Err(PositError::NonFinite(_))
        ));
    }

    #[test]
    fn exact_at_powers_of_two() {
        let c = cfg(8, 1);
        for t in -8..=8 {
            let x = exp2i(t);
            assert_eq!(quantize_real(x, c).unwrap(), x, "2^{t}");
        }
    }

    #[test]
    fn mac_example_value() {
        // 6 = 2*3 at (5,1): rb=3, eb=1, fb=0, truncates to 4
        assert_eq!(quantize_real(6.0, cfg(5, 1)).unwrap(), 4.0);
    }
}
