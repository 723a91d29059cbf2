//! Exact power-of-two helpers on f64.
//!
//! The quantizer needs `floor(log2 x)` and `2^k` to be exact for every
//! representable input, so both are computed from the f64 bit layout
//! rather than through transcendental functions.

/// floor(log2(x)) for finite x > 0, subnormals included.
pub(crate) fn floor_log2(x: f64) -> i32 {
    debug_assert!(x > 0.0 && x.is_finite());
    let bits = x.to_bits();
    let exp = ((bits >> 52) & 0x7ff) as i32;
    if exp == 0 {
        // subnormal: value is mant * 2^-1074
        let mant = bits & ((1u64 << 52) - 1);
        (63 - mant.leading_zeros() as i32) - 1074
    } else {
        exp - 1023
    }
}

/// 2^e as f64, exact for e in [-1074, 1023].
pub(crate) fn exp2i(e: i32) -> f64 {
    debug_assert!((-1074..=1023).contains(&e));
    if e >= -1022 {
        f64::from_bits(((e + 1023) as u64) << 52)
    } else {
        f64::from_bits(1u64 << (e + 1074))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floor_log2_matches_powers() {
        for e in -1074..=1023 {
            let x = exp2i(e);
            assert_eq!(floor_log2(x), e, "2^{e}");
        }
    }

    #[test]
    fn floor_log2_interior() {
        assert_eq!(floor_log2(0.4), -2);
        assert_eq!(floor_log2(0.6), -1);
        assert_eq!(floor_log2(1.0), 0);
        assert_eq!(floor_log2(1.999), 0);
        assert_eq!(floor_log2(100.0), 6);
        assert_eq!(floor_log2(f64::MIN_POSITIVE / 2.0), -1023);
    }
}
